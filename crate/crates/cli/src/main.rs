//! `latdec`: batch front end for lattice preprocessing, constrained decoding,
//! n-best rescoring and evaluation.

mod data;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use latdec::baselines::{decode_unconstrained, rescore_nbest_dfs, rescore_nbest_naive, NBestList};
use latdec::decoder::{DecodeResult, DecoderConfig};
use latdec::demo::{demo_set, seed_from_env, DEFAULT_SEED};
use latdec::eval::{corpus_bleu, decode_corpus, tune_grid, BleuReport, GridSpec};
use latdec::posterior::{prepare_with, PosteriorLattice, PrepareOptions, StageTimings};
use latdec::scorer::{NgramConfig, NgramModel, Scorer, Smoothing};
use latdec::{serialize_wfsa, Semiring, SymbolTable};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "latdec",
    version,
    about = "Lattice-constrained decoding with a predictive scorer"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Emit JSON lines instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn raw lattices into pushed posterior lattices.
    Push {
        #[arg(long)]
        symbols: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Sum all derivations of a string instead of keeping the best one.
        #[arg(long)]
        log_det: bool,
    },
    /// Beam search over each lattice.
    Decode {
        #[command(flatten)]
        lat: LatticeArgs,
        #[command(flatten)]
        scorer: ScorerArgs,
        #[command(flatten)]
        dec: DecodeArgs,
        /// Ignore the lattices and search the scorer vocabulary.
        #[arg(long)]
        unconstrained: bool,
        /// Also write one hypothesis per line here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// BLEU and expansions per beam size and per n-best lattice size.
    Sweep {
        #[command(flatten)]
        lat: LatticeArgs,
        #[command(flatten)]
        scorer: ScorerArgs,
        #[command(flatten)]
        dec: DecodeArgs,
        #[arg(long)]
        refs: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,5,12")]
        beams: Vec<usize>,
        /// Restrict each lattice to its n best strings, for each n.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// Extract n-best lists.
    Nbest {
        #[command(flatten)]
        lat: LatticeArgs,
        #[arg(long, default_value_t = 100)]
        nbest: usize,
    },
    /// Rescore an n-best file.
    Rescore {
        #[arg(long)]
        symbols: PathBuf,
        #[arg(long = "nbest-file")]
        nbest_file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Dfs)]
        mode: Mode,
        /// Recompute lattice terms from these lattices.
        #[arg(long)]
        lattices: Option<PathBuf>,
        #[command(flatten)]
        scorer: ScorerArgs,
        #[command(flatten)]
        dec: DecodeArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Grid search of the lattice weight for BLEU.
    Tune {
        #[command(flatten)]
        lat: LatticeArgs,
        #[command(flatten)]
        scorer: ScorerArgs,
        #[command(flatten)]
        dec: DecodeArgs,
        #[arg(long)]
        refs: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        grid_min: f64,
        #[arg(long, default_value_t = 2.0)]
        grid_max: f64,
        #[arg(long, default_value_t = 0.25)]
        grid_step: f64,
    },
    /// Corpus BLEU of a hypothesis file against a reference file.
    Bleu {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
    },
    /// Structural report per lattice.
    Stats {
        #[command(flatten)]
        lat: LatticeArgs,
    },
    /// Train an n-gram scorer on a tokenized corpus.
    TrainNgram {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Existing symbol table; new tokens are added in memory only.
        #[arg(long)]
        symbols: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, value_enum, default_value_t = SmoothingKind::AddK)]
        smoothing: SmoothingKind,
        #[arg(long, default_value_t = 0.1)]
        k: f64,
        #[arg(long, default_value_t = 0.4)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        min_count: usize,
    },
    /// Write the synthetic demo set (seeded by LG_SEED).
    GenDemo {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 60)]
        sentences: usize,
        #[arg(long, default_value_t = 500)]
        train: usize,
    },
}

#[derive(Args)]
struct LatticeArgs {
    #[arg(long)]
    symbols: PathBuf,
    /// Directory of `<id>.lat` files.
    #[arg(long)]
    lattices: PathBuf,
}

#[derive(Args)]
struct ScorerArgs {
    #[arg(long, value_enum, default_value_t = ScorerKind::Uniform)]
    scorer: ScorerKind,
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct DecodeArgs {
    #[arg(long, default_value_t = 12)]
    beam: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda_lat: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_scorer: f64,
    #[arg(long)]
    local_softmax: bool,
    #[arg(long)]
    max_steps: Option<usize>,
}

impl DecodeArgs {
    fn config(&self) -> Result<DecoderConfig> {
        let cfg = DecoderConfig {
            beam: self.beam,
            lambda_lat: self.lambda_lat,
            lambda_scorer: self.lambda_scorer,
            local_softmax: self.local_softmax,
            max_steps: self.max_steps,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScorerKind {
    Uniform,
    Ngram,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Mode {
    Naive,
    Dfs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SmoothingKind {
    AddK,
    StupidBackoff,
}

#[derive(Serialize)]
struct Record<'a> {
    id: &'a str,
    tokens: Vec<&'a str>,
    score: f64,
    expansions: usize,
}

/// Per-item failures, reported on stderr; any makes the exit status 1.
#[derive(Default)]
struct Failures(usize);

impl Failures {
    fn report(&mut self, id: &str, err: &dyn std::fmt::Display) {
        eprintln!("error: {id}: {err:#}");
        self.0 += 1;
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(k) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<usize> {
    let json = cli.json;
    let mut fail = Failures::default();
    let out = match cli.cmd {
        Command::Push {
            symbols,
            input,
            output,
            log_det,
        } => push(&symbols, &input, &output, log_det, json, &mut fail)?,
        Command::Decode {
            lat,
            scorer,
            dec,
            unconstrained,
            output,
        } => decode_cmd(
            &lat,
            &scorer,
            &dec,
            unconstrained,
            output.as_deref(),
            json,
            &mut fail,
        )?,
        Command::Sweep {
            lat,
            scorer,
            dec,
            refs,
            beams,
            sizes,
        } => sweep(&lat, &scorer, &dec, &refs, &beams, &sizes, json, &mut fail)?,
        Command::Nbest { lat, nbest } => nbest_cmd(&lat, nbest, &mut fail)?,
        Command::Rescore {
            symbols,
            nbest_file,
            mode,
            lattices,
            scorer,
            dec,
            output,
        } => rescore_cmd(
            &symbols,
            &nbest_file,
            mode,
            lattices.as_deref(),
            &scorer,
            &dec,
            output.as_deref(),
            json,
            &mut fail,
        )?,
        Command::Tune {
            lat,
            scorer,
            dec,
            refs,
            grid_min,
            grid_max,
            grid_step,
        } => {
            let grid = GridSpec {
                min: grid_min,
                max: grid_max,
                step: grid_step,
            };
            tune_cmd(&lat, &scorer, &dec, &refs, &grid, json, &mut fail)?
        }
        Command::Bleu { hyp, reference } => {
            let report = corpus_bleu(
                &data::read_sentences(&hyp)?,
                &data::read_sentences(&reference)?,
            )?;
            bleu_line(&report, json)
        }
        Command::Stats { lat } => stats(&lat, json, &mut fail)?,
        Command::TrainNgram {
            corpus,
            output,
            symbols,
            order,
            smoothing,
            k,
            alpha,
            min_count,
        } => {
            let mut symtab = match symbols {
                Some(p) => data::load_symbols(&p)?,
                None => SymbolTable::new(),
            };
            let train = data::encode_all(&data::read_sentences(&corpus)?, &mut symtab);
            let smoothing = match smoothing {
                SmoothingKind::AddK => Smoothing::AddK(k),
                SmoothingKind::StupidBackoff => Smoothing::StupidBackoff(alpha),
            };
            let model = NgramModel::train(
                &train,
                NgramConfig {
                    order,
                    smoothing,
                    min_count,
                },
            )?;
            fs::write(&output, model.to_text(&symtab))
                .with_context(|| format!("writing {}", output.display()))?;
            format!(
                "trained order-{order} model, training perplexity {:.4}\n",
                model.perplexity(&train)
            )
        }
        Command::GenDemo {
            output,
            sentences,
            train,
        } => gen_demo(&output, sentences, train)?,
    };
    print!("{out}");
    Ok(fail.0)
}

fn push(
    symbols: &Path,
    input: &Path,
    output: &Path,
    log_det: bool,
    json: bool,
    fail: &mut Failures,
) -> Result<String> {
    let mut symtab = data::load_symbols(symbols)?;
    let raw = data::load_raw(input, &mut symtab)?;
    fs::create_dir_all(output).with_context(|| format!("creating {}", output.display()))?;
    let opts = PrepareOptions {
        det_semiring: if log_det {
            Semiring::Log
        } else {
            Semiring::Tropical
        },
    };
    let results: Vec<_> = raw
        .into_par_iter()
        .map(|(id, w)| {
            let r = w.and_then(|w| Ok(prepare_with(&w, opts)?));
            (id, r)
        })
        .collect();
    let mut total = StageTimings::default();
    let mut done = 0usize;
    for (id, r) in results {
        match r {
            Ok((p, t)) => {
                let path = output.join(format!("{id}.lat"));
                fs::write(&path, serialize_wfsa(p.inner(), &symtab))
                    .with_context(|| format!("writing {}", path.display()))?;
                total += t;
                done += 1;
            }
            Err(e) => fail.report(&id, &e),
        }
    }
    let rows = [
        ("determinize", total.determinize),
        ("minimize", total.minimize),
        ("push", total.push),
    ];
    let mut out = String::new();
    if json {
        for (stage, d) in rows {
            let rec = serde_json::json!({
                "stage": stage,
                "total_ms": d.as_secs_f64() * 1e3,
                "mean_ms": d.as_secs_f64() * 1e3 / done.max(1) as f64,
                "lattices": done,
            });
            writeln!(out, "{rec}")?;
        }
    } else {
        writeln!(out, "{:<12} {:>12} {:>12}", "stage", "total_ms", "mean_ms")?;
        for (stage, d) in rows {
            let ms = d.as_secs_f64() * 1e3;
            writeln!(
                out,
                "{stage:<12} {ms:>12.3} {:>12.3}",
                ms / done.max(1) as f64
            )?;
        }
    }
    Ok(out)
}

/// Parsed posterior lattices in id order; failures are reported and skipped.
fn load_posteriors(
    lat: &LatticeArgs,
    symtab: &mut SymbolTable,
    fail: &mut Failures,
) -> Result<Vec<(String, PosteriorLattice)>> {
    let raw = data::load_raw(&lat.lattices, symtab)?;
    let converted: Vec<_> = raw
        .into_par_iter()
        .map(|(id, w)| {
            let p = w.and_then(data::to_posterior);
            (id, p)
        })
        .collect();
    let mut out = Vec::new();
    for (id, p) in converted {
        match p {
            Ok(p) => out.push((id, p)),
            Err(e) => fail.report(&id, &e),
        }
    }
    Ok(out)
}

fn record_line(
    id: &str,
    tokens: &[u32],
    score: f64,
    expansions: usize,
    symtab: &SymbolTable,
    json: bool,
) -> Result<String> {
    let rendered = symtab.render(tokens);
    Ok(if json {
        let rec = Record {
            id,
            tokens: rendered.split_whitespace().collect(),
            score,
            expansions,
        };
        format!("{}\n", serde_json::to_string(&rec)?)
    } else {
        format!("{id}\t{expansions}\t{score}\t{rendered}\n")
    })
}

/// Writes the per-sentence output and returns the hypotheses in order,
/// empty for failed sentences.
fn emit_results(
    ids: &[String],
    results: Vec<latdec::Result<(Vec<u32>, f64, usize)>>,
    symtab: &SymbolTable,
    json: bool,
    fail: &mut Failures,
    out: &mut String,
) -> Result<Vec<Vec<u32>>> {
    let mut hyps = Vec::new();
    let mut total = 0usize;
    let mut n = 0usize;
    for (id, r) in ids.iter().zip(results) {
        match r {
            Ok((tokens, score, expansions)) => {
                out.push_str(&record_line(id, &tokens, score, expansions, symtab, json)?);
                total += expansions;
                n += 1;
                hyps.push(tokens);
            }
            Err(e) => {
                fail.report(id, &e);
                hyps.push(Vec::new());
            }
        }
    }
    let mean = total as f64 / n.max(1) as f64;
    if !json {
        writeln!(out, "# mean node expansions per sentence: {mean:.2}")?;
    }
    log::info!("mean node expansions per sentence: {mean:.2}");
    Ok(hyps)
}

fn write_hyps(path: &Path, hyps: &[Vec<u32>], symtab: &SymbolTable) -> Result<()> {
    let mut text = String::new();
    for h in hyps {
        text.push_str(&symtab.render(h));
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn summarize(r: latdec::Result<DecodeResult>) -> latdec::Result<(Vec<u32>, f64, usize)> {
    r.map(|d| (d.best.prefix, d.best.score, d.node_expansions))
}

fn decode_cmd(
    lat: &LatticeArgs,
    sc: &ScorerArgs,
    dec: &DecodeArgs,
    unconstrained: bool,
    output: Option<&Path>,
    json: bool,
    fail: &mut Failures,
) -> Result<String> {
    let mut symtab = data::load_symbols(&lat.symbols)?;
    let lattices = load_posteriors(lat, &mut symtab, fail)?;
    let scorer = data::load_scorer(sc.scorer, sc.model.as_deref(), &mut symtab)?;
    let ids: Vec<String> = lattices.iter().map(|(id, _)| id.clone()).collect();
    let results: Vec<_> = if unconstrained {
        let mut cfg = dec.clone();
        cfg.lambda_lat = 0.0;
        let cfg = cfg.config()?;
        let scorer: &dyn Scorer = scorer.as_ref();
        ids.par_iter()
            .map(|id| {
                summarize(decode_unconstrained(scorer, &cfg).map_err(|e| e.in_sentence(id.clone())))
            })
            .collect()
    } else {
        decode_corpus(&lattices, scorer.as_ref(), &dec.config()?)
            .into_iter()
            .map(summarize)
            .collect()
    };
    let mut out = String::new();
    let hyps = emit_results(&ids, results, &symtab, json, fail, &mut out)?;
    if let Some(path) = output {
        write_hyps(path, &hyps, &symtab)?;
    }
    Ok(out)
}

fn load_refs(path: &Path, n: usize, symtab: &mut SymbolTable) -> Result<Vec<Vec<u32>>> {
    let refs = data::encode_all(&data::read_sentences(path)?, symtab);
    if refs.len() != n {
        bail!(
            "{} has {} references for {n} lattices",
            path.display(),
            refs.len()
        );
    }
    Ok(refs)
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    lat: &LatticeArgs,
    sc: &ScorerArgs,
    dec: &DecodeArgs,
    refs: &Path,
    beams: &[usize],
    sizes: &[usize],
    json: bool,
    fail: &mut Failures,
) -> Result<String> {
    let mut symtab = data::load_symbols(&lat.symbols)?;
    let lattices = load_posteriors(lat, &mut symtab, fail)?;
    if fail.0 > 0 {
        bail!("cannot sweep with unreadable lattices");
    }
    let refs = load_refs(refs, lattices.len(), &mut symtab)?;
    let scorer = data::load_scorer(sc.scorer, sc.model.as_deref(), &mut symtab)?;
    let base = dec.config()?;
    let mut out = String::new();
    if !json {
        writeln!(
            out,
            "{:<8} {:>8} {:>10} {:>14}",
            "sweep", "value", "bleu", "expansions"
        )?;
    }
    let mut row = |kind: &str,
                   value: usize,
                   set: &[(String, PosteriorLattice)],
                   cfg: &DecoderConfig,
                   fail: &mut Failures|
     -> Result<()> {
        let mut hyps = Vec::new();
        let mut total = 0;
        for r in decode_corpus(set, scorer.as_ref(), cfg) {
            match r {
                Ok(d) => {
                    total += d.node_expansions;
                    hyps.push(d.best.prefix);
                }
                Err(e) => {
                    fail.report(kind, &e);
                    hyps.push(Vec::new());
                }
            }
        }
        let bleu = corpus_bleu(&hyps, &refs)?.score * 100.0;
        let mean = total as f64 / set.len() as f64;
        if json {
            let rec = serde_json::json!({"sweep": kind, "value": value, "bleu": bleu, "expansions": mean});
            writeln!(out, "{rec}")?;
        } else {
            writeln!(out, "{kind:<8} {value:>8} {bleu:>10.2} {mean:>14.2}")?;
        }
        Ok(())
    };
    for &beam in beams {
        row("beam", beam, &lattices, &base.with_beam(beam), fail)?;
    }
    for &n in sizes {
        let restricted = lattices
            .par_iter()
            .map(|(id, p)| {
                let nb = NBestList::from_lattice(id, p, n)?;
                Ok((id.clone(), latdec::prepare(&nb.to_lattice())?))
            })
            .collect::<latdec::Result<Vec<_>>>()?;
        row("nbest", n, &restricted, &base, fail)?;
    }
    Ok(out)
}

fn nbest_cmd(lat: &LatticeArgs, n: usize, fail: &mut Failures) -> Result<String> {
    let mut symtab = data::load_symbols(&lat.symbols)?;
    let lattices = load_posteriors(lat, &mut symtab, fail)?;
    let lists: Vec<_> = lattices
        .par_iter()
        .map(|(id, p)| NBestList::from_lattice(id, p, n))
        .collect();
    let mut out = String::new();
    for ((id, _), l) in lattices.iter().zip(lists) {
        match l {
            Ok(l) => out.push_str(&l.to_text(&symtab)),
            Err(e) => fail.report(id, &e),
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn rescore_cmd(
    symbols: &Path,
    nbest_file: &Path,
    mode: Mode,
    lattices: Option<&Path>,
    sc: &ScorerArgs,
    dec: &DecodeArgs,
    output: Option<&Path>,
    json: bool,
    fail: &mut Failures,
) -> Result<String> {
    let mut symtab = data::load_symbols(symbols)?;
    let lists = NBestList::parse_many(&data::read(nbest_file)?, &mut symtab)
        .with_context(|| format!("parsing {}", nbest_file.display()))?;
    let posteriors: std::collections::HashMap<String, PosteriorLattice> = match lattices {
        Some(dir) => {
            let args = LatticeArgs {
                symbols: symbols.to_path_buf(),
                lattices: dir.to_path_buf(),
            };
            load_posteriors(&args, &mut symtab, fail)?
                .into_iter()
                .collect()
        }
        None => Default::default(),
    };
    let scorer = data::load_scorer(sc.scorer, sc.model.as_deref(), &mut symtab)?;
    let cfg = dec.config()?;
    let results: Vec<_> = lists
        .par_iter()
        .map(|nb| {
            let p =
                match lattices {
                    Some(_) => Some(posteriors.get(&nb.id).ok_or_else(|| {
                        latdec::Error::Config(format!("no lattice for {}", nb.id))
                    })?),
                    None => None,
                };
            let r = match mode {
                Mode::Naive => rescore_nbest_naive(nb, scorer.as_ref(), &cfg, p),
                Mode::Dfs => rescore_nbest_dfs(nb, scorer.as_ref(), &cfg, p),
            }?;
            for &i in &r.rejected {
                log::warn!("{}: hypothesis {} is not in the lattice", nb.id, i + 1);
            }
            let best = r.ranked.first().ok_or(latdec::Error::EmptyLattice)?;
            Ok((best.tokens.clone(), best.score, r.scorer_predict_calls))
        })
        .map(|r: latdec::Result<_>| r)
        .collect();
    let ids: Vec<String> = lists.iter().map(|l| l.id.clone()).collect();
    let results = results
        .into_iter()
        .zip(&ids)
        .map(|(r, id)| r.map_err(|e| e.in_sentence(id.clone())))
        .collect();
    let mut out = String::new();
    let hyps = emit_results(&ids, results, &symtab, json, fail, &mut out)?;
    if let Some(path) = output {
        write_hyps(path, &hyps, &symtab)?;
    }
    Ok(out)
}

fn tune_cmd(
    lat: &LatticeArgs,
    sc: &ScorerArgs,
    dec: &DecodeArgs,
    refs: &Path,
    grid: &GridSpec,
    json: bool,
    fail: &mut Failures,
) -> Result<String> {
    let mut symtab = data::load_symbols(&lat.symbols)?;
    let lattices = load_posteriors(lat, &mut symtab, fail)?;
    if fail.0 > 0 {
        bail!("cannot tune with unreadable lattices");
    }
    let refs = load_refs(refs, lattices.len(), &mut symtab)?;
    let scorer = data::load_scorer(sc.scorer, sc.model.as_deref(), &mut symtab)?;
    let mut base = dec.clone();
    base.lambda_scorer = 1.0;
    let r = tune_grid(&lattices, &refs, scorer.as_ref(), &base.config()?, grid)?;
    let mut out = String::new();
    for (l, b) in &r.grid {
        if json {
            writeln!(
                out,
                "{}",
                serde_json::json!({"lambda_lat": l, "lambda_scorer": 1.0, "bleu": b.score * 100.0})
            )?;
        } else {
            writeln!(out, "lambda_lat={l} bleu={:.2}", b.score * 100.0)?;
        }
    }
    if json {
        let best = serde_json::json!({"best": {"lambda_lat": r.lambda_lat, "lambda_scorer": r.lambda_scorer, "bleu": r.bleu.score * 100.0}});
        writeln!(out, "{best}")?;
    } else {
        writeln!(
            out,
            "best lambda_lat={} lambda_scorer={} {}",
            r.lambda_lat, r.lambda_scorer, r.bleu
        )?;
    }
    Ok(out)
}

fn bleu_line(r: &BleuReport, json: bool) -> String {
    if json {
        let rec = serde_json::json!({
            "bleu": r.score * 100.0,
            "precisions": r.precisions,
            "brevity_penalty": r.brevity_penalty,
            "hyp_len": r.hyp_len,
            "ref_len": r.ref_len,
        });
        format!("{rec}\n")
    } else {
        format!("{r}\n")
    }
}

fn stats(lat: &LatticeArgs, json: bool, fail: &mut Failures) -> Result<String> {
    let mut symtab = data::load_symbols(&lat.symbols)?;
    let mut out = String::new();
    if !json {
        writeln!(
            out,
            "{:<10} {:>7} {:>7} {:>7} {:>8} {:>9} {:>9} {:>8} {:>5} {:>5}",
            "id",
            "states",
            "arcs",
            "finals",
            "acyclic",
            "access",
            "coaccess",
            "arcs/st",
            "eps",
            "det"
        )?;
    }
    for (id, w) in data::load_raw(&lat.lattices, &mut symtab)? {
        let w = match w {
            Ok(w) => w,
            Err(e) => {
                fail.report(&id, &e);
                continue;
            }
        };
        let v = w.validate();
        if json {
            let rec = serde_json::json!({
                "id": id,
                "states": v.num_states,
                "arcs": v.num_arcs,
                "finals": v.num_finals,
                "acyclic": v.is_acyclic,
                "accessible": v.accessible,
                "coaccessible": v.coaccessible,
                "arcs_per_state": v.avg_arcs_per_state,
                "epsilons": v.has_epsilons,
                "deterministic": v.is_deterministic,
            });
            writeln!(out, "{rec}")?;
        } else {
            writeln!(
                out,
                "{id:<10} {:>7} {:>7} {:>7} {:>8} {:>9} {:>9} {:>8.2} {:>5} {:>5}",
                v.num_states,
                v.num_arcs,
                v.num_finals,
                v.is_acyclic,
                v.accessible,
                v.coaccessible,
                v.avg_arcs_per_state,
                v.has_epsilons,
                v.is_deterministic
            )?;
        }
    }
    Ok(out)
}

fn gen_demo(output: &Path, sentences: usize, train: usize) -> Result<String> {
    let seed = seed_from_env(DEFAULT_SEED);
    let d = demo_set(seed, sentences, train);
    let lat_dir = output.join("lattices");
    fs::create_dir_all(&lat_dir).with_context(|| format!("creating {}", lat_dir.display()))?;
    fs::write(output.join("symbols.txt"), d.symbols.to_text())?;
    let lines = |rows: &mut dyn Iterator<Item = &Vec<u32>>| -> String {
        rows.map(|r| format!("{}\n", d.symbols.render(r))).collect()
    };
    fs::write(output.join("train.txt"), lines(&mut d.train.iter()))?;
    fs::write(
        output.join("refs.txt"),
        lines(&mut d.sentences.iter().map(|s| &s.reference)),
    )?;
    for s in &d.sentences {
        fs::write(
            lat_dir.join(format!("{}.lat", s.id)),
            serialize_wfsa(&s.lattice, &d.symbols),
        )?;
    }
    Ok(format!(
        "wrote {} lattices and {} training sentences to {} (seed {seed})\n",
        d.sentences.len(),
        d.train.len(),
        output.display()
    ))
}
