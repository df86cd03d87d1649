//! Backoff n-gram scorer with add-k or stupid-backoff smoothing.
//!
//! Model files are plain text. Header lines start with a backslash; every
//! other line is `context... token logprob backoff`, sorted:
//!
//! ```text
//! \ngram
//! \order 2
//! \smoothing add-k 1
//! \vocab a b c
//! \floor -2.0794415416798357
//! <s> a -0.916290731874155 0
//! a -1.0986122886681098 -1.791759469228055
//! ```
//!
//! For add-k, the backoff field of a context is the log-probability of any
//! token unseen after it; the longest seen suffix of the history is used.
//! For stupid backoff it is the log of the backoff factor. In both cases the
//! scores are renormalized over the vocabulary, the unknown word and
//! end-of-sentence at prediction time.

use std::collections::{BTreeSet, HashMap};

use super::{Prediction, Scorer, ScorerState, Sym, BOS_SYMBOL, EOS_SYMBOL};
use crate::error::{Error, Result};
use crate::wfsa::{Label, SymbolTable, UNK_SYMBOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    /// Add-k counts within the longest seen context.
    AddK(f64),
    /// Relative frequencies with a constant backoff factor; unigrams are
    /// add-one smoothed.
    StupidBackoff(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NgramConfig {
    pub order: usize,
    pub smoothing: Smoothing,
    /// Tokens seen fewer times are mapped to the unknown word.
    pub min_count: usize,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            order: 3,
            smoothing: Smoothing::AddK(1.0),
            min_count: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    logprob: f64,
    backoff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    order: usize,
    smoothing: Smoothing,
    vocab: BTreeSet<Label>,
    /// Log-probability of a unigram event never seen in training.
    floor: f64,
    entries: HashMap<Vec<Sym>, Entry>,
}

impl NgramModel {
    pub fn train(corpus: &[Vec<Label>], cfg: NgramConfig) -> Result<NgramModel> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if cfg.order == 0 {
            return Err(Error::Config("n-gram order must be at least 1".into()));
        }
        match cfg.smoothing {
            Smoothing::AddK(k) if k.is_nan() || k <= 0.0 => {
                return Err(Error::Config(format!(
                    "add-k constant must be positive, got {k}"
                )))
            }
            Smoothing::StupidBackoff(a) if !(a > 0.0 && a <= 1.0) => {
                return Err(Error::Config(format!(
                    "backoff factor must be in (0, 1], got {a}"
                )))
            }
            _ => {}
        }

        let mut token_counts: HashMap<Label, usize> = HashMap::new();
        for s in corpus {
            for &t in s {
                *token_counts.entry(t).or_default() += 1;
            }
        }
        let vocab: BTreeSet<Label> = token_counts
            .into_iter()
            .filter(|&(_, c)| c >= cfg.min_count.max(1))
            .map(|(t, _)| t)
            .collect();

        let n = cfg.order;
        let mut ngrams: HashMap<Vec<Sym>, f64> = HashMap::new();
        let mut contexts: HashMap<Vec<Sym>, f64> = HashMap::new();
        let mut total = 0.0;
        for s in corpus {
            let mut history = vec![Sym::Bos; n - 1];
            let events = s
                .iter()
                .map(|t| {
                    if vocab.contains(t) {
                        Sym::Word(*t)
                    } else {
                        Sym::Unk
                    }
                })
                .chain([Sym::Eos]);
            for e in events {
                total += 1.0;
                for m in 0..n {
                    let ctx = &history[history.len() - m..];
                    let mut key = ctx.to_vec();
                    key.push(e);
                    *ngrams.entry(key).or_default() += 1.0;
                    if m > 0 {
                        *contexts.entry(ctx.to_vec()).or_default() += 1.0;
                    }
                }
                if n > 1 {
                    history.remove(0);
                    history.push(e);
                }
            }
        }

        let events = (vocab.len() + 2) as f64;
        let ctx_count = |key: &[Sym]| -> f64 {
            let ctx = &key[..key.len() - 1];
            if ctx.is_empty() {
                total
            } else {
                contexts[ctx]
            }
        };
        let (floor, mut entries): (f64, HashMap<Vec<Sym>, Entry>) = match cfg.smoothing {
            Smoothing::AddK(k) => {
                let entries = ngrams
                    .iter()
                    .map(|(key, &c)| {
                        let lp = ((c + k) / (ctx_count(key) + k * events)).ln();
                        (
                            key.clone(),
                            Entry {
                                logprob: lp,
                                backoff: 0.0,
                            },
                        )
                    })
                    .collect();
                ((k / (total + k * events)).ln(), entries)
            }
            Smoothing::StupidBackoff(_) => {
                let entries = ngrams
                    .iter()
                    .map(|(key, &c)| {
                        let lp = if key.len() == 1 {
                            ((c + 1.0) / (total + events)).ln()
                        } else {
                            (c / ctx_count(key)).ln()
                        };
                        (
                            key.clone(),
                            Entry {
                                logprob: lp,
                                backoff: 0.0,
                            },
                        )
                    })
                    .collect();
                ((1.0 / (total + events)).ln(), entries)
            }
        };
        for (ctx, &c) in &contexts {
            let backoff = match cfg.smoothing {
                Smoothing::AddK(k) => (k / (c + k * events)).ln(),
                Smoothing::StupidBackoff(a) => a.ln(),
            };
            entries
                .entry(ctx.clone())
                .or_insert(Entry {
                    logprob: f64::NEG_INFINITY,
                    backoff: 0.0,
                })
                .backoff = backoff;
        }

        Ok(NgramModel {
            order: n,
            smoothing: cfg.smoothing,
            vocab,
            floor,
            entries,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    /// Per-event perplexity (end-of-sentence included) over `corpus`.
    pub fn perplexity(&self, corpus: &[Vec<Label>]) -> f64 {
        let mut logprob = 0.0;
        let mut n = 0usize;
        for s in corpus {
            let mut st = self.init(&[]);
            for &t in s {
                logprob += self.predict(&st).token_logprob(t);
                st = self.consume(&st, t);
                n += 1;
            }
            logprob += self.predict(&st).eos_logprob;
            n += 1;
        }
        (-logprob / n.max(1) as f64).exp()
    }

    fn sym_name(s: Sym, symtab: &SymbolTable) -> String {
        match s {
            Sym::Bos => BOS_SYMBOL.to_string(),
            Sym::Eos => EOS_SYMBOL.to_string(),
            Sym::Unk => UNK_SYMBOL.to_string(),
            Sym::Word(t) => symtab.render(&[t]),
        }
    }

    pub fn to_text(&self, symtab: &SymbolTable) -> String {
        let mut out = String::from("\\ngram\n");
        out.push_str(&format!("\\order {}\n", self.order));
        match self.smoothing {
            Smoothing::AddK(k) => out.push_str(&format!("\\smoothing add-k {k}\n")),
            Smoothing::StupidBackoff(a) => {
                out.push_str(&format!("\\smoothing stupid-backoff {a}\n"))
            }
        }
        let mut vocab: Vec<String> = self.vocab.iter().map(|&t| symtab.render(&[t])).collect();
        vocab.sort();
        out.push_str("\\vocab");
        for v in &vocab {
            out.push(' ');
            out.push_str(v);
        }
        out.push('\n');
        out.push_str(&format!("\\floor {}\n", self.floor));
        let mut lines: Vec<String> = self
            .entries
            .iter()
            .map(|(key, e)| {
                let toks: Vec<String> = key.iter().map(|&s| Self::sym_name(s, symtab)).collect();
                format!("{} {} {}", toks.join(" "), e.logprob, e.backoff)
            })
            .collect();
        lines.sort();
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }

    /// Reads a model file, interning its tokens into `symtab`.
    pub fn parse(text: &str, symtab: &mut SymbolTable) -> Result<NgramModel> {
        let mut order = None;
        let mut smoothing = None;
        let mut vocab = BTreeSet::new();
        let mut floor = None;
        let mut entries = HashMap::new();
        let mut sym = |t: &str| match t {
            BOS_SYMBOL => Sym::Bos,
            EOS_SYMBOL => Sym::Eos,
            UNK_SYMBOL => Sym::Unk,
            t => Sym::Word(symtab.intern(t)),
        };
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |what: &str| Error::parse(lineno, what.to_string());
            if let Some(head) = fields[0].strip_prefix('\\') {
                match head {
                    "ngram" => {}
                    "order" => {
                        order = Some(
                            fields
                                .get(1)
                                .and_then(|v| v.parse::<usize>().ok())
                                .filter(|&o| o >= 1)
                                .ok_or_else(|| bad("bad order"))?,
                        )
                    }
                    "smoothing" => {
                        let v: f64 = fields
                            .get(2)
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| bad("bad smoothing parameter"))?;
                        smoothing = Some(match fields.get(1).copied() {
                            Some("add-k") => Smoothing::AddK(v),
                            Some("stupid-backoff") => Smoothing::StupidBackoff(v),
                            _ => return Err(bad("unknown smoothing")),
                        });
                    }
                    "vocab" => {
                        for t in &fields[1..] {
                            match sym(t) {
                                Sym::Word(l) => {
                                    vocab.insert(l);
                                }
                                _ => return Err(bad("reserved token in vocabulary")),
                            }
                        }
                    }
                    "floor" => {
                        floor = Some(
                            fields
                                .get(1)
                                .and_then(|v| v.parse::<f64>().ok())
                                .ok_or_else(|| bad("bad floor"))?,
                        )
                    }
                    _ => return Err(bad("unknown header")),
                }
                continue;
            }
            if fields.len() < 3 {
                return Err(bad("expected `context... token logprob backoff`"));
            }
            let k = fields.len() - 2;
            let logprob: f64 = fields[k].parse().map_err(|_| bad("bad logprob"))?;
            let backoff: f64 = fields[k + 1].parse().map_err(|_| bad("bad backoff"))?;
            let key: Vec<Sym> = fields[..k].iter().map(|t| sym(t)).collect();
            entries.insert(key, Entry { logprob, backoff });
        }
        let order = order.ok_or_else(|| Error::parse(0, "missing \\order"))?;
        if entries.keys().any(|k| k.len() > order) {
            return Err(Error::parse(0, "n-gram longer than the model order"));
        }
        Ok(NgramModel {
            order,
            smoothing: smoothing.ok_or_else(|| Error::parse(0, "missing \\smoothing"))?,
            vocab,
            floor: floor.ok_or_else(|| Error::parse(0, "missing \\floor"))?,
            entries,
        })
    }

    fn event_score(&self, history: &[Sym], event: Sym, key: &mut Vec<Sym>) -> f64 {
        match self.smoothing {
            Smoothing::AddK(_) => {
                // Longest suffix of the history seen as a context.
                let ctx_len = (1..=history.len())
                    .rev()
                    .find(|&m| {
                        self.entries
                            .get(&history[history.len() - m..])
                            .is_some_and(|e| e.backoff < 0.0)
                    })
                    .unwrap_or(0);
                let ctx = &history[history.len() - ctx_len..];
                key.clear();
                key.extend_from_slice(ctx);
                key.push(event);
                match self.entries.get(key.as_slice()) {
                    Some(e) if e.logprob > f64::NEG_INFINITY => e.logprob,
                    _ if ctx_len == 0 => self.floor,
                    _ => self.entries[ctx].backoff,
                }
            }
            Smoothing::StupidBackoff(a) => {
                let penalty = a.ln();
                let mut acc = 0.0;
                for m in (0..=history.len()).rev() {
                    key.clear();
                    key.extend_from_slice(&history[history.len() - m..]);
                    key.push(event);
                    if let Some(e) = self.entries.get(key.as_slice()) {
                        if e.logprob > f64::NEG_INFINITY {
                            return acc + e.logprob;
                        }
                    }
                    if m > 0 {
                        acc += penalty;
                    }
                }
                acc + self.floor
            }
        }
    }
}

impl Scorer for NgramModel {
    fn init(&self, _source: &[Label]) -> ScorerState {
        ScorerState {
            history: vec![Sym::Bos; self.order - 1],
        }
    }

    fn predict(&self, state: &ScorerState) -> Prediction {
        let h = &state.history;
        let mut key = Vec::with_capacity(self.order);
        let in_vocab = self
            .vocab
            .iter()
            .map(|&t| (t, self.event_score(h, Sym::Word(t), &mut key)))
            .collect();
        Prediction {
            in_vocab,
            unk_logprob: self.event_score(h, Sym::Unk, &mut key),
            eos_logprob: self.event_score(h, Sym::Eos, &mut key),
        }
        .normalized()
    }

    fn consume(&self, state: &ScorerState, token: Label) -> ScorerState {
        let mut history = state.history.clone();
        if self.order > 1 {
            history.remove(0);
            history.push(self.sym(token));
        }
        ScorerState { history }
    }

    fn vocab(&self) -> &BTreeSet<Label> {
        &self.vocab
    }
}
