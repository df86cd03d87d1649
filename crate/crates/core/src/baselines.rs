//! Comparison systems: unconstrained beam search over the scorer vocabulary
//! and rescoring of n-best lists, either one hypothesis at a time or over a
//! prefix trie that shares scorer states.
//!
//! n-best files hold one hypothesis per line:
//!
//! ```text
//! s000 ||| ka lo mi ||| -1.25
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::decoder::{beam_search, hyp_order, weighted, DecodeResult, DecoderConfig, Expansion};
use crate::error::{Error, Result};
use crate::ops::n_shortest_strings;
use crate::posterior::PosteriorLattice;
use crate::scorer::{Scorer, ScorerState};
use crate::semiring::{Semiring, Weight};
use crate::wfsa::{Arc, Label, SymbolTable, Wfsa, UNK_LABEL};

/// Iteration limit of [`decode_unconstrained`] when none is configured.
pub const UNCONSTRAINED_MAX_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct NBestEntry {
    pub tokens: Vec<Label>,
    pub lattice_logprob: f64,
}

/// Distinct hypotheses of one sentence, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct NBestList {
    pub id: String,
    pub entries: Vec<NBestEntry>,
}

impl NBestList {
    /// The `n` most probable strings of a posterior lattice.
    pub fn from_lattice(id: &str, p: &PosteriorLattice, n: usize) -> Result<NBestList> {
        let entries = n_shortest_strings(p.inner(), n)?
            .into_iter()
            .map(|(tokens, cost)| NBestEntry {
                tokens,
                lattice_logprob: cost.logprob(),
            })
            .collect();
        Ok(NBestList {
            id: id.to_string(),
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// A lattice accepting exactly the listed strings, each with cost
    /// `-lattice_logprob`.
    pub fn to_lattice(&self) -> Wfsa {
        let mut w = Wfsa::new(Semiring::Tropical);
        let start = w.start();
        for e in &self.entries {
            let mut q = start;
            for &t in &e.tokens {
                let next = w.add_state();
                w.add_arc(q, Arc::new(t, Weight::ONE, next));
                q = next;
            }
            let cost = Weight::from_logprob(e.lattice_logprob);
            let f = w.semiring().plus(w.final_weight(q), cost);
            w.set_final(q, f);
        }
        w
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries are distinct and their log-probabilities non-increasing.
    pub fn is_well_formed(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.entries.iter().all(|e| seen.insert(&e.tokens))
            && self
                .entries
                .windows(2)
                .all(|w| w[0].lattice_logprob >= w[1].lattice_logprob)
    }

    pub fn to_text(&self, symtab: &SymbolTable) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{} ||| {} ||| {}",
                self.id,
                symtab.render(&e.tokens),
                e.lattice_logprob
            );
        }
        out
    }

    /// Parses an n-best file, grouping lines by sentence id in order of
    /// first appearance. Unknown tokens are resolved through `symtab`.
    pub fn parse_many(text: &str, symtab: &mut SymbolTable) -> Result<Vec<NBestList>> {
        let mut lists: Vec<NBestList> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split("|||").map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::parse(lineno, "expected `id ||| tokens ||| logprob`"));
            }
            let mut tokens = Vec::new();
            for tok in fields[1].split_whitespace() {
                tokens.push(symtab.resolve(tok).ok_or_else(|| Error::UnknownSymbol {
                    line: lineno,
                    symbol: tok.to_string(),
                })?);
            }
            let lattice_logprob: f64 = fields[2].parse().map_err(|_| {
                Error::parse(lineno, format!("bad log-probability {:?}", fields[2]))
            })?;
            let k = *index.entry(fields[0].to_string()).or_insert_with(|| {
                lists.push(NBestList {
                    id: fields[0].to_string(),
                    entries: Vec::new(),
                });
                lists.len() - 1
            });
            lists[k].entries.push(NBestEntry {
                tokens,
                lattice_logprob,
            });
        }
        Ok(lists)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rescored {
    pub tokens: Vec<Label>,
    pub score: f64,
    pub lattice_logprob: f64,
    /// Scorer log-probability of the tokens and end of sentence.
    pub scorer_logprob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescoreResult {
    /// Best first.
    pub ranked: Vec<Rescored>,
    pub scorer_predict_calls: usize,
    /// Input positions of hypotheses the lattice rejected.
    pub rejected: Vec<usize>,
}

/// Lattice log-probabilities of the entries, either as stored or
/// recomputed by walking `lattice`.
fn lattice_terms(nb: &NBestList, lattice: Option<&PosteriorLattice>) -> Vec<Option<f64>> {
    nb.entries
        .iter()
        .map(|e| match lattice {
            None => Some(e.lattice_logprob),
            Some(p) => p.string_logprob(&e.tokens),
        })
        .collect()
}

fn rank(
    nb: &NBestList,
    lat: Vec<Option<f64>>,
    scorer_lp: Vec<f64>,
    cfg: &DecoderConfig,
    calls: usize,
) -> RescoreResult {
    let mut ranked = Vec::new();
    let mut rejected = Vec::new();
    for (i, (e, l)) in nb.entries.iter().zip(lat).enumerate() {
        match l {
            None => rejected.push(i),
            Some(l) => ranked.push(Rescored {
                tokens: e.tokens.clone(),
                score: weighted(cfg.lambda_lat, l) + weighted(cfg.lambda_scorer, scorer_lp[i]),
                lattice_logprob: l,
                scorer_logprob: scorer_lp[i],
            }),
        }
    }
    ranked.sort_by(|a, b| hyp_order((a.score, &a.tokens, true), (b.score, &b.tokens, true)));
    RescoreResult {
        ranked,
        scorer_predict_calls: calls,
        rejected,
    }
}

/// Scores each hypothesis from scratch: `len + 1` scorer calls apiece.
/// With `lattice` given, lattice terms are recomputed from it and
/// hypotheses it rejects are reported instead of ranked.
pub fn rescore_nbest_naive(
    nb: &NBestList,
    scorer: &dyn Scorer,
    cfg: &DecoderConfig,
    lattice: Option<&PosteriorLattice>,
) -> Result<RescoreResult> {
    cfg.validate()?;
    let mut calls = 0;
    let scorer_lp = nb
        .entries
        .iter()
        .map(|e| {
            let mut st = scorer.init(&[]);
            let mut lp = 0.0;
            for &t in &e.tokens {
                lp += scorer.predict(&st).token_logprob(t);
                st = scorer.consume(&st, t);
            }
            calls += e.tokens.len() + 1;
            lp + scorer.predict(&st).eos_logprob
        })
        .collect();
    Ok(rank(nb, lattice_terms(nb, lattice), scorer_lp, cfg, calls))
}

#[derive(Default)]
struct TrieNode {
    children: BTreeMap<Label, usize>,
    ends: Vec<usize>,
}

/// Same scores and ranking as [`rescore_nbest_naive`], with one scorer call
/// per distinct prefix (the empty prefix included).
pub fn rescore_nbest_dfs(
    nb: &NBestList,
    scorer: &dyn Scorer,
    cfg: &DecoderConfig,
    lattice: Option<&PosteriorLattice>,
) -> Result<RescoreResult> {
    cfg.validate()?;
    let mut trie = vec![TrieNode::default()];
    for (i, e) in nb.entries.iter().enumerate() {
        let mut node = 0;
        for &t in &e.tokens {
            node = match trie[node].children.get(&t) {
                Some(&c) => c,
                None => {
                    trie.push(TrieNode::default());
                    let c = trie.len() - 1;
                    trie[node].children.insert(t, c);
                    c
                }
            };
        }
        trie[node].ends.push(i);
    }

    let mut scorer_lp = vec![0.0; nb.entries.len()];
    let mut calls = 0;
    if !nb.entries.is_empty() {
        let mut stack: Vec<(usize, ScorerState, f64)> = vec![(0, scorer.init(&[]), 0.0)];
        while let Some((node, st, acc)) = stack.pop() {
            let pred = scorer.predict(&st);
            calls += 1;
            for &i in &trie[node].ends {
                scorer_lp[i] = acc + pred.eos_logprob;
            }
            for (&t, &c) in trie[node].children.iter().rev() {
                stack.push((c, scorer.consume(&st, t), acc + pred.token_logprob(t)));
            }
        }
    }
    Ok(rank(nb, lattice_terms(nb, lattice), scorer_lp, cfg, calls))
}

/// Beam search over the scorer's vocabulary and the unknown word, with no
/// lattice. Only `lambda_scorer` is used.
pub fn decode_unconstrained(scorer: &dyn Scorer, cfg: &DecoderConfig) -> Result<DecodeResult> {
    if cfg.beam == 0 {
        return Err(Error::Config("beam must be at least 1".into()));
    }
    if !(cfg.lambda_scorer.is_finite() && cfg.lambda_scorer > 0.0) {
        return Err(Error::Config(
            "unconstrained decoding needs lambda-scorer > 0".into(),
        ));
    }
    let tokens: Vec<Label> = scorer
        .vocab()
        .iter()
        .copied()
        .chain(std::iter::once(UNK_LABEL))
        .collect();
    let max_steps = cfg.max_steps.unwrap_or(UNCONSTRAINED_MAX_STEPS);
    beam_search(scorer, 0, cfg.beam, max_steps, |_, pred| {
        let steps = tokens
            .iter()
            .map(|&t| (t, cfg.lambda_scorer * pred.token_logprob(t), 0))
            .collect();
        Ok(Expansion {
            steps,
            end: Some(cfg.lambda_scorer * pred.eos_logprob),
        })
    })
}

/// Compares rescoring outputs: same order of strings and scores within
/// `tol`.
pub fn same_ranking(a: &RescoreResult, b: &RescoreResult, tol: f64) -> bool {
    a.ranked.len() == b.ranked.len()
        && a.ranked.iter().zip(&b.ranked).all(|(x, y)| {
            x.tokens == y.tokens && (x.score == y.score || (x.score - y.score).abs() <= tol)
        })
        && a.rejected == b.rejected
}
