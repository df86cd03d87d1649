//! Scorer backed by an explicit table of next-token distributions.
//!
//! File format, one row per line:
//!
//! ```text
//! # comment
//! | a:-0.1 b:-2.5 <unk>:-4.0 </s>:-3.9       empty prefix
//! a | b:ln0.9 c:ln0.05 <unk>:ln0.04 </s>:ln0.01
//! ```
//!
//! Values are natural-log probabilities; `lnX` is shorthand for `ln(X)`.
//! Each row must sum to one within 1e-6. The vocabulary is every token that
//! appears on the right-hand side of some row. Prefixes without a row get
//! the uniform distribution.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use super::{Prediction, Scorer, ScorerState, Sym, EOS_SYMBOL};
use crate::error::{Error, Result};
use crate::wfsa::{Label, SymbolTable, UNK_SYMBOL};

const ROW_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct TableScorer {
    vocab: BTreeSet<Label>,
    rows: HashMap<Vec<Sym>, Prediction>,
    uniform: Prediction,
}

impl TableScorer {
    /// Builds a table from explicit rows. The vocabulary is `extra_vocab`
    /// plus every token with an entry in some row; row entries missing for
    /// a vocabulary token get probability zero.
    pub fn new<V, R>(extra_vocab: V, rows: R) -> Result<TableScorer>
    where
        V: IntoIterator<Item = Label>,
        R: IntoIterator<Item = (Vec<Sym>, Prediction)>,
    {
        let rows: Vec<(Vec<Sym>, Prediction)> = rows.into_iter().collect();
        let mut vocab: BTreeSet<Label> = extra_vocab.into_iter().collect();
        for (_, p) in &rows {
            vocab.extend(p.in_vocab.keys().copied());
        }
        let mut table = HashMap::with_capacity(rows.len());
        for (prefix, mut pred) in rows {
            let mass = pred.log_mass();
            if mass.is_nan() || mass.abs() > ROW_TOL {
                return Err(Error::UnnormalizedRow {
                    prefix: format!("{prefix:?}"),
                    logmass: mass,
                });
            }
            for &t in &vocab {
                pred.in_vocab.entry(t).or_insert(f64::NEG_INFINITY);
            }
            let prefix = prefix
                .into_iter()
                .map(|s| match s {
                    Sym::Word(t) if !vocab.contains(&t) => Sym::Unk,
                    s => s,
                })
                .collect();
            table.insert(prefix, pred);
        }
        let uniform = Prediction::uniform(&vocab);
        Ok(TableScorer {
            vocab,
            rows: table,
            uniform,
        })
    }

    /// Parses the row format, interning unseen tokens into `symtab`.
    pub fn parse(text: &str, symtab: &mut SymbolTable) -> Result<TableScorer> {
        let mut rows = Vec::new();
        let mut prefixes = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lhs, rhs) = line
                .split_once('|')
                .ok_or_else(|| Error::parse(lineno, "expected `prefix | token:logprob ...`"))?;
            let prefix: Vec<Sym> = lhs
                .split_whitespace()
                .map(|t| match t {
                    UNK_SYMBOL => Sym::Unk,
                    t => Sym::Word(symtab.intern(t)),
                })
                .collect();
            let mut pred = Prediction {
                in_vocab: BTreeMap::new(),
                unk_logprob: f64::NEG_INFINITY,
                eos_logprob: f64::NEG_INFINITY,
            };
            for field in rhs.split_whitespace() {
                let (tok, val) = field.rsplit_once(':').ok_or_else(|| {
                    Error::parse(lineno, format!("expected token:logprob, got {field:?}"))
                })?;
                let lp = parse_logprob(val)
                    .ok_or_else(|| Error::parse(lineno, format!("bad log-probability {val:?}")))?;
                match tok {
                    UNK_SYMBOL => pred.unk_logprob = lp,
                    EOS_SYMBOL => pred.eos_logprob = lp,
                    t => {
                        pred.in_vocab.insert(symtab.intern(t), lp);
                    }
                }
            }
            let mass = pred.log_mass();
            if mass.is_nan() || mass.abs() > ROW_TOL {
                return Err(Error::UnnormalizedRow {
                    prefix: lhs.trim().to_string(),
                    logmass: mass,
                });
            }
            prefixes.push(lhs.trim().to_string());
            rows.push((prefix, pred));
        }
        TableScorer::new(std::iter::empty(), rows)
    }

    pub fn to_text(&self, symtab: &SymbolTable) -> String {
        let name = |t: Label| symtab.render(&[t]);
        let mut lines: Vec<String> = self
            .rows
            .iter()
            .map(|(prefix, pred)| {
                let lhs: Vec<String> = prefix
                    .iter()
                    .map(|s| match s {
                        Sym::Word(t) => name(*t),
                        _ => UNK_SYMBOL.to_string(),
                    })
                    .collect();
                let mut line = lhs.join(" ");
                if !line.is_empty() {
                    line.push(' ');
                }
                line.push('|');
                for (&t, &lp) in &pred.in_vocab {
                    if lp > f64::NEG_INFINITY {
                        let _ = write!(line, " {}:{}", name(t), lp);
                    }
                }
                for (tok, lp) in [
                    (UNK_SYMBOL, pred.unk_logprob),
                    (EOS_SYMBOL, pred.eos_logprob),
                ] {
                    if lp > f64::NEG_INFINITY {
                        let _ = write!(line, " {tok}:{lp}");
                    }
                }
                line
            })
            .collect();
        lines.sort();
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    pub fn row(&self, prefix: &[Sym]) -> Option<&Prediction> {
        self.rows.get(prefix)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

fn parse_logprob(s: &str) -> Option<f64> {
    let v = match s.strip_prefix("ln") {
        Some(p) => p.parse::<f64>().ok().filter(|p| *p >= 0.0)?.ln(),
        None => s.parse::<f64>().ok()?,
    };
    (!v.is_nan() && v <= 0.0).then_some(v)
}

impl Scorer for TableScorer {
    fn init(&self, _source: &[Label]) -> ScorerState {
        ScorerState::default()
    }

    fn predict(&self, state: &ScorerState) -> Prediction {
        self.rows
            .get(&state.history)
            .unwrap_or(&self.uniform)
            .clone()
    }

    fn consume(&self, state: &ScorerState, token: Label) -> ScorerState {
        let mut next = state.clone();
        next.history.push(self.sym(token));
        next
    }

    fn vocab(&self) -> &BTreeSet<Label> {
        &self.vocab
    }
}
