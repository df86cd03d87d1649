//! Left-to-right predictive scorers.
//!
//! A scorer assigns, for a target prefix, a probability to every token of
//! its vocabulary, to the unknown-word event and to end-of-sentence. Tokens
//! outside the vocabulary are scored with the unknown-word mass and are
//! consumed as the unknown-word placeholder.

mod ngram;
mod table;

use std::collections::{BTreeMap, BTreeSet};

use crate::semiring::log_sum_exp;
use crate::wfsa::{Label, UNK_LABEL};

pub use ngram::{NgramConfig, NgramModel, Smoothing};
pub use table::TableScorer;

pub const BOS_SYMBOL: &str = "<s>";
pub const EOS_SYMBOL: &str = "</s>";

/// Context symbol as seen by a scorer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    Bos,
    Eos,
    Unk,
    Word(Label),
}

/// Snapshot of a scorer's conditioning context. Cloning and advancing a
/// copy never affects the original.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScorerState {
    pub history: Vec<Sym>,
}

/// Next-token distribution in natural-log probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// One entry per vocabulary token.
    pub in_vocab: BTreeMap<Label, f64>,
    pub unk_logprob: f64,
    pub eos_logprob: f64,
}

impl Prediction {
    pub fn uniform(vocab: &BTreeSet<Label>) -> Prediction {
        let lp = -((vocab.len() + 2) as f64).ln();
        Prediction {
            in_vocab: vocab.iter().map(|&t| (t, lp)).collect(),
            unk_logprob: lp,
            eos_logprob: lp,
        }
    }

    pub fn is_in_vocab(&self, token: Label) -> bool {
        self.in_vocab.contains_key(&token)
    }

    /// The vocabulary entry for `token`, or the unknown-word mass when the
    /// token is outside the vocabulary.
    pub fn token_logprob(&self, token: Label) -> f64 {
        self.in_vocab
            .get(&token)
            .copied()
            .unwrap_or(self.unk_logprob)
    }

    /// Log of the total probability mass; zero for a proper distribution.
    pub fn log_mass(&self) -> f64 {
        log_sum_exp(
            self.in_vocab
                .values()
                .copied()
                .chain([self.unk_logprob, self.eos_logprob]),
        )
    }

    /// Rescales to a proper distribution.
    pub fn normalized(mut self) -> Prediction {
        let z = self.log_mass();
        if z.is_finite() {
            for v in self.in_vocab.values_mut() {
                *v -= z;
            }
            self.unk_logprob -= z;
            self.eos_logprob -= z;
        }
        self
    }
}

/// A left-to-right predictive model over target tokens.
pub trait Scorer: Send + Sync {
    /// State conditioned on the empty prefix. `source` is the source-side
    /// context; none of the bundled scorers use it.
    fn init(&self, source: &[Label]) -> ScorerState;

    fn predict(&self, state: &ScorerState) -> Prediction;

    /// Extends the context by `token`. Tokens outside the vocabulary,
    /// including [`UNK_LABEL`], advance the context with the unknown-word
    /// placeholder.
    fn consume(&self, state: &ScorerState, token: Label) -> ScorerState;

    fn vocab(&self) -> &BTreeSet<Label>;

    fn in_vocab(&self, token: Label) -> bool {
        self.vocab().contains(&token)
    }

    fn sym(&self, token: Label) -> Sym {
        if token != UNK_LABEL && self.in_vocab(token) {
            Sym::Word(token)
        } else {
            Sym::Unk
        }
    }
}

/// Uniform distribution over the vocabulary, unknown word and end of
/// sentence.
#[derive(Debug, Clone)]
pub struct UniformScorer {
    vocab: BTreeSet<Label>,
}

impl UniformScorer {
    pub fn new<I: IntoIterator<Item = Label>>(vocab: I) -> UniformScorer {
        UniformScorer {
            vocab: vocab.into_iter().filter(|&l| l != UNK_LABEL).collect(),
        }
    }
}

impl Scorer for UniformScorer {
    fn init(&self, _source: &[Label]) -> ScorerState {
        ScorerState::default()
    }

    fn predict(&self, _state: &ScorerState) -> Prediction {
        Prediction::uniform(&self.vocab)
    }

    fn consume(&self, state: &ScorerState, _token: Label) -> ScorerState {
        state.clone()
    }

    fn vocab(&self) -> &BTreeSet<Label> {
        &self.vocab
    }
}
