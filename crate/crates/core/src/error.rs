use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: unknown symbol {symbol:?}")]
    UnknownSymbol { line: usize, symbol: String },

    #[error("automaton has no final state")]
    NoFinalState,

    #[error("automaton is empty (accepts no string)")]
    EmptyLattice,

    #[error("automaton contains a cycle")]
    Cyclic,

    #[error("automaton contains an epsilon cycle")]
    EpsilonCycle,

    #[error("automaton contains epsilon arcs")]
    HasEpsilons,

    #[error("automaton is not deterministic: state {state} has two arcs labelled {label}")]
    NotDeterministic { state: usize, label: u32 },

    #[error("state {0} is not coaccessible")]
    NotCoaccessible(usize),

    #[error("automaton is not stochastic within {tol}")]
    NotStochastic { tol: f64 },

    #[error("invalid state id {0}")]
    InvalidState(usize),

    #[error("path enumeration exceeded the cap of {0} paths")]
    PathCapExceeded(usize),

    #[error("scorer table row for prefix {prefix:?} is not normalized (log mass {logmass})")]
    UnnormalizedRow { prefix: String, logmass: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no finished hypothesis within {0} steps")]
    NoFinishedHypothesis(usize),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("hypothesis and reference counts differ: {hyps} vs {refs}")]
    LengthMismatch { hyps: usize, refs: usize },

    #[error("sentence {id}: {source}")]
    Sentence {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn in_sentence(self, id: impl Into<String>) -> Error {
        Error::Sentence {
            id: id.into(),
            source: Box::new(self),
        }
    }
}
