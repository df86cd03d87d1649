//! Lattice-constrained decoding with a left-to-right predictive scorer.
//!
//! Raw translation lattices (acyclic weighted acceptors whose path weights
//! are costs) are turned into stochastic posterior lattices by epsilon
//! removal, determinization, minimization and log-semiring weight pushing.
//! The [`decoder`] then runs a beam search over the lattice that combines
//! the lattice's conditional next-token probabilities with those of an
//! external [`scorer::Scorer`].

pub mod baselines;
pub mod decoder;
pub mod demo;
pub mod error;
pub mod eval;
pub mod ops;
pub mod posterior;
pub mod scorer;
pub mod semiring;
pub mod wfsa;

pub use error::{Error, Result};
pub use posterior::{prepare, PosteriorLattice};
pub use semiring::{Semiring, Weight};
pub use wfsa::{parse_wfsa, serialize_wfsa, Arc, Label, StateId, SymbolTable, Wfsa};
