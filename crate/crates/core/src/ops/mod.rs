//! Lattice preprocessing: epsilon removal, determinization, minimization and
//! weight pushing, plus path enumeration used as a correctness oracle and
//! n-best extraction.

mod determinize;
mod epsilon;
mod minimize;
mod paths;
mod push;

pub use determinize::determinize;
pub use epsilon::rm_epsilon;
pub use minimize::minimize;
pub use paths::{
    enumerate_paths, enumerate_paths_capped, equivalent_acyclic, n_shortest_strings, Path, PathSet,
    DEFAULT_PATH_CAP,
};
pub use push::{
    check_stochastic, max_stochastic_deviation, push_log, shortest_distance_to_final,
    DEFAULT_STOCHASTIC_TOL,
};

/// Grid used to compare residual weights when hashing subsets and
/// signatures. Weights closer than this are treated as equal.
pub(crate) const WEIGHT_QUANTUM: f64 = 1e-10;

pub(crate) fn quantize(w: crate::semiring::Weight) -> i64 {
    if w.is_zero() {
        i64::MAX
    } else {
        (w.value() / WEIGHT_QUANTUM).round() as i64
    }
}
