//! Tropical and log semiring weights.
//!
//! A [`Weight`] is a cost, i.e. a negative log probability. Larger values are
//! less probable and positive infinity is the semiring zero. Both semirings
//! share `times` (real addition); they differ only in `plus`:
//!
//! * tropical: `min(a, b)`
//! * log: `-ln(exp(-a) + exp(-b))`

use std::cmp::Ordering;
use std::fmt;

/// The two weight algebras used for path arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Semiring {
    #[default]
    Tropical,
    Log,
}

impl Semiring {
    pub fn plus(self, a: Weight, b: Weight) -> Weight {
        match self {
            Semiring::Tropical => trop_add(a, b),
            Semiring::Log => log_add(a, b),
        }
    }

    /// Folds `plus` over an iterator, starting from the semiring zero.
    pub fn sum<I: IntoIterator<Item = Weight>>(self, weights: I) -> Weight {
        weights
            .into_iter()
            .fold(Weight::ZERO, |acc, w| self.plus(acc, w))
    }

    pub fn name(self) -> &'static str {
        match self {
            Semiring::Tropical => "tropical",
            Semiring::Log => "log",
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A cost-valued semiring element. Never NaN.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Weight(f64);

impl Weight {
    /// Semiring zero: the impossible event.
    pub const ZERO: Weight = Weight(f64::INFINITY);
    /// Semiring one: cost 0, probability 1.
    pub const ONE: Weight = Weight(0.0);

    /// Wraps a cost. Returns `None` for NaN and for negative infinity, which
    /// has no meaning as a cost.
    pub fn new(value: f64) -> Option<Weight> {
        if value.is_nan() || value == f64::NEG_INFINITY {
            None
        } else {
            Some(Weight(value))
        }
    }

    /// Wraps a cost that the caller knows is valid.
    ///
    /// Panics in debug builds on NaN.
    pub fn from_cost(value: f64) -> Weight {
        debug_assert!(!value.is_nan(), "NaN weight");
        Weight(value)
    }

    /// The cost of an event with natural-log probability `logprob`.
    pub fn from_logprob(logprob: f64) -> Weight {
        Weight::from_cost(-logprob)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Natural-log probability, `-value`. The zero weight maps to `-inf`.
    pub fn logprob(self) -> f64 {
        -self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Semiring product, shared by both semirings.
    pub fn times(self, other: Weight) -> Weight {
        times(self, other)
    }

    /// Left division: the weight `w` such that `other.times(w) == self`.
    /// Dividing by zero yields zero.
    pub fn divide(self, other: Weight) -> Weight {
        if self.is_zero() || other.is_zero() {
            Weight::ZERO
        } else {
            Weight(self.0 - other.0)
        }
    }

    /// Total order on costs, INF last.
    pub fn total_cmp(&self, other: &Weight) -> Ordering {
        self.0.total_cmp(&other.0)
    }

    pub fn approx_eq(self, other: Weight, tol: f64) -> bool {
        if self.is_zero() || other.is_zero() {
            self.is_zero() == other.is_zero()
        } else {
            (self.0 - other.0).abs() <= tol
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Log-semiring plus, `-ln(exp(-a) + exp(-b))`, evaluated as
/// `min(a, b) - ln(1 + exp(-|a - b|))`.
pub fn log_add(a: Weight, b: Weight) -> Weight {
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    let (lo, hi) = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
    Weight(lo - (-(hi - lo)).exp().ln_1p())
}

/// Tropical plus, `min(a, b)`.
pub fn trop_add(a: Weight, b: Weight) -> Weight {
    if a.0 <= b.0 {
        a
    } else {
        b
    }
}

/// Semiring times: cost addition with INF absorbing.
pub fn times(a: Weight, b: Weight) -> Weight {
    if a.is_zero() || b.is_zero() {
        Weight::ZERO
    } else {
        Weight(a.0 + b.0)
    }
}

/// `ln(sum(exp(x)))` over natural-log probabilities; `-inf` for an empty
/// iterator or when every term is `-inf`.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(logprobs: I) -> f64 {
    Semiring::Log
        .sum(logprobs.into_iter().map(Weight::from_logprob))
        .logprob()
}
