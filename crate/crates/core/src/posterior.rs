//! A pushed, deterministic lattice viewed as a left-to-right predictive
//! distribution over the next token.
//!
//! After determinization, minimization and log-semiring pushing, every
//! state is reached by exactly one token prefix, and the weight of an arc
//! labelled `y` leaving that state is `-ln P(y | prefix)`. The final weight
//! of a state is the probability of stopping after the prefix.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::ops::{self, DEFAULT_STOCHASTIC_TOL};
use crate::semiring::{Semiring, Weight};
use crate::wfsa::{Arc, Label, StateId, Wfsa};

/// One outgoing arc of a posterior state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Successor {
    pub token: Label,
    /// `ln P(token | prefix)`.
    pub cond_logprob: f64,
    pub next_state: StateId,
    /// `ln P(stop | prefix token)`, `-inf` when `next_state` is not final.
    pub next_final_logprob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Successors {
    /// Sorted by token.
    pub arcs: Vec<Successor>,
    /// Log-probability of stopping at the queried state.
    pub final_logprob: f64,
}

/// Result of walking a prefix through the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefixWalk {
    /// Sum of conditional log-probabilities along the prefix.
    pub logprob: f64,
    pub state: StateId,
    /// Log-probability of stopping at `state`.
    pub final_logprob: f64,
}

impl PrefixWalk {
    /// Normalized log-probability of the prefix as a complete hypothesis.
    pub fn complete_logprob(&self) -> f64 {
        self.logprob + self.final_logprob
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PrepareOptions {
    /// Semiring used for epsilon removal and determinization. Tropical keeps
    /// the best derivation per string; log sums all derivations.
    pub det_semiring: Semiring,
}

/// Wall-clock time of each preprocessing stage. Epsilon removal is counted
/// with determinization.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub determinize: Duration,
    pub minimize: Duration,
    pub push: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.determinize + self.minimize + self.push
    }
}

impl std::ops::AddAssign for StageTimings {
    fn add_assign(&mut self, rhs: StageTimings) {
        self.determinize += rhs.determinize;
        self.minimize += rhs.minimize;
        self.push += rhs.push;
    }
}

#[derive(Debug, Clone)]
pub struct PosteriorLattice {
    inner: Wfsa,
    vocab: BTreeSet<Label>,
    total: Weight,
}

/// Runs epsilon removal, determinization, minimization and log pushing on
/// a raw acyclic lattice whose path weights are costs.
pub fn prepare(raw: &Wfsa) -> Result<PosteriorLattice> {
    prepare_with(raw, PrepareOptions::default()).map(|(p, _)| p)
}

pub fn prepare_with(raw: &Wfsa, opts: PrepareOptions) -> Result<(PosteriorLattice, StageTimings)> {
    raw.topo_order()?;
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let trimmed = raw.connect().with_semiring(opts.det_semiring);
    if trimmed.is_empty_language() {
        return Err(Error::EmptyLattice);
    }
    let det = ops::determinize(&ops::rm_epsilon(&trimmed)?)?;
    timings.determinize = t.elapsed();

    let t = Instant::now();
    let min = ops::minimize(&det)?;
    timings.minimize = t.elapsed();

    let t = Instant::now();
    let (pushed, total) = ops::push_log(&min)?;
    timings.push = t.elapsed();

    log::debug!(
        "prepared lattice: {} -> {} states, total weight {}",
        raw.num_states(),
        pushed.num_states(),
        total
    );
    Ok((PosteriorLattice::build(pushed, total), timings))
}

impl PosteriorLattice {
    fn build(mut inner: Wfsa, total: Weight) -> PosteriorLattice {
        inner.sort_arcs();
        let vocab = inner
            .states()
            .flat_map(|q| inner.arcs(q).iter().map(|a| a.label))
            .collect();
        PosteriorLattice {
            inner,
            vocab,
            total,
        }
    }

    /// Wraps an automaton that was already prepared, e.g. one read back from
    /// disk. Checks determinism, acyclicity and stochasticity.
    pub fn from_pushed(w: Wfsa) -> Result<PosteriorLattice> {
        if w.has_epsilons() {
            return Err(Error::HasEpsilons);
        }
        if let Some((state, label)) = w.find_nondeterminism() {
            return Err(Error::NotDeterministic { state, label });
        }
        w.topo_order()?;
        if w.is_empty_language() {
            return Err(Error::EmptyLattice);
        }
        if !ops::check_stochastic(&w, DEFAULT_STOCHASTIC_TOL) {
            return Err(Error::NotStochastic {
                tol: DEFAULT_STOCHASTIC_TOL,
            });
        }
        Ok(PosteriorLattice::build(
            w.with_semiring(Semiring::Log),
            Weight::ONE,
        ))
    }

    pub fn inner(&self) -> &Wfsa {
        &self.inner
    }

    pub fn into_inner(self) -> Wfsa {
        self.inner
    }

    /// Total mass of the raw lattice removed by pushing.
    pub fn total(&self) -> Weight {
        self.total
    }

    /// Tokens appearing on any arc.
    pub fn vocab(&self) -> &BTreeSet<Label> {
        &self.vocab
    }

    pub fn start(&self) -> StateId {
        self.inner.start()
    }

    pub fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    pub fn longest_path_len(&self) -> usize {
        self.inner
            .longest_path_len()
            .expect("posterior lattices are acyclic")
    }

    pub fn final_logprob(&self, state: StateId) -> f64 {
        self.inner.final_weight(state).logprob()
    }

    /// Raw arcs of `state`, sorted by label.
    pub fn arcs(&self, state: StateId) -> &[Arc] {
        self.inner.arcs(state)
    }

    /// Follows the arc labelled `token`, returning the next state and the
    /// conditional log-probability.
    pub fn step(&self, state: StateId, token: Label) -> Option<(StateId, f64)> {
        let arcs = self.inner.arcs(state);
        arcs.binary_search_by_key(&token, |a| a.label)
            .ok()
            .map(|i| (arcs[i].next, arcs[i].weight.logprob()))
    }

    pub fn successors(&self, state: StateId) -> Result<Successors> {
        if state >= self.inner.num_states() {
            return Err(Error::InvalidState(state));
        }
        let arcs = self
            .inner
            .arcs(state)
            .iter()
            .map(|a| Successor {
                token: a.label,
                cond_logprob: a.weight.logprob(),
                next_state: a.next,
                next_final_logprob: self.final_logprob(a.next),
            })
            .collect();
        Ok(Successors {
            arcs,
            final_logprob: self.final_logprob(state),
        })
    }

    /// Walks the unique path for `prefix`; `None` if the lattice rejects it.
    pub fn prefix_logprob(&self, prefix: &[Label]) -> Option<PrefixWalk> {
        let mut state = self.start();
        let mut logprob = 0.0;
        for &tok in prefix {
            let (next, lp) = self.step(state, tok)?;
            logprob += lp;
            state = next;
        }
        Some(PrefixWalk {
            logprob,
            state,
            final_logprob: self.final_logprob(state),
        })
    }

    /// Normalized log-probability of a complete hypothesis, `None` if it is
    /// not in the lattice.
    pub fn string_logprob(&self, tokens: &[Label]) -> Option<f64> {
        self.prefix_logprob(tokens)
            .map(|w| w.complete_logprob())
            .filter(|lp| lp.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::log_sum_exp;
    use crate::wfsa::{parse_wfsa, SymbolTable};

    const L1: &str = "0 1 a 0.0\n1 2 b 0.7\n1 3 c 1.6\n2\n3";

    fn l1() -> PosteriorLattice {
        let mut t = SymbolTable::from_tokens(["a", "b", "c"]);
        prepare(&parse_wfsa(L1, &mut t).unwrap()).unwrap()
    }

    #[test]
    fn l1_successors() {
        let p = l1();
        let s0 = p.successors(p.start()).unwrap();
        assert_eq!(s0.arcs.len(), 1);
        assert_eq!(s0.arcs[0].token, 1);
        assert!(s0.arcs[0].cond_logprob.abs() < 1e-12);
        assert_eq!(s0.final_logprob, f64::NEG_INFINITY);

        let s1 = p.successors(s0.arcs[0].next_state).unwrap();
        let probs: Vec<(Label, f64)> = s1
            .arcs
            .iter()
            .map(|s| (s.token, s.cond_logprob.exp()))
            .collect();
        assert_eq!(probs[0].0, 2);
        assert!((probs[0].1 - 0.710_949_502_625_004).abs() < 1e-12);
        assert_eq!(probs[1].0, 3);
        assert!((probs[1].1 - 0.289_050_497_374_996).abs() < 1e-12);

        let end = p.successors(s1.arcs[0].next_state).unwrap();
        assert!(end.arcs.is_empty());
        assert_eq!(end.final_logprob, 0.0);
        assert!(matches!(p.successors(99), Err(Error::InvalidState(99))));
    }

    #[test]
    fn every_state_is_stochastic() {
        let p = l1();
        for q in p.inner().states() {
            let s = p.successors(q).unwrap();
            let lm = log_sum_exp(
                s.arcs
                    .iter()
                    .map(|a| a.cond_logprob)
                    .chain([s.final_logprob]),
            );
            assert!(lm.abs() < 1e-9);
        }
    }

    #[test]
    fn prefix_walks() {
        let p = l1();
        let w = p.prefix_logprob(&[1, 2]).unwrap();
        assert!((w.complete_logprob() - 0.710_949_502_625_004f64.ln()).abs() < 1e-12);
        assert_eq!(p.prefix_logprob(&[]).unwrap().logprob, 0.0);
        assert!(p.prefix_logprob(&[1, 9]).is_none());
        assert!(p.string_logprob(&[1]).is_none());
    }

    #[test]
    fn single_path_has_probability_one() {
        let mut t = SymbolTable::from_tokens(["a", "b", "c"]);
        let p = prepare(&parse_wfsa("0 1 a 3.0\n1 2 b 4.0\n2 1.5", &mut t).unwrap()).unwrap();
        let mut q = p.start();
        while let Some(a) = p.successors(q).unwrap().arcs.first().copied() {
            assert!(a.cond_logprob.abs() < 1e-12);
            q = a.next_state;
        }
        assert!(p.final_logprob(q).abs() < 1e-12);
        assert!((p.total().value() - 8.5).abs() < 1e-12);
    }

    #[test]
    fn duplicate_paths_use_determinization_semiring() {
        // "a" twice at cost 1.0, "b" once at cost 1.0.
        let mut t = SymbolTable::from_tokens(["a", "b"]);
        let raw = parse_wfsa("0 1 a 1\n0 2 a 1\n0 3 b 1\n1\n2\n3", &mut t).unwrap();

        let trop = prepare(&raw).unwrap();
        assert!((trop.string_logprob(&[1]).unwrap() - 0.5f64.ln()).abs() < 1e-12);

        let opts = PrepareOptions {
            det_semiring: Semiring::Log,
        };
        let (log, _) = prepare_with(&raw, opts).unwrap();
        let expected = (2.0f64 / 3.0).ln();
        assert!((log.string_logprob(&[1]).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn round_trip_through_text() {
        let p = l1();
        let t = SymbolTable::from_tokens(["a", "b", "c"]);
        let text = crate::wfsa::serialize_wfsa(p.inner(), &t);
        let mut t2 = t.clone();
        let back = PosteriorLattice::from_pushed(parse_wfsa(&text, &mut t2).unwrap()).unwrap();
        assert!(
            (back.string_logprob(&[1, 3]).unwrap() - p.string_logprob(&[1, 3]).unwrap()).abs()
                < 1e-12
        );

        let mut t3 = t.clone();
        let raw = parse_wfsa(L1, &mut t3).unwrap();
        assert!(matches!(
            PosteriorLattice::from_pushed(raw),
            Err(Error::NotStochastic { .. })
        ));
    }

    #[test]
    fn rejects_cyclic_and_empty() {
        let mut t = SymbolTable::from_tokens(["a"]);
        let cyc = parse_wfsa("0 1 a\n1 0 a\n1", &mut t).unwrap();
        assert!(matches!(prepare(&cyc), Err(Error::Cyclic)));
        let opts = crate::wfsa::ParseOptions {
            allow_empty: true,
            ..Default::default()
        };
        let empty = crate::wfsa::parse_wfsa_with("0 1 a", &mut t, opts).unwrap();
        assert!(matches!(prepare(&empty), Err(Error::EmptyLattice)));
    }
}
