//! Lattice-constrained beam search with a joint lattice and scorer score.
//!
//! Each step extends a hypothesis by one lattice arc. The step score is
//!
//! ```text
//! lambda_lat * ln P_lat(token | prefix) + lambda_scorer * ln P_scorer(token | prefix)
//! ```
//!
//! where tokens outside the scorer vocabulary take the scorer's unknown-word
//! mass while the hypothesis keeps the lattice's surface token. Stopping at a
//! final state adds the same combination of the final probability and the
//! scorer's end-of-sentence probability.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::posterior::{PosteriorLattice, Successor, Successors};
use crate::scorer::{Prediction, Scorer, ScorerState};
use crate::semiring::log_sum_exp;
use crate::wfsa::{Label, StateId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub beam: usize,
    pub lambda_lat: f64,
    pub lambda_scorer: f64,
    /// Renormalize scorer terms over the tokens the lattice allows.
    pub local_softmax: bool,
    /// Iteration limit; `None` means three times the longest lattice path,
    /// plus one.
    pub max_steps: Option<usize>,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            beam: 12,
            lambda_lat: 1.0,
            lambda_scorer: 1.0,
            local_softmax: false,
            max_steps: None,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam == 0 {
            return Err(Error::Config("beam must be at least 1".into()));
        }
        for (name, v) in [
            ("lambda-lat", self.lambda_lat),
            ("lambda-scorer", self.lambda_scorer),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if self.lambda_lat == 0.0 && self.lambda_scorer == 0.0 {
            return Err(Error::Config(
                "lambda-lat and lambda-scorer are both 0".into(),
            ));
        }
        Ok(())
    }

    pub fn with_beam(self, beam: usize) -> DecoderConfig {
        DecoderConfig { beam, ..self }
    }

    /// Both weights multiplied by `c`.
    pub fn scaled(&self, c: f64) -> DecoderConfig {
        DecoderConfig {
            lambda_lat: self.lambda_lat * c,
            lambda_scorer: self.lambda_scorer * c,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub prefix: Vec<Label>,
    pub score: f64,
    pub lattice_state: StateId,
    pub scorer_state: ScorerState,
    pub finished: bool,
}

#[derive(Debug, Clone)]
pub struct DecodeResult {
    pub best: Hypothesis,
    /// The beam at termination, best first.
    pub beam: Vec<Hypothesis>,
    pub node_expansions: usize,
    pub scorer_predict_calls: usize,
}

/// `lambda * logprob`, with a zero weight silencing impossible events
/// instead of producing NaN.
pub(crate) fn weighted(lambda: f64, logprob: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        lambda * logprob
    }
}

/// Log of the scorer mass on the tokens leaving a lattice state, plus
/// end-of-sentence when the state is final. Each out-of-vocabulary arc
/// contributes the unknown-word mass.
pub fn local_log_normalizer(pred: &Prediction, succs: &Successors) -> f64 {
    let eos = (succs.final_logprob > f64::NEG_INFINITY).then_some(pred.eos_logprob);
    log_sum_exp(
        succs
            .arcs
            .iter()
            .map(|s| pred.token_logprob(s.token))
            .chain(eos),
    )
}

fn local(logprob: f64, norm: Option<f64>) -> f64 {
    match norm {
        Some(z) if z.is_finite() => logprob - z,
        _ => logprob,
    }
}

/// Joint score of following `succ`. `succs` is the full successor set of
/// the current state, used only for the local softmax.
pub fn joint_step_logprob(
    succ: &Successor,
    pred: &Prediction,
    cfg: &DecoderConfig,
    succs: &Successors,
) -> f64 {
    let norm = cfg.local_softmax.then(|| local_log_normalizer(pred, succs));
    step_score(succ, pred, cfg, norm)
}

fn step_score(succ: &Successor, pred: &Prediction, cfg: &DecoderConfig, norm: Option<f64>) -> f64 {
    weighted(cfg.lambda_lat, succ.cond_logprob)
        + weighted(
            cfg.lambda_scorer,
            local(pred.token_logprob(succ.token), norm),
        )
}

/// Joint score of stopping at a state with successor set `succs`.
pub fn joint_end_logprob(pred: &Prediction, cfg: &DecoderConfig, succs: &Successors) -> f64 {
    let norm = cfg.local_softmax.then(|| local_log_normalizer(pred, succs));
    end_score(succs.final_logprob, pred, cfg, norm)
}

fn end_score(final_logprob: f64, pred: &Prediction, cfg: &DecoderConfig, norm: Option<f64>) -> f64 {
    weighted(cfg.lambda_lat, final_logprob)
        + weighted(cfg.lambda_scorer, local(pred.eos_logprob, norm))
}

/// Full joint score of a complete string, walking the lattice and the
/// scorer token by token. `None` if the lattice rejects the string.
pub fn score_string(
    p: &PosteriorLattice,
    scorer: &dyn Scorer,
    cfg: &DecoderConfig,
    tokens: &[Label],
) -> Option<f64> {
    let mut state = p.start();
    let mut ss = scorer.init(&[]);
    let mut score = 0.0;
    for &tok in tokens {
        let succs = p.successors(state).ok()?;
        let succ = succs.arcs.iter().find(|s| s.token == tok)?;
        let pred = scorer.predict(&ss);
        score += joint_step_logprob(succ, &pred, cfg, &succs);
        state = succ.next_state;
        ss = scorer.consume(&ss, tok);
    }
    let succs = p.successors(state).ok()?;
    if succs.final_logprob == f64::NEG_INFINITY {
        return None;
    }
    Some(score + joint_end_logprob(&scorer.predict(&ss), cfg, &succs))
}

/// Beam order: higher score, then shorter prefix, then token order, then
/// finished before unfinished.
pub(crate) fn hyp_order(a: (f64, &[Label], bool), b: (f64, &[Label], bool)) -> Ordering {
    b.0.total_cmp(&a.0)
        .then(a.1.len().cmp(&b.1.len()))
        .then_with(|| a.1.cmp(b.1))
        .then(b.2.cmp(&a.2))
}

/// An expansion of one live hypothesis: scored continuations
/// `(token, step score, next search state)` and the score of stopping, if
/// stopping is allowed.
pub(crate) struct Expansion {
    pub steps: Vec<(Label, f64, StateId)>,
    pub end: Option<f64>,
}

struct Candidate {
    score: f64,
    prefix: Vec<Label>,
    state: StateId,
    finished: bool,
    /// Index into the previous beam and the token to consume, for new
    /// unfinished hypotheses; scorer states are advanced after pruning.
    parent: Option<usize>,
    scorer_state: Option<ScorerState>,
}

/// Output-synchronous beam search shared by the lattice decoder and the
/// unconstrained baseline.
pub(crate) fn beam_search<F>(
    scorer: &dyn Scorer,
    start: StateId,
    beam: usize,
    max_steps: usize,
    mut expand: F,
) -> Result<DecodeResult>
where
    F: FnMut(StateId, &Prediction) -> Result<Expansion>,
{
    let mut hyps = vec![Hypothesis {
        prefix: Vec::new(),
        score: 0.0,
        lattice_state: start,
        scorer_state: scorer.init(&[]),
        finished: false,
    }];
    let mut calls = 0usize;
    let mut best_finished: Option<Hypothesis> = None;

    for _ in 0..max_steps {
        let mut cands: Vec<Candidate> = Vec::new();
        for (i, h) in hyps.iter().enumerate() {
            if h.finished {
                cands.push(Candidate {
                    score: h.score,
                    prefix: h.prefix.clone(),
                    state: h.lattice_state,
                    finished: true,
                    parent: None,
                    scorer_state: Some(h.scorer_state.clone()),
                });
                continue;
            }
            let pred = scorer.predict(&h.scorer_state);
            calls += 1;
            let ex = expand(h.lattice_state, &pred)?;
            if let Some(end) = ex.end {
                cands.push(Candidate {
                    score: h.score + end,
                    prefix: h.prefix.clone(),
                    state: h.lattice_state,
                    finished: true,
                    parent: None,
                    scorer_state: Some(h.scorer_state.clone()),
                });
            }
            for (tok, s, next) in ex.steps {
                let mut prefix = Vec::with_capacity(h.prefix.len() + 1);
                prefix.extend_from_slice(&h.prefix);
                prefix.push(tok);
                cands.push(Candidate {
                    score: h.score + s,
                    prefix,
                    state: next,
                    finished: false,
                    parent: Some(i),
                    scorer_state: None,
                });
            }
        }
        if cands.is_empty() {
            break;
        }
        cands.sort_by(|a, b| {
            hyp_order(
                (a.score, &a.prefix, a.finished),
                (b.score, &b.prefix, b.finished),
            )
        });
        cands.truncate(beam);
        let next: Vec<Hypothesis> = cands
            .into_iter()
            .map(|c| {
                let scorer_state = match (c.scorer_state, c.parent) {
                    (Some(s), _) => s,
                    (None, Some(i)) => {
                        scorer.consume(&hyps[i].scorer_state, *c.prefix.last().unwrap())
                    }
                    (None, None) => unreachable!("candidate without scorer state"),
                };
                Hypothesis {
                    prefix: c.prefix,
                    score: c.score,
                    lattice_state: c.state,
                    scorer_state,
                    finished: c.finished,
                }
            })
            .collect();
        hyps = next;
        for h in hyps.iter().filter(|h| h.finished) {
            let better = best_finished.as_ref().is_none_or(|b| {
                hyp_order((h.score, &h.prefix, true), (b.score, &b.prefix, true)) == Ordering::Less
            });
            if better {
                best_finished = Some(h.clone());
            }
        }
        if hyps[0].finished {
            return Ok(DecodeResult {
                best: hyps[0].clone(),
                beam: hyps,
                node_expansions: calls,
                scorer_predict_calls: calls,
            });
        }
    }
    match best_finished {
        Some(best) => Ok(DecodeResult {
            best,
            beam: hyps,
            node_expansions: calls,
            scorer_predict_calls: calls,
        }),
        None => Err(Error::NoFinishedHypothesis(max_steps)),
    }
}

/// Beam search over the strings of `p`, scored jointly with `scorer`.
pub fn decode(
    p: &PosteriorLattice,
    scorer: &dyn Scorer,
    cfg: &DecoderConfig,
) -> Result<DecodeResult> {
    cfg.validate()?;
    if p.inner().is_empty_language() {
        return Err(Error::EmptyLattice);
    }
    let max_steps = cfg.max_steps.unwrap_or(3 * p.longest_path_len() + 1);
    beam_search(scorer, p.start(), cfg.beam, max_steps, |state, pred| {
        let succs = p.successors(state)?;
        let norm = cfg
            .local_softmax
            .then(|| local_log_normalizer(pred, &succs));
        let steps = succs
            .arcs
            .iter()
            .map(|s| (s.token, step_score(s, pred, cfg, norm), s.next_state))
            .collect();
        let end = (succs.final_logprob > f64::NEG_INFINITY)
            .then(|| end_score(succs.final_logprob, pred, cfg, norm));
        Ok(Expansion { steps, end })
    })
}
