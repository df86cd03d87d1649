//! Brute-force reference implementations used as test oracles. Nothing
//! here calls the automata algorithms under test.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use latdec::decoder::DecoderConfig;
use latdec::scorer::Scorer;
use latdec::wfsa::{Label, Wfsa, EPSILON};

/// Every string of an acyclic automaton with its cheapest path cost.
pub fn tropical_language(w: &Wfsa) -> BTreeMap<Vec<Label>, f64> {
    fn walk(
        w: &Wfsa,
        q: usize,
        cost: f64,
        toks: &mut Vec<Label>,
        out: &mut BTreeMap<Vec<Label>, f64>,
    ) {
        let f = w.final_weight(q).value();
        if f.is_finite() {
            let c = cost + f;
            let e = out.entry(toks.clone()).or_insert(f64::INFINITY);
            if c < *e {
                *e = c;
            }
        }
        for a in w.arcs(q) {
            let c = cost + a.weight.value();
            if a.label == EPSILON {
                walk(w, a.next, c, toks, out);
            } else {
                toks.push(a.label);
                walk(w, a.next, c, toks, out);
                toks.pop();
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(w, w.start(), 0.0, &mut Vec::new(), &mut out);
    out.retain(|_, c| c.is_finite());
    out
}

/// Number of successful paths, counted by brute force.
pub fn path_count(w: &Wfsa) -> usize {
    fn walk(w: &Wfsa, q: usize) -> usize {
        usize::from(!w.final_weight(q).is_zero())
            + w.arcs(q).iter().map(|a| walk(w, a.next)).sum::<usize>()
    }
    walk(w, w.start())
}

/// `ln P(y) = -cost(y) - ln sum_y' exp(-cost(y'))`.
pub fn normalized_logprobs(lang: &BTreeMap<Vec<Label>, f64>) -> BTreeMap<Vec<Label>, f64> {
    let min = lang.values().copied().fold(f64::INFINITY, f64::min);
    let z: f64 = lang.values().map(|c| (-(c - min)).exp()).sum();
    let log_z = -min + z.ln();
    lang.iter().map(|(y, c)| (y.clone(), -c - log_z)).collect()
}

fn lse(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn term(lambda: f64, lp: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        lambda * lp
    }
}

/// Joint score of `y`: lattice log-probability plus scorer log-probability
/// of the tokens and end of sentence, each scaled by its weight. With local
/// softmax the scorer terms are renormalized over the continuations the
/// language allows at each prefix.
pub fn joint_score(
    lang: &BTreeMap<Vec<Label>, f64>,
    scorer: &dyn Scorer,
    cfg: &DecoderConfig,
    y: &[Label],
) -> f64 {
    let lat = normalized_logprobs(lang)[y];
    let mut st = scorer.init(&[]);
    let mut sc = 0.0;
    for t in 0..=y.len() {
        let prefix = &y[..t];
        let pred = scorer.predict(&st);
        let lp = |tok: Option<Label>| match tok {
            Some(k) => pred.in_vocab.get(&k).copied().unwrap_or(pred.unk_logprob),
            None => pred.eos_logprob,
        };
        let own = lp(y.get(t).copied());
        let norm = if cfg.local_softmax {
            let next: BTreeSet<Label> = lang
                .keys()
                .filter(|s| s.len() > t && s.starts_with(prefix))
                .map(|s| s[t])
                .collect();
            let mut terms: Vec<f64> = next.iter().map(|&k| lp(Some(k))).collect();
            if lang.contains_key(prefix) {
                terms.push(pred.eos_logprob);
            }
            let z = lse(&terms);
            if z.is_finite() {
                z
            } else {
                0.0
            }
        } else {
            0.0
        };
        sc += own - norm;
        if t < y.len() {
            st = scorer.consume(&st, y[t]);
        }
    }
    term(cfg.lambda_lat, lat) + term(cfg.lambda_scorer, sc)
}

/// The best string under `joint_score`; ties prefer shorter, then smaller
/// token sequences.
pub fn exhaustive_argmax(
    lang: &BTreeMap<Vec<Label>, f64>,
    scorer: &dyn Scorer,
    cfg: &DecoderConfig,
) -> (Vec<Label>, f64) {
    let mut best: Option<(Vec<Label>, f64)> = None;
    for y in lang.keys() {
        let s = joint_score(lang, scorer, cfg, y);
        let better = match &best {
            None => true,
            Some((b, bs)) => s > *bs || (s == *bs && (y.len(), y) < (b.len(), b)),
        };
        if better {
            best = Some((y.clone(), s));
        }
    }
    best.expect("non-empty language")
}
