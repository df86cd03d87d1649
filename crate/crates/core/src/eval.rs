//! Corpus BLEU and grid search over the lattice weight.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use rayon::prelude::*;

use crate::decoder::{decode, DecodeResult, DecoderConfig};
use crate::error::{Error, Result};
use crate::posterior::PosteriorLattice;
use crate::scorer::Scorer;
use crate::wfsa::Label;

pub const MAX_ORDER: usize = 4;

/// Corpus-level BLEU with clipped n-gram counts up to order 4, one
/// reference per sentence and no smoothing: any zero precision gives 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BleuReport {
    /// In `[0, 1]`.
    pub score: f64,
    pub precisions: [f64; MAX_ORDER],
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl fmt::Display for BleuReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ratio = if self.ref_len == 0 {
            0.0
        } else {
            self.hyp_len as f64 / self.ref_len as f64
        };
        write!(
            f,
            "BLEU = {:.2}, {:.1}/{:.1}/{:.1}/{:.1} (BP={:.3}, ratio={:.3}, hyp_len={}, ref_len={})",
            100.0 * self.score,
            100.0 * self.precisions[0],
            100.0 * self.precisions[1],
            100.0 * self.precisions[2],
            100.0 * self.precisions[3],
            self.brevity_penalty,
            ratio,
            self.hyp_len,
            self.ref_len
        )
    }
}

fn ngram_counts<T: Eq + Hash>(s: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut m = HashMap::new();
    if s.len() >= n {
        for g in s.windows(n) {
            *m.entry(g).or_default() += 1;
        }
    }
    m
}

pub fn corpus_bleu<T: Eq + Hash>(hyps: &[Vec<T>], refs: &[Vec<T>]) -> Result<BleuReport> {
    if hyps.len() != refs.len() {
        return Err(Error::LengthMismatch {
            hyps: hyps.len(),
            refs: refs.len(),
        });
    }
    if hyps.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let (mut c, mut r) = (0, 0);
    for (h, rf) in hyps.iter().zip(refs) {
        c += h.len();
        r += rf.len();
        for n in 1..=MAX_ORDER {
            let hc = ngram_counts(h, n);
            let rc = ngram_counts(rf, n);
            totals[n - 1] += h.len().saturating_sub(n - 1);
            matches[n - 1] += hc
                .iter()
                .map(|(g, &k)| k.min(rc.get(g).copied().unwrap_or(0)))
                .sum::<usize>();
        }
    }
    let mut precisions = [0.0; MAX_ORDER];
    for n in 0..MAX_ORDER {
        if totals[n] > 0 {
            precisions[n] = matches[n] as f64 / totals[n] as f64;
        }
    }
    let brevity_penalty = if c >= r {
        1.0
    } else if c == 0 {
        0.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    let score = if precisions.contains(&0.0) {
        0.0
    } else {
        let mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
        brevity_penalty * mean.exp()
    };
    Ok(BleuReport {
        score,
        precisions,
        matches,
        totals,
        brevity_penalty,
        hyp_len: c,
        ref_len: r,
    })
}

/// Decodes every lattice concurrently; results come back in input order.
pub fn decode_corpus(
    lattices: &[(String, PosteriorLattice)],
    scorer: &dyn Scorer,
    cfg: &DecoderConfig,
) -> Vec<Result<DecodeResult>> {
    lattices
        .par_iter()
        .map(|(id, p)| decode(p, scorer, cfg).map_err(|e| e.in_sentence(id.clone())))
        .collect()
}

/// Inclusive range of lattice weights, `min, min + step, ..., <= max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn single(value: f64) -> GridSpec {
        GridSpec {
            min: value,
            max: value,
            step: 1.0,
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        let ok = self.min.is_finite()
            && self.max.is_finite()
            && self.min >= 0.0
            && self.max >= self.min
            && self.step > 0.0;
        if !ok {
            return Err(Error::Config(format!("bad grid {self:?}")));
        }
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.min + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub lambda_lat: f64,
    pub lambda_scorer: f64,
    pub bleu: BleuReport,
    /// BLEU at every grid point, in grid order.
    pub grid: Vec<(f64, BleuReport)>,
}

/// Picks the lattice weight maximizing dev-set BLEU with the scorer weight
/// fixed at 1. Ties go to the smaller lattice weight.
pub fn tune_grid(
    dev: &[(String, PosteriorLattice)],
    refs: &[Vec<Label>],
    scorer: &dyn Scorer,
    base: &DecoderConfig,
    grid: &GridSpec,
) -> Result<TuneResult> {
    if dev.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if dev.len() != refs.len() {
        return Err(Error::LengthMismatch {
            hyps: dev.len(),
            refs: refs.len(),
        });
    }
    let mut scores = Vec::new();
    for lambda_lat in grid.points()? {
        let cfg = DecoderConfig {
            lambda_lat,
            lambda_scorer: 1.0,
            ..*base
        };
        let hyps = decode_corpus(dev, scorer, &cfg)
            .into_iter()
            .map(|r| r.map(|d| d.best.prefix))
            .collect::<Result<Vec<_>>>()?;
        scores.push((lambda_lat, corpus_bleu(&hyps, refs)?));
    }
    let mut best = 0;
    for (i, (_, b)) in scores.iter().enumerate() {
        if b.score > scores[best].1.score {
            best = i;
        }
    }
    Ok(TuneResult {
        lambda_lat: scores[best].0,
        lambda_scorer: 1.0,
        bleu: scores[best].1.clone(),
        grid: scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn identical_corpus_scores_one() {
        let x = vec![toks("a b c d e"), toks("f g h i")];
        let b = corpus_bleu(&x, &x).unwrap();
        assert_eq!(b.score, 1.0);
        assert_eq!(b.brevity_penalty, 1.0);
    }

    #[test]
    fn no_shared_unigram_scores_zero() {
        let b = corpus_bleu(&[toks("x y z w")], &[toks("a b c d")]).unwrap();
        assert_eq!(b.score, 0.0);
        assert_eq!(b.precisions[0], 0.0);
    }

    #[test]
    fn short_hypothesis_by_hand() {
        let b = corpus_bleu(&[toks("the cat sat")], &[toks("the cat sat down")]).unwrap();
        assert_eq!(b.precisions[..3], [1.0, 1.0, 1.0]);
        assert_eq!(b.totals[3], 0);
        assert_eq!(b.precisions[3], 0.0);
        assert_eq!(b.brevity_penalty, (1.0f64 - 4.0 / 3.0).exp());
        assert_eq!(b.score, 0.0);
    }

    #[test]
    fn clipping_and_brevity() {
        // Hyp "the the the the" vs ref "the cat is on the mat": unigram
        // matches clipped to 2 of 4; no bigram matches.
        let b = corpus_bleu(&[toks("the the the the")], &[toks("the cat is on the mat")]).unwrap();
        assert_eq!(b.matches[0], 2);
        assert_eq!(b.precisions[0], 0.5);
        assert_eq!(b.score, 0.0);
        // Two sentences whose pooled counts are all nonzero.
        let h = vec![toks("a b c d e"), toks("a b c d")];
        let r = vec![toks("a b c d e"), toks("a b c d f")];
        let b = corpus_bleu(&h, &r).unwrap();
        let p = [9.0 / 9.0, 7.0 / 7.0, 5.0 / 5.0, 3.0 / 3.0];
        assert_eq!(b.precisions, p);
        assert!((b.score - (1.0f64 - 10.0 / 9.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let e: Vec<Vec<String>> = vec![];
        assert!(matches!(corpus_bleu(&e, &e), Err(Error::EmptyCorpus)));
        assert!(matches!(
            corpus_bleu(&[toks("a")], &e),
            Err(Error::LengthMismatch { hyps: 1, refs: 0 })
        ));
    }

    #[test]
    fn grid_points() {
        let g = GridSpec {
            min: 0.0,
            max: 1.0,
            step: 0.25,
        };
        assert_eq!(g.points().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(GridSpec::single(0.3).points().unwrap(), vec![0.3]);
        assert!(GridSpec {
            min: 1.0,
            max: 0.0,
            step: 0.1
        }
        .points()
        .is_err());
    }
}
