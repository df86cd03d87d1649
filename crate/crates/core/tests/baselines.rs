mod common;

use std::collections::BTreeMap;

use latdec::baselines::{
    decode_unconstrained, rescore_nbest_dfs, rescore_nbest_naive, same_ranking, NBestList,
};
use latdec::decoder::{decode, DecoderConfig};
use latdec::demo::{
    random_lattice, random_prediction, random_small_lattice, random_table_scorer, LatticeSpec,
};
use latdec::prepare;
use latdec::scorer::{Sym, TableScorer};
use latdec::wfsa::{Label, UNK_LABEL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(lat: f64, sc: f64) -> DecoderConfig {
    DecoderConfig {
        lambda_lat: lat,
        lambda_scorer: sc,
        ..Default::default()
    }
}

fn shares_prefix(nb: &NBestList) -> bool {
    let firsts: Vec<Option<&Label>> = nb.entries.iter().map(|e| e.tokens.first()).collect();
    let mut seen = std::collections::BTreeSet::new();
    firsts.iter().any(|f| f.is_some() && !seen.insert(*f))
}

#[test]
fn dfs_matches_naive_on_random_lists() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let spec = LatticeSpec {
        max_states: 40,
        vocab: 6,
        ..Default::default()
    };
    for _ in 0..40 {
        let w = random_lattice(&mut rng, &spec);
        let p = prepare(&w).unwrap();
        let nb = NBestList::from_lattice("x", &p, 100).unwrap();
        assert!(nb.is_well_formed());
        let scorer = latdec::scorer::UniformScorer::new(1..=4);
        let c = cfg(rng.gen_range(0.0..2.0), rng.gen_range(0.1..2.0));
        let naive = rescore_nbest_naive(&nb, &scorer, &c, None).unwrap();
        let dfs = rescore_nbest_dfs(&nb, &scorer, &c, None).unwrap();
        assert!(same_ranking(&naive, &dfs, 1e-9));
        assert!(dfs.scorer_predict_calls <= naive.scorer_predict_calls);
        if shares_prefix(&nb) {
            assert!(dfs.scorer_predict_calls < naive.scorer_predict_calls);
        }
        let expected: usize = nb.entries.iter().map(|e| e.tokens.len() + 1).sum();
        assert_eq!(naive.scorer_predict_calls, expected);
    }
}

#[test]
fn rescoring_full_language_agrees_with_wide_decode() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let spec = LatticeSpec {
        max_states: 12,
        vocab: 5,
        ..Default::default()
    };
    for _ in 0..40 {
        let w = random_small_lattice(&mut rng, &spec, 150);
        let lang = common::tropical_language(&w);
        let p = prepare(&w).unwrap();
        let scorer = random_table_scorer(&mut rng, &w, 0.2);
        let c = cfg(rng.gen_range(0.0..2.0), 1.0).with_beam(lang.len());
        let n = rng.gen_range(1..=lang.len());
        let nb = NBestList::from_lattice("x", &p, n).unwrap();
        let dfs = rescore_nbest_dfs(&nb, &scorer, &c, Some(&p)).unwrap();
        // Oracle restricted to the same n strings.
        let sub: BTreeMap<Vec<Label>, f64> = nb
            .entries
            .iter()
            .map(|e| (e.tokens.clone(), lang[&e.tokens]))
            .collect();
        let best = nb
            .entries
            .iter()
            .map(|e| {
                (
                    e.tokens.clone(),
                    common::joint_score(&lang, &scorer, &c, &e.tokens),
                )
            })
            .max_by(|a, b| {
                a.1.total_cmp(&b.1)
                    .then((b.0.len(), &b.0).cmp(&(a.0.len(), &a.0)))
            })
            .unwrap();
        assert_eq!(dfs.ranked[0].tokens, best.0);
        assert!((dfs.ranked[0].score - best.1).abs() < 1e-9);
        assert_eq!(sub.len(), nb.len());
        if n == lang.len() {
            assert_eq!(decode(&p, &scorer, &c).unwrap().best.prefix, best.0);
        }
    }
}

/// All strings over `alphabet` of length at most `max_len`.
fn all_strings(alphabet: &[Label], max_len: usize) -> Vec<Vec<Label>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for &a in alphabet {
                let mut t: Vec<Label> = s.clone();
                t.push(a);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn unconstrained_wide_beam_is_exhaustive() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let vocab: std::collections::BTreeSet<Label> = [1, 2].into_iter().collect();
    let alphabet = [1, 2, UNK_LABEL];
    let max_len = 4;
    for _ in 0..20 {
        let mut rows = Vec::new();
        for s in all_strings(&alphabet, max_len) {
            let key: Vec<Sym> = s
                .iter()
                .map(|&t| {
                    if t == UNK_LABEL {
                        Sym::Unk
                    } else {
                        Sym::Word(t)
                    }
                })
                .collect();
            let mut pred = random_prediction(&mut rng, &vocab);
            if s.len() == max_len {
                for v in pred.in_vocab.values_mut() {
                    *v = f64::NEG_INFINITY;
                }
                pred.unk_logprob = f64::NEG_INFINITY;
                pred.eos_logprob = 0.0;
            }
            rows.push((key, pred));
        }
        let scorer = TableScorer::new(vocab.iter().copied(), rows).unwrap();
        let mut best: Option<(Vec<Label>, f64)> = None;
        for s in all_strings(&alphabet, max_len) {
            let mut st = latdec::scorer::Scorer::init(&scorer, &[]);
            let mut lp = 0.0;
            for &t in &s {
                lp += latdec::scorer::Scorer::predict(&scorer, &st).token_logprob(t);
                st = latdec::scorer::Scorer::consume(&scorer, &st, t);
            }
            lp += latdec::scorer::Scorer::predict(&scorer, &st).eos_logprob;
            if best.as_ref().is_none_or(|b| lp > b.1) {
                best = Some((s, lp));
            }
        }
        let c = cfg(0.0, 1.0).with_beam(3usize.pow(max_len as u32 + 1));
        let r = decode_unconstrained(&scorer, &c).unwrap();
        let (want, score) = best.unwrap();
        assert_eq!(r.best.prefix, want);
        assert!((r.best.score - score).abs() < 1e-9);
    }
}
