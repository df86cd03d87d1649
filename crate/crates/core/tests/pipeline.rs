mod common;

use latdec::demo::{random_lattice, random_small_lattice, LatticeSpec};
use latdec::ops::{
    check_stochastic, determinize, enumerate_paths, minimize, n_shortest_strings, rm_epsilon,
};
use latdec::posterior::{prepare_with, PrepareOptions};
use latdec::{prepare, serialize_wfsa, PosteriorLattice, Semiring, SymbolTable};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec(max_states: usize) -> LatticeSpec {
    LatticeSpec {
        max_states,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prepared_lattices_are_stochastic(seed in any::<u64>()) {
        let w = random_lattice(&mut ChaCha8Rng::seed_from_u64(seed), &spec(100));
        let p = prepare(&w).unwrap();
        prop_assert!(check_stochastic(p.inner(), 1e-6));
        prop_assert!(p.inner().is_deterministic());
        prop_assert!(!p.inner().has_epsilons());
    }

    #[test]
    fn pipeline_preserves_tropical_language(seed in any::<u64>()) {
        let w = random_small_lattice(&mut ChaCha8Rng::seed_from_u64(seed), &spec(30), 5_000);
        let want = common::tropical_language(&w);
        let det = determinize(&rm_epsilon(&w).unwrap()).unwrap();
        prop_assert!(!enumerate_paths(&det).unwrap().has_duplicate_strings());
        let min = minimize(&det).unwrap();
        let got = common::tropical_language(&min);
        prop_assert_eq!(got.len(), want.len());
        for (y, c) in &want {
            prop_assert!((got[y] - c).abs() <= 1e-9, "{:?}: {} vs {}", y, got[y], c);
        }
        prop_assert!(min.num_states() <= det.num_states());
        prop_assert_eq!(minimize(&min).unwrap().num_states(), min.num_states());
    }

    #[test]
    fn posterior_matches_normalized_path_costs(seed in any::<u64>()) {
        let w = random_small_lattice(&mut ChaCha8Rng::seed_from_u64(seed), &spec(30), 10_000);
        let p = prepare(&w).unwrap();
        let want = common::normalized_logprobs(&common::tropical_language(&w));
        let mut total = 0.0;
        for (y, lp) in &want {
            let walk = p.prefix_logprob(y).unwrap();
            let got = (walk.logprob + walk.final_logprob).exp();
            prop_assert!((got - lp.exp()).abs() <= 1e-9 * lp.exp(), "{:?}", y);
            total += got;
        }
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn log_determinization_sums_derivations(seed in any::<u64>()) {
        let w = random_small_lattice(&mut ChaCha8Rng::seed_from_u64(seed), &spec(20), 2_000);
        let (p, _) = prepare_with(&w, PrepareOptions { det_semiring: Semiring::Log }).unwrap();
        prop_assert!(check_stochastic(p.inner(), 1e-6));
        let paths = enumerate_paths(&w).unwrap().aggregate(Semiring::Log);
        let costs: std::collections::BTreeMap<_, _> =
            paths.into_iter().map(|(y, c)| (y, c.value())).collect();
        for (y, lp) in common::normalized_logprobs(&costs) {
            prop_assert!((p.string_logprob(&y).unwrap() - lp).abs() < 1e-9);
        }
    }

    #[test]
    fn pushed_lattice_round_trips_through_text(seed in any::<u64>()) {
        let w = random_lattice(&mut ChaCha8Rng::seed_from_u64(seed), &spec(40));
        let p = prepare(&w).unwrap();
        let mut t = SymbolTable::new();
        for l in 1..=8u32 {
            t.intern(&format!("w{l}"));
        }
        let text = serialize_wfsa(p.inner(), &t);
        let back = latdec::parse_wfsa(&text, &mut t).unwrap();
        let q = PosteriorLattice::from_pushed(back).unwrap();
        let best = n_shortest_strings(p.inner(), 3).unwrap();
        for (y, c) in best {
            prop_assert_eq!(q.string_logprob(&y).unwrap(), -c.value());
        }
    }
}

#[test]
fn random_lattices_have_no_more_strings_than_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let w = random_small_lattice(&mut rng, &spec(25), 3_000);
        let lang = common::tropical_language(&w);
        assert!(lang.len() <= common::path_count(&w));
        assert_eq!(enumerate_paths(&w).unwrap().len(), common::path_count(&w));
    }
}
