use latdec::demo::demo_set;
use latdec::scorer::{NgramConfig, NgramModel, Scorer, Smoothing};
use proptest::prelude::*;

fn corpus() -> (latdec::SymbolTable, Vec<Vec<u32>>) {
    let d = demo_set(3, 0, 300);
    (d.symbols, d.train)
}

#[test]
fn bigram_fits_training_text_better_than_unigram() {
    let (_, train) = corpus();
    for sm in [Smoothing::AddK(0.1), Smoothing::StupidBackoff(0.4)] {
        let ppl: Vec<f64> = (1..=2)
            .map(|n| {
                let cfg = NgramConfig {
                    order: n,
                    smoothing: sm,
                    min_count: 1,
                };
                NgramModel::train(&train, cfg).unwrap().perplexity(&train)
            })
            .collect();
        assert!(ppl[1] <= ppl[0], "{sm:?} {ppl:?}");
    }
}

#[test]
fn model_files_are_reproducible() {
    let (t, train) = corpus();
    let cfg = NgramConfig::default();
    let a = NgramModel::train(&train, cfg).unwrap().to_text(&t);
    let b = NgramModel::train(&train, cfg).unwrap().to_text(&t);
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn predictions_are_distributions(
        sentences in prop::collection::vec(prop::collection::vec(1u32..8, 0..8), 1..12),
        history in prop::collection::vec(1u32..10, 0..6),
        order in 1usize..5,
        k in 0.01f64..2.0,
        backoff in any::<bool>(),
    ) {
        let smoothing = if backoff { Smoothing::StupidBackoff(0.4) } else { Smoothing::AddK(k) };
        let m = NgramModel::train(&sentences, NgramConfig { order, smoothing, min_count: 1 }).unwrap();
        let mut st = m.init(&[]);
        for &h in &history {
            let p = m.predict(&st);
            prop_assert!(p.log_mass().abs() < 1e-9);
            prop_assert!(p.in_vocab.values().all(|v| v.is_finite()));
            st = m.consume(&st, h);
        }
        prop_assert_eq!(st.history.len(), order - 1);
    }
}
