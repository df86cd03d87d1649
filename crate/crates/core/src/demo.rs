//! Seeded synthetic data: random lattices, random table scorers and a small
//! demo corpus of sentence lattices with references and scorer training
//! text.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ops::enumerate_paths;
use crate::scorer::{Prediction, Sym, TableScorer};
use crate::semiring::{log_sum_exp, Weight};
use crate::wfsa::{Arc, Label, SymbolTable, Wfsa, EPSILON};

/// Environment variable overriding the seed of generated data.
pub const SEED_ENV: &str = "LG_SEED";
pub const DEFAULT_SEED: u64 = 20170417;

/// `LG_SEED` if set and numeric, else `default`.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a random acyclic lattice.
#[derive(Debug, Clone)]
pub struct LatticeSpec {
    pub min_states: usize,
    pub max_states: usize,
    /// Labels are drawn from `1..=vocab`.
    pub vocab: Label,
    /// Expected number of arcs per state beyond the backbone arc.
    pub extra_arcs: f64,
    /// Furthest state an arc may skip to.
    pub max_span: usize,
    pub epsilon_prob: f64,
    /// Chance that a non-last state is final.
    pub final_prob: f64,
    pub max_cost: f64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        LatticeSpec {
            min_states: 2,
            max_states: 100,
            vocab: 8,
            extra_arcs: 0.6,
            max_span: 4,
            epsilon_prob: 0.05,
            final_prob: 0.05,
            max_cost: 10.0,
        }
    }
}

/// Random acyclic lattice: a backbone `i -> i+1` plus random forward arcs,
/// costs uniform in `[0, max_cost)`. Duplicate labels, parallel paths for
/// one string and epsilon arcs all occur.
pub fn random_lattice<R: Rng>(rng: &mut R, spec: &LatticeSpec) -> Wfsa {
    let n = rng.gen_range(spec.min_states.max(2)..=spec.max_states.max(2));
    let mut w = Wfsa::with_states(n, 0, Default::default());
    let cost = |rng: &mut R| Weight::from_cost(rng.gen_range(0.0..spec.max_cost));
    for i in 0..n - 1 {
        let label = rng.gen_range(1..=spec.vocab);
        let c = cost(rng);
        w.add_arc(i, Arc::new(label, c, i + 1));
        let extra = (spec.extra_arcs * 2.0 * rng.gen::<f64>()).round() as usize;
        for _ in 0..extra {
            let j = rng.gen_range(i + 1..=(i + spec.max_span).min(n - 1));
            let label = if rng.gen_bool(spec.epsilon_prob) {
                EPSILON
            } else {
                rng.gen_range(1..=spec.vocab)
            };
            let c = cost(rng);
            w.add_arc(i, Arc::new(label, c, j));
        }
        if i > 0 && rng.gen_bool(spec.final_prob) {
            let c = cost(rng);
            w.set_final(i, c);
        }
    }
    let c = cost(rng);
    w.set_final(n - 1, c);
    w
}

/// Random lattices whose path count is at most `max_paths`.
pub fn random_small_lattice<R: Rng>(rng: &mut R, spec: &LatticeSpec, max_paths: usize) -> Wfsa {
    loop {
        let w = random_lattice(rng, spec);
        if crate::ops::enumerate_paths_capped(&w, max_paths).is_ok() {
            return w;
        }
    }
}

/// Random distribution over `vocab`, the unknown word and end of sentence.
/// Peaked so that the argmax is usually clear.
pub fn random_prediction<R: Rng>(rng: &mut R, vocab: &BTreeSet<Label>) -> Prediction {
    let mut draw = || -4.0 * rng.gen::<f64>();
    let in_vocab: BTreeMap<Label, f64> = vocab.iter().map(|&t| (t, draw())).collect();
    let unk = draw();
    let eos = draw();
    let z = log_sum_exp(in_vocab.values().copied().chain([unk, eos]));
    Prediction {
        in_vocab: in_vocab.into_iter().map(|(t, v)| (t, v - z)).collect(),
        unk_logprob: unk - z,
        eos_logprob: eos - z,
    }
}

/// Random table scorer with a row for every prefix of every path of `w`.
/// Lattice labels are kept in the vocabulary with probability
/// `1 - oov_rate`.
pub fn random_table_scorer<R: Rng>(rng: &mut R, w: &Wfsa, oov_rate: f64) -> TableScorer {
    let labels: BTreeSet<Label> = w
        .states()
        .flat_map(|q| w.arcs(q).iter().map(|a| a.label))
        .filter(|&l| l != EPSILON)
        .collect();
    let vocab: BTreeSet<Label> = labels
        .iter()
        .copied()
        .filter(|_| !rng.gen_bool(oov_rate))
        .collect();
    let mut keys: BTreeSet<Vec<Sym>> = BTreeSet::new();
    for p in enumerate_paths(w).expect("acyclic").paths {
        let syms: Vec<Sym> = p
            .tokens
            .iter()
            .map(|t| {
                if vocab.contains(t) {
                    Sym::Word(*t)
                } else {
                    Sym::Unk
                }
            })
            .collect();
        for k in 0..=syms.len() {
            keys.insert(syms[..k].to_vec());
        }
    }
    let rows: Vec<(Vec<Sym>, Prediction)> = keys
        .into_iter()
        .map(|k| (k, random_prediction(rng, &vocab)))
        .collect();
    TableScorer::new(vocab.iter().copied(), rows).expect("rows are normalized")
}

/// A confusion-network lattice with `n_states` states: each slot has a few
/// alternative words with random costs and some arcs skip a slot.
pub fn large_lattice(seed: u64, n_states: usize, vocab: Label) -> Wfsa {
    let mut rng = rng(seed);
    let n = n_states.max(2);
    let mut w = Wfsa::with_states(n, 0, Default::default());
    for i in 0..n - 1 {
        for _ in 0..rng.gen_range(2..=3) {
            let label = rng.gen_range(1..=vocab);
            w.add_arc(
                i,
                Arc::new(label, Weight::from_cost(rng.gen_range(0.0..5.0)), i + 1),
            );
        }
        if i + 2 < n && rng.gen_bool(0.1) {
            let label = rng.gen_range(1..=vocab);
            w.add_arc(
                i,
                Arc::new(label, Weight::from_cost(rng.gen_range(0.0..5.0)), i + 2),
            );
        }
    }
    w.set_final(n - 1, Weight::ONE);
    w
}

#[derive(Debug, Clone)]
pub struct DemoSentence {
    pub id: String,
    pub lattice: Wfsa,
    pub reference: Vec<Label>,
}

/// Bundled toy task: sentence lattices with references plus scorer
/// training text drawn from the same word-bigram source.
#[derive(Debug, Clone)]
pub struct DemoSet {
    pub symbols: SymbolTable,
    pub train: Vec<Vec<Label>>,
    pub sentences: Vec<DemoSentence>,
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "de", "po", "zu", "fe",
];

fn make_words<R: Rng>(rng: &mut R, count: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::new();
    while out.len() < count {
        let k = rng.gen_range(1..=3);
        let w: String = (0..k).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

struct Source {
    /// Successor lists per word index, with weights.
    next: Vec<Vec<(usize, f64)>>,
    start: Vec<(usize, f64)>,
}

impl Source {
    fn new<R: Rng>(rng: &mut R, words: usize) -> Source {
        let branch = |rng: &mut R| -> Vec<(usize, f64)> {
            let k = rng.gen_range(3..=6);
            (0..k)
                .map(|_| (rng.gen_range(0..words), rng.gen::<f64>().powi(2) + 0.05))
                .collect()
        };
        Source {
            next: (0..words).map(|_| branch(rng)).collect(),
            start: branch(rng),
        }
    }

    fn pick<R: Rng>(rng: &mut R, dist: &[(usize, f64)]) -> usize {
        let total: f64 = dist.iter().map(|d| d.1).sum();
        let mut x = rng.gen::<f64>() * total;
        for &(w, p) in dist {
            if x < p {
                return w;
            }
            x -= p;
        }
        dist.last().unwrap().0
    }

    fn sentence<R: Rng>(&self, rng: &mut R, len: usize) -> Vec<usize> {
        let mut s = vec![Self::pick(rng, &self.start)];
        while s.len() < len {
            s.push(Self::pick(rng, &self.next[*s.last().unwrap()]));
        }
        s
    }
}

/// Generates the demo set: `n_sentences` lattices of 5 to 50 states and
/// `n_train` training sentences over a 60-word language; a handful of rare
/// words appear only in lattices and references.
pub fn demo_set(seed: u64, n_sentences: usize, n_train: usize) -> DemoSet {
    let mut rng = rng(seed);
    let mut taken = BTreeSet::new();
    let common = make_words(&mut rng, 60, &mut taken);
    let rare = make_words(&mut rng, 10, &mut taken);
    let mut symbols = SymbolTable::new();
    let common: Vec<Label> = common.iter().map(|w| symbols.intern(w)).collect();
    let rare: Vec<Label> = rare.iter().map(|w| symbols.intern(w)).collect();
    let source = Source::new(&mut rng, common.len());

    let train = (0..n_train)
        .map(|_| {
            let len = rng.gen_range(3..=15);
            source
                .sentence(&mut rng, len)
                .into_iter()
                .map(|i| common[i])
                .collect()
        })
        .collect();

    let sentences = (0..n_sentences)
        .map(|k| {
            let len = rng.gen_range(4..=20);
            let mut reference: Vec<Label> = source
                .sentence(&mut rng, len)
                .into_iter()
                .map(|i| common[i])
                .collect();
            for t in reference.iter_mut() {
                if rng.gen_bool(0.03) {
                    *t = *rare.choose(&mut rng).unwrap();
                }
            }
            let lattice = confusion_lattice(&mut rng, &reference, &common, &rare);
            DemoSentence {
                id: format!("s{k:03}"),
                lattice,
                reference,
            }
        })
        .collect();
    DemoSet {
        symbols,
        train,
        sentences,
    }
}

/// One slot per reference token with the true word and one or two
/// confusions, occasional deletions, duplicate arcs and two-word phrase
/// arcs that repeat a segment along a second path.
fn confusion_lattice<R: Rng>(
    rng: &mut R,
    reference: &[Label],
    common: &[Label],
    rare: &[Label],
) -> Wfsa {
    let n = reference.len();
    let mut w = Wfsa::with_states(n + 1, 0, Default::default());
    let cost = |rng: &mut R, bias: f64| Weight::from_cost(rng.gen_range(0.0..3.0) + bias);
    for (i, &truth) in reference.iter().enumerate() {
        let c = cost(rng, 0.0);
        w.add_arc(i, Arc::new(truth, c, i + 1));
        for _ in 0..rng.gen_range(1..=2) {
            let alt = if rng.gen_bool(0.04) {
                *rare.choose(rng).unwrap()
            } else {
                *common.choose(rng).unwrap()
            };
            let c = cost(rng, 0.3);
            w.add_arc(i, Arc::new(alt, c, i + 1));
        }
        if rng.gen_bool(0.08) {
            let c = cost(rng, 1.0);
            w.add_arc(i, Arc::new(EPSILON, c, i + 1));
        }
        if rng.gen_bool(0.08) {
            let c = cost(rng, 0.5);
            w.add_arc(i, Arc::new(truth, c, i + 1));
        }
        if i + 2 <= n && rng.gen_bool(0.1) {
            let mid = w.add_state();
            let c = cost(rng, 0.5);
            w.add_arc(i, Arc::new(truth, c, mid));
            w.add_arc(mid, Arc::new(reference[i + 1], Weight::ONE, i + 2));
        }
    }
    w.set_final(n, Weight::ONE);
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::enumerate_paths;

    #[test]
    fn random_lattices_are_acyclic_and_seeded() {
        let spec = LatticeSpec::default();
        let a: Vec<Wfsa> = (0..5).map(|_| random_lattice(&mut rng(7), &spec)).collect();
        assert!(a.iter().all(|w| w == &a[0]));
        let mut r = rng(8);
        for _ in 0..20 {
            let w = random_lattice(&mut r, &spec);
            assert!(w.is_acyclic());
            assert!(!w.is_empty_language());
            assert!(w.num_states() <= 100);
        }
    }

    #[test]
    fn small_lattices_respect_path_cap() {
        let mut r = rng(3);
        let spec = LatticeSpec {
            max_states: 12,
            ..Default::default()
        };
        for _ in 0..10 {
            let w = random_small_lattice(&mut r, &spec, 50);
            assert!(enumerate_paths(&w).unwrap().len() <= 50);
        }
    }

    #[test]
    fn demo_set_shape() {
        let d = demo_set(1, 60, 100);
        assert_eq!(d.sentences.len(), 60);
        assert_eq!(d.train.len(), 100);
        for s in &d.sentences {
            let n = s.lattice.num_states();
            assert!((5..=50).contains(&n), "{} has {n} states", s.id);
            assert!(crate::posterior::prepare(&s.lattice)
                .unwrap()
                .string_logprob(&s.reference)
                .is_some());
        }
        let again = demo_set(1, 60, 100);
        assert_eq!(again.sentences[7].lattice, d.sentences[7].lattice);
        assert_eq!(again.symbols.to_text(), d.symbols.to_text());
    }

    #[test]
    fn random_table_covers_lattice_prefixes() {
        let mut r = rng(11);
        let spec = LatticeSpec {
            max_states: 8,
            ..Default::default()
        };
        let w = random_small_lattice(&mut r, &spec, 40);
        let t = random_table_scorer(&mut r, &w, 0.2);
        assert!(t.num_rows() >= 1);
    }
}
