use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::push::shortest_distance_to_final;
use crate::error::{Error, Result};
use crate::semiring::{Semiring, Weight};
use crate::wfsa::{Label, StateId, Wfsa, EPSILON};

pub const DEFAULT_PATH_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    /// Labels along the path with epsilons projected out.
    pub tokens: Vec<Label>,
    /// Product of arc weights and the final weight.
    pub cost: Weight,
}

/// Every successful path of an acyclic automaton, one entry per path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Combines the costs of paths sharing a token sequence.
    pub fn aggregate(&self, sr: Semiring) -> BTreeMap<Vec<Label>, Weight> {
        let mut out: BTreeMap<Vec<Label>, Weight> = BTreeMap::new();
        for p in &self.paths {
            let e = out.entry(p.tokens.clone()).or_insert(Weight::ZERO);
            *e = sr.plus(*e, p.cost);
        }
        out
    }

    pub fn has_duplicate_strings(&self) -> bool {
        let mut seen = BTreeSet::new();
        !self.paths.iter().all(|p| seen.insert(&p.tokens))
    }
}

pub fn enumerate_paths(w: &Wfsa) -> Result<PathSet> {
    enumerate_paths_capped(w, DEFAULT_PATH_CAP)
}

/// Depth-first enumeration of all paths with a finite cost. Fails on cyclic
/// input or when more than `cap` paths exist.
pub fn enumerate_paths_capped(w: &Wfsa, cap: usize) -> Result<PathSet> {
    w.topo_order()?;
    let mut paths = Vec::new();
    let mut stack: Vec<(StateId, Weight, Vec<Label>)> = vec![(w.start(), Weight::ONE, Vec::new())];
    while let Some((q, cost, tokens)) = stack.pop() {
        if cost.is_zero() {
            continue;
        }
        let fin = cost.times(w.final_weight(q));
        if !fin.is_zero() {
            if paths.len() == cap {
                return Err(Error::PathCapExceeded(cap));
            }
            paths.push(Path {
                tokens: tokens.clone(),
                cost: fin,
            });
        }
        for a in w.arcs(q).iter().rev() {
            let mut t = tokens.clone();
            if a.label != EPSILON {
                t.push(a.label);
            }
            stack.push((a.next, cost.times(a.weight), t));
        }
    }
    Ok(PathSet { paths })
}

/// True iff both automata assign the same aggregated weight (in `a`'s
/// semiring) to every string of either language, within `tol`.
pub fn equivalent_acyclic(a: &Wfsa, b: &Wfsa, tol: f64) -> Result<bool> {
    let sr = a.semiring();
    let la = enumerate_paths(a)?.aggregate(sr);
    let lb = enumerate_paths(b)?.aggregate(sr);
    if la.len() != lb.len() {
        return Ok(false);
    }
    Ok(la
        .iter()
        .all(|(s, wa)| lb.get(s).is_some_and(|wb| wa.approx_eq(*wb, tol))))
}

#[derive(Debug)]
struct Entry {
    priority: Weight,
    tokens: Vec<Label>,
    finished: bool,
    state: StateId,
    cost: Weight,
}

impl Entry {
    fn key(&self) -> (&Weight, &Vec<Label>, bool) {
        (&self.priority, &self.tokens, !self.finished)
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        let (pa, ta, fa) = self.key();
        let (pb, tb, fb) = other.key();
        pa.total_cmp(pb).then_with(|| ta.cmp(tb)).then(fa.cmp(&fb))
    }
}

/// The `n` cheapest strings of a deterministic acyclic automaton in
/// ascending cost, ties broken by token-id order.
///
/// Best-first search where partial paths are ranked by their cost plus the
/// exact tropical distance to a final state, so complete strings come off
/// the queue in order.
pub fn n_shortest_strings(w: &Wfsa, n: usize) -> Result<Vec<(Vec<Label>, Weight)>> {
    if w.has_epsilons() {
        return Err(Error::HasEpsilons);
    }
    if let Some((state, label)) = w.find_nondeterminism() {
        return Err(Error::NotDeterministic { state, label });
    }
    let v = shortest_distance_to_final(w, Semiring::Tropical)?;
    let mut out = Vec::new();
    if n == 0 || v[w.start()].is_zero() {
        return Ok(out);
    }
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(Entry {
        priority: v[w.start()],
        tokens: Vec::new(),
        finished: false,
        state: w.start(),
        cost: Weight::ONE,
    }));
    while let Some(Reverse(e)) = heap.pop() {
        if e.finished {
            out.push((e.tokens, e.cost));
            if out.len() == n {
                break;
            }
            continue;
        }
        let fin = e.cost.times(w.final_weight(e.state));
        if !fin.is_zero() {
            heap.push(Reverse(Entry {
                priority: fin,
                tokens: e.tokens.clone(),
                finished: true,
                state: e.state,
                cost: fin,
            }));
        }
        for a in w.arcs(e.state) {
            let cost = e.cost.times(a.weight);
            let priority = cost.times(v[a.next]);
            if priority.is_zero() {
                continue;
            }
            let mut tokens = e.tokens.clone();
            tokens.push(a.label);
            heap.push(Reverse(Entry {
                priority,
                tokens,
                finished: false,
                state: a.next,
                cost,
            }));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::determinize;
    use crate::wfsa::{parse_wfsa, ParseOptions, SymbolTable};

    const L1: &str = "0 1 a 0.0\n1 2 b 0.7\n1 3 c 1.6\n2\n3";

    fn table() -> SymbolTable {
        SymbolTable::from_tokens(["a", "b", "c"])
    }

    #[test]
    fn enumerates_l1() {
        let mut t = table();
        let w = parse_wfsa(L1, &mut t).unwrap();
        let ps = enumerate_paths(&w).unwrap();
        assert_eq!(ps.len(), 2);
        let agg = ps.aggregate(Semiring::Tropical);
        assert!((agg[&vec![1, 2]].value() - 0.7).abs() < 1e-15);
        assert!((agg[&vec![1, 3]].value() - 1.6).abs() < 1e-15);
    }

    #[test]
    fn empty_language_has_no_paths() {
        let mut t = table();
        let opts = ParseOptions {
            allow_empty: true,
            ..Default::default()
        };
        let w = parse_wfsa_with_opts("0 1 a\n1 2 b", &mut t, opts);
        assert!(enumerate_paths(&w).unwrap().is_empty());
    }

    fn parse_wfsa_with_opts(s: &str, t: &mut SymbolTable, o: ParseOptions) -> Wfsa {
        crate::wfsa::parse_wfsa_with(s, t, o).unwrap()
    }

    #[test]
    fn cap_and_cycles() {
        let mut t = table();
        let w = parse_wfsa(L1, &mut t).unwrap();
        assert!(matches!(
            enumerate_paths_capped(&w, 1),
            Err(Error::PathCapExceeded(1))
        ));
        let cyc = parse_wfsa("0 1 a\n1 0 b\n1", &mut t).unwrap();
        assert!(matches!(enumerate_paths(&cyc), Err(Error::Cyclic)));
    }

    #[test]
    fn nbest_on_l1() {
        let mut t = table();
        let w = determinize(&parse_wfsa(L1, &mut t).unwrap()).unwrap();
        let nb = n_shortest_strings(&w, 2).unwrap();
        assert_eq!(nb.len(), 2);
        assert_eq!(nb[0].0, vec![1, 2]);
        assert!((nb[0].1.value() - 0.7).abs() < 1e-12);
        assert_eq!(nb[1].0, vec![1, 3]);
        assert!((nb[1].1.value() - 1.6).abs() < 1e-12);
        assert_eq!(n_shortest_strings(&w, 10).unwrap().len(), 2);
        assert_eq!(n_shortest_strings(&w, 1).unwrap()[0].0, vec![1, 2]);
    }

    #[test]
    fn nbest_breaks_ties_by_token_order() {
        let mut t = table();
        let w = parse_wfsa("0 1 c 1\n0 2 b 1\n0 3 a 1\n1\n2\n3", &mut t).unwrap();
        let nb = n_shortest_strings(&w, 3).unwrap();
        let order: Vec<Vec<Label>> = nb.into_iter().map(|(s, _)| s).collect();
        assert_eq!(order, vec![vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn nbest_includes_empty_string_and_prefixes() {
        let mut t = table();
        let w = parse_wfsa("0 1 a 0.5\n1 2 b 0.5\n0 2.0\n1 0.25\n2", &mut t).unwrap();
        let nb = n_shortest_strings(&w, 5).unwrap();
        let costs: Vec<f64> = nb.iter().map(|(_, c)| c.value()).collect();
        assert_eq!(costs, vec![0.75, 1.0, 2.0]);
        assert_eq!(nb[2].0, Vec::<Label>::new());
    }

    #[test]
    fn nbest_rejects_nondeterminism() {
        let mut t = table();
        let w = parse_wfsa("0 1 a\n0 2 a\n1\n2", &mut t).unwrap();
        assert!(matches!(
            n_shortest_strings(&w, 1),
            Err(Error::NotDeterministic { .. })
        ));
    }

    #[test]
    fn equivalence() {
        let mut t = table();
        let a = parse_wfsa(L1, &mut t).unwrap();
        let b = parse_wfsa("0 1 a 0.0\n1 2 b 0.7\n1 3 c 1.7\n2\n3", &mut t).unwrap();
        assert!(equivalent_acyclic(&a, &a, 0.0).unwrap());
        assert!(!equivalent_acyclic(&a, &b, 1e-9).unwrap());
        assert!(equivalent_acyclic(&a, &determinize(&a).unwrap(), 1e-12).unwrap());
    }
}
