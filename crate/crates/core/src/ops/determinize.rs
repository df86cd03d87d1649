use std::collections::{BTreeMap, HashMap, VecDeque};

use super::quantize;
use crate::error::{Error, Result};
use crate::semiring::Weight;
use crate::wfsa::{Arc, Label, StateId, Wfsa};

/// A determinized state: input states with their residual weights, sorted
/// by state id.
type Subset = Vec<(StateId, Weight)>;

fn subset_key(s: &Subset) -> Vec<(StateId, i64)> {
    s.iter().map(|&(q, r)| (q, quantize(r))).collect()
}

/// Weighted subset construction for epsilon-free acyclic automata.
///
/// Each output state is a set of input states paired with residual weights.
/// Arcs leaving a subset are grouped by label; the arc weight is the
/// semiring sum of the candidate weights and the remainder stays as the
/// residual of the destination subset. In the tropical semiring every
/// accepted string keeps its minimum-cost path; in the log semiring the
/// string weights are log-summed. Output arcs are sorted by label.
pub fn determinize(w: &Wfsa) -> Result<Wfsa> {
    if w.has_epsilons() {
        return Err(Error::HasEpsilons);
    }
    w.topo_order()?;
    let sr = w.semiring();

    let mut out = Wfsa::with_states(1, 0, sr);
    let start: Subset = vec![(w.start(), Weight::ONE)];
    let mut ids: HashMap<Vec<(StateId, i64)>, StateId> = HashMap::new();
    ids.insert(subset_key(&start), 0);
    let mut queue: VecDeque<(StateId, Subset)> = VecDeque::from([(0, start)]);

    while let Some((id, subset)) = queue.pop_front() {
        let fin = sr.sum(subset.iter().map(|&(q, r)| r.times(w.final_weight(q))));
        out.set_final(id, fin);

        let mut by_label: BTreeMap<Label, BTreeMap<StateId, Weight>> = BTreeMap::new();
        for &(q, r) in &subset {
            for a in w.arcs(q) {
                let dest = by_label.entry(a.label).or_default();
                let e = dest.entry(a.next).or_insert(Weight::ZERO);
                *e = sr.plus(*e, r.times(a.weight));
            }
        }
        for (label, dest) in by_label {
            let total = sr.sum(dest.values().copied());
            if total.is_zero() {
                continue;
            }
            let next: Subset = dest
                .into_iter()
                .map(|(q, v)| (q, v.divide(total)))
                .filter(|(_, r)| !r.is_zero())
                .collect();
            let key = subset_key(&next);
            let next_id = match ids.get(&key) {
                Some(&nid) => nid,
                None => {
                    let nid = out.add_state();
                    ids.insert(key, nid);
                    queue.push_back((nid, next));
                    nid
                }
            };
            out.add_arc(id, Arc::new(label, total, next_id));
        }
    }
    Ok(out)
}
