use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::semiring::Weight;
use crate::wfsa::{topo_sort, Arc, Label, StateId, Wfsa, EPSILON};

/// Removes epsilon arcs, preserving the weighted language in the
/// automaton's own semiring. The result is trimmed.
pub fn rm_epsilon(w: &Wfsa) -> Result<Wfsa> {
    let sr = w.semiring();
    let n = w.num_states();
    let eps_order = topo_sort(n, |q| {
        w.arcs(q)
            .iter()
            .filter(|a| a.label == EPSILON)
            .map(|a| a.next)
    })
    .ok_or(Error::EpsilonCycle)?;
    if !w.has_epsilons() {
        return Ok(w.connect());
    }
    let mut rank = vec![0usize; n];
    for (i, &q) in eps_order.iter().enumerate() {
        rank[q] = i;
    }

    let mut out = Wfsa::with_states(n, w.start(), sr);
    let mut dist = vec![Weight::ZERO; n];
    let mut in_closure = vec![false; n];
    for q in w.states() {
        // Epsilon closure of q with semiring distances.
        let mut closure = vec![q];
        in_closure[q] = true;
        let mut i = 0;
        while i < closure.len() {
            let p = closure[i];
            i += 1;
            for a in w.arcs(p).iter().filter(|a| a.label == EPSILON) {
                if !in_closure[a.next] {
                    in_closure[a.next] = true;
                    closure.push(a.next);
                }
            }
        }
        closure.sort_by_key(|&p| rank[p]);
        dist[q] = Weight::ONE;
        for &p in &closure {
            let d = dist[p];
            for a in w.arcs(p).iter().filter(|a| a.label == EPSILON) {
                dist[a.next] = sr.plus(dist[a.next], d.times(a.weight));
            }
        }

        let mut merged: BTreeMap<(Label, StateId), Weight> = BTreeMap::new();
        let mut fin = Weight::ZERO;
        for &p in &closure {
            let d = dist[p];
            fin = sr.plus(fin, d.times(w.final_weight(p)));
            for a in w.arcs(p).iter().filter(|a| a.label != EPSILON) {
                let e = merged.entry((a.label, a.next)).or_insert(Weight::ZERO);
                *e = sr.plus(*e, d.times(a.weight));
            }
        }
        for &p in &closure {
            dist[p] = Weight::ZERO;
            in_closure[p] = false;
        }
        out.set_final(q, fin);
        for ((label, next), weight) in merged {
            out.add_arc(q, Arc::new(label, weight, next));
        }
    }
    Ok(out.connect())
}
