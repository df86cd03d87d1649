use std::collections::HashMap;

use super::{push::shortest_distance_to_final, quantize};
use crate::error::{Error, Result};
use crate::semiring::{Semiring, Weight};
use crate::wfsa::{Arc, Label, StateId, Wfsa};

/// Minimizes a deterministic acyclic automaton.
///
/// Weights are first pushed toward the initial state in the tropical
/// semiring so that equivalent suffixes carry identical arc weights. States
/// are then merged bottom-up (reverse topological order) by their
/// signature: final weight plus the sorted list of (label, weight,
/// successor class). The initial state keeps the total path weight on its
/// own arcs, so the weight of every accepted string is unchanged.
pub fn minimize(w: &Wfsa) -> Result<Wfsa> {
    if w.has_epsilons() {
        return Err(Error::HasEpsilons);
    }
    if let Some((state, label)) = w.find_nondeterminism() {
        return Err(Error::NotDeterministic { state, label });
    }
    w.topo_order()?;
    let c = w.connect();
    if c.is_empty_language() {
        return Ok(c);
    }
    let pushed = push_tropical(&c);
    let order = pushed.topo_order()?;

    type Signature = (i64, Vec<(Label, i64, usize)>);
    let mut class_of = vec![usize::MAX; pushed.num_states()];
    let mut classes: HashMap<Signature, usize> = HashMap::new();
    let mut representative: Vec<StateId> = Vec::new();
    for &q in order.iter().rev() {
        let mut arcs: Vec<(Label, i64, usize)> = pushed
            .arcs(q)
            .iter()
            .map(|a| (a.label, quantize(a.weight), class_of[a.next]))
            .collect();
        arcs.sort_unstable();
        let sig = (quantize(pushed.final_weight(q)), arcs);
        // The initial state keeps unpushed weights and is never merged.
        if q == pushed.start() {
            class_of[q] = representative.len();
            representative.push(q);
            continue;
        }
        let next_class = representative.len();
        let class = *classes.entry(sig).or_insert(next_class);
        if class == next_class {
            representative.push(q);
        }
        class_of[q] = class;
    }

    let mut out = Wfsa::with_states(
        representative.len(),
        class_of[pushed.start()],
        Semiring::Tropical,
    );
    out.set_semiring(w.semiring());
    for (class, &q) in representative.iter().enumerate() {
        out.set_final(class, pushed.final_weight(q));
        for a in pushed.arcs(q) {
            out.add_arc(class, Arc::new(a.label, a.weight, class_of[a.next]));
        }
    }
    // Renumber in topological order from the initial state.
    let mut out = reorder_topologically(&out);
    out.sort_arcs();
    Ok(out)
}

/// Tropical pushing toward the initial state with the initial state's
/// potential fixed at zero.
fn push_tropical(w: &Wfsa) -> Wfsa {
    let mut v =
        shortest_distance_to_final(w, Semiring::Tropical).expect("acyclic input checked by caller");
    v[w.start()] = Weight::ONE;
    let mut out = w.clone();
    for q in w.states() {
        out.set_final(q, w.final_weight(q).divide(v[q]));
        for a in out.arcs_mut(q) {
            a.weight = a.weight.times(v[a.next]).divide(v[q]);
        }
    }
    out
}

fn reorder_topologically(w: &Wfsa) -> Wfsa {
    let order = w.topo_order().expect("acyclic");
    let mut map = vec![0; w.num_states()];
    for (i, &q) in order.iter().enumerate() {
        map[q] = i;
    }
    let mut out = Wfsa::with_states(w.num_states(), map[w.start()], w.semiring());
    for &q in &order {
        out.set_final(map[q], w.final_weight(q));
        for a in w.arcs(q) {
            out.add_arc(map[q], Arc::new(a.label, a.weight, map[a.next]));
        }
    }
    out
}
