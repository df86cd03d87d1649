use crate::error::{Error, Result};
use crate::semiring::{Semiring, Weight};
use crate::wfsa::Wfsa;

pub const DEFAULT_STOCHASTIC_TOL: f64 = 1e-6;

/// Per-state semiring sum over all suffix paths to a final state, computed
/// by a backward sweep in topological order.
pub fn shortest_distance_to_final(w: &Wfsa, sr: Semiring) -> Result<Vec<Weight>> {
    let order = w.topo_order()?;
    let mut v = vec![Weight::ZERO; w.num_states()];
    for &q in order.iter().rev() {
        let mut d = w.final_weight(q);
        for a in w.arcs(q) {
            d = sr.plus(d, a.weight.times(v[a.next]));
        }
        v[q] = d;
    }
    Ok(v)
}

/// Pushes weights toward the initial state in the log semiring.
///
/// With `V(q)` the log-sum of all suffix paths from `q`, arc weights become
/// `w + V(next) - V(src)` and final weights `f - V(q)`. The total mass
/// `V(initial)` is removed and returned, so the result is stochastic: the
/// arc and final probabilities leaving each state sum to one.
pub fn push_log(w: &Wfsa) -> Result<(Wfsa, Weight)> {
    let v = shortest_distance_to_final(w, Semiring::Log)?;
    if let Some(q) = v.iter().position(|d| d.is_zero()) {
        return Err(Error::NotCoaccessible(q));
    }
    let mut out = w.clone().with_semiring(Semiring::Log);
    for q in w.states() {
        out.set_final(q, w.final_weight(q).divide(v[q]));
        for a in out.arcs_mut(q) {
            a.weight = a.weight.times(v[a.next]).divide(v[q]);
        }
    }
    Ok((out, v[w.start()]))
}

/// Largest absolute log-mass deviation from zero over accessible states.
pub fn max_stochastic_deviation(w: &Wfsa) -> f64 {
    let acc = w.accessible();
    w.states()
        .filter(|&q| acc[q])
        .map(|q| {
            let total = Semiring::Log.sum(
                w.arcs(q)
                    .iter()
                    .map(|a| a.weight)
                    .chain(std::iter::once(w.final_weight(q))),
            );
            if total.is_zero() {
                f64::INFINITY
            } else {
                total.value().abs()
            }
        })
        .fold(0.0, f64::max)
}

/// True iff at every accessible state the log-sum of outgoing arc weights
/// and the final weight is zero within `tol`.
pub fn check_stochastic(w: &Wfsa, tol: f64) -> bool {
    max_stochastic_deviation(w) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wfsa::{parse_wfsa, SymbolTable};

    const L1: &str = "0 1 a 0.0\n1 2 b 0.7\n1 3 c 1.6\n2\n3";

    fn l1() -> Wfsa {
        let mut t = SymbolTable::from_tokens(["a", "b", "c"]);
        parse_wfsa(L1, &mut t).unwrap()
    }

    #[test]
    fn single_path_carries_all_mass() {
        let mut t = SymbolTable::from_tokens(["a", "b"]);
        let w = parse_wfsa("0 1 a 0.3\n1 2 b 0.4\n2 0", &mut t).unwrap();
        let (p, total) = push_log(&w).unwrap();
        assert!((total.value() - 0.7).abs() < 1e-12);
        for q in p.states() {
            for a in p.arcs(q) {
                assert!(a.weight.value().abs() < 1e-12);
            }
        }
        assert!(check_stochastic(&p, 1e-12));
    }

    #[test]
    fn l1_conditionals() {
        // Oracle values from extended-precision evaluation of
        // e^-0.7 / (e^-0.7 + e^-1.6).
        let (p, total) = push_log(&l1()).unwrap();
        assert!((total.value() - 0.358_846_125_267_912_2).abs() < 1e-12);
        assert!(p.arcs(0)[0].weight.value().abs() < 1e-12);
        let b = p.arcs(1)[0].weight.value();
        let c = p.arcs(1)[1].weight.value();
        assert!((b - 0.341_153_874_732_087_8).abs() < 1e-12, "{b}");
        assert!((c - 1.241_153_874_732_087_8).abs() < 1e-12, "{c}");
        assert!(((-b).exp() - 0.710_949_502_625_004).abs() < 1e-12);
        assert_eq!(p.semiring(), Semiring::Log);
    }

    #[test]
    fn stochastic_check() {
        let w = l1();
        assert!(!check_stochastic(&w, 1e-6));
        // State 1 holds e^-0.7 + e^-1.6 = 0.6985 of the mass.
        let dev = max_stochastic_deviation(&w);
        assert!((dev - 0.358_846_125_267_912_2).abs() < 1e-12);
        let (p, _) = push_log(&w).unwrap();
        assert!(check_stochastic(&p, 1e-6));

        let mut t = SymbolTable::new();
        let single = parse_wfsa("0 0.0", &mut t).unwrap();
        assert!(check_stochastic(&single, 1e-6));
    }

    #[test]
    fn pushing_is_idempotent() {
        let (p, _) = push_log(&l1()).unwrap();
        let (p2, total) = push_log(&p).unwrap();
        assert!(total.value().abs() < 1e-9);
        for q in p.states() {
            assert!(p.final_weight(q).approx_eq(p2.final_weight(q), 1e-9));
            for (a, b) in p.arcs(q).iter().zip(p2.arcs(q)) {
                assert!(a.weight.approx_eq(b.weight, 1e-9));
            }
        }
    }

    #[test]
    fn rejects_dead_states() {
        let mut t = SymbolTable::from_tokens(["a", "b"]);
        let w = parse_wfsa("0 1 a\n0 2 b\n1", &mut t).unwrap();
        assert!(matches!(push_log(&w), Err(Error::NotCoaccessible(2))));
    }
}
