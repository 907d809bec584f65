use serde::{Deserialize, Serialize};

use crate::probability::{CellProbs, InstrumentTable, SimplexPolytope};

/// Which selection model the correspondence encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Roy,
    Generalized,
}

/// `g[obs][pot]`: whether potential pair `pot = (y0, y1)` is compatible with
/// observed `obs = (y, d)`. Both are indexed `2*first + second`.
pub fn correspondence(variant: Variant) -> [[bool; 4]; 4] {
    let idx = |a: usize, b: usize| 2 * a + b;
    let mut g = [[false; 4]; 4];
    // (Y, D) = (1, 1): Y1 = 1
    g[idx(1, 1)][idx(1, 1)] = true;
    g[idx(1, 1)][idx(0, 1)] = true;
    // (Y, D) = (1, 0): Y0 = 1
    g[idx(1, 0)][idx(1, 1)] = true;
    g[idx(1, 0)][idx(1, 0)] = true;
    match variant {
        Variant::Roy => {
            // a failure in the chosen sector means failure in both
            g[idx(0, 1)][idx(0, 0)] = true;
            g[idx(0, 0)][idx(0, 0)] = true;
        }
        Variant::Generalized => {
            // (Y, D) = (0, 1): Y1 = 0
            g[idx(0, 1)][idx(1, 0)] = true;
            g[idx(0, 1)][idx(0, 0)] = true;
            // (Y, D) = (0, 0): Y0 = 0
            g[idx(0, 0)][idx(0, 1)] = true;
            g[idx(0, 0)][idx(0, 0)] = true;
        }
    }
    g
}

/// Every inequality `P((Y0,Y1) ∈ A) <= P(G(Y,D) ∩ A ≠ ∅)` over the 14
/// nonempty proper subsets `A` of the four potential pairs.
pub fn artstein_set(q: &CellProbs, variant: Variant) -> SimplexPolytope {
    let g = correspondence(variant);
    let cells = q.as_array();
    let mut poly = SimplexPolytope::full();
    for mask in 1u32..15 {
        let member = |k: usize| mask & (1 << k) != 0;
        let mut a = [0.0; 4];
        for (k, ak) in a.iter_mut().enumerate() {
            if member(k) {
                *ak = 1.0;
            }
        }
        let hits: f64 = (0..4)
            .filter(|&obs| (0..4).any(|pot| g[obs][pot] && member(pot)))
            .map(|obs| cells[obs])
            .sum();
        poly.at_most(a, hits);
    }
    poly
}

/// Intersection of the per-`z` sets.
pub fn artstein_set_table(t: &InstrumentTable, variant: Variant) -> SimplexPolytope {
    t.points()
        .iter()
        .fold(SimplexPolytope::full(), |acc, p| acc.intersect(&artstein_set(&p.cells, variant)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::sharp_bounds;
    use crate::generalized::joint_polytope;
    use crate::probability::simplex_grid;

    fn q(a: f64, b: f64, c: f64, d: f64) -> CellProbs {
        CellProbs::new(a, b, c, d).unwrap()
    }

    #[test]
    fn roy_variant_matches_closed_form() {
        let cells = q(0.2, 0.1, 0.3, 0.4);
        let a = artstein_set(&cells, Variant::Roy);
        let b = sharp_bounds(&cells).polytope;
        let mut inside = 0;
        for p in simplex_grid(100) {
            assert_eq!(a.contains(&p), b.contains(&p), "{p:?}");
            inside += a.contains(&p) as usize;
        }
        assert!(inside > 0);
    }

    #[test]
    fn generalized_variant_matches_joint_polytope() {
        let cells = q(0.15, 0.25, 0.35, 0.25);
        let a = artstein_set(&cells, Variant::Generalized);
        let b = joint_polytope(&InstrumentTable::single(cells)).unwrap();
        for p in simplex_grid(50) {
            assert_eq!(a.contains(&p), b.contains(&p), "{p:?}");
        }
    }

    #[test]
    fn all_failures_pin_the_joint() {
        let a = artstein_set(&q(1.0, 0.0, 0.0, 0.0), Variant::Roy);
        let v = a.vertices();
        assert_eq!(v.len(), 1);
        assert!((v[0][0] - 1.0).abs() < 1e-12);
    }
}
