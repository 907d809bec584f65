//! Sharp bounds for the binary Roy model.
//!
//! Without an instrument the joint law of `(Y0, Y1)` is pinned down up to
//! `p00 = P(Y=0)`, `p10 <= P(Y=1,D=0)`, `p01 <= P(Y=1,D=1)`. An excluded
//! instrument tightens the two caps to their minima over `z`; sector-specific
//! covariates give the marginal and conditional bounds further down.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RoyError};
use crate::probability::{CellProbs, InstrumentTable, IntervalBound, SimplexPolytope};

const P00: [f64; 4] = [1.0, 0.0, 0.0, 0.0];
const P01: [f64; 4] = [0.0, 1.0, 0.0, 0.0];
const P10: [f64; 4] = [0.0, 0.0, 1.0, 0.0];

/// Numerical slack added to the user tolerance in the `Y ⊥ Z` check.
pub const Y_INDEPENDENCE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryRoyBounds {
    pub p00_value: f64,
    pub p10_bound: IntervalBound,
    pub p01_bound: IntervalBound,
    pub ey0_bound: IntervalBound,
    pub ey1_bound: IntervalBound,
    pub ate_bound: IntervalBound,
    pub polytope: SimplexPolytope,
}

fn roy_polytope(p00: f64, cap10: f64, cap01: f64) -> SimplexPolytope {
    let mut poly = SimplexPolytope::full();
    poly.equal_to(P00, p00).at_most(P10, cap10).at_most(P01, cap01);
    poly
}

/// Manski bounds on `E Y0`, `E Y1` and the ATE from a single cell law.
pub fn manski_bounds(q: &CellProbs) -> (IntervalBound, IntervalBound, IntervalBound) {
    let py1 = q.p_y1();
    (
        IntervalBound::sharp(q.q10, py1, "E[Y0] worst case"),
        IntervalBound::sharp(q.q11, py1, "E[Y1] worst case"),
        IntervalBound::sharp(-q.q10, q.q11, "ATE worst case"),
    )
}

pub fn sharp_bounds(q: &CellProbs) -> BinaryRoyBounds {
    let py1 = q.p_y1();
    BinaryRoyBounds {
        p00_value: q.p_y0(),
        p10_bound: IntervalBound::sharp(0.0, q.q10, "P(Y0=1,Y1=0)"),
        p01_bound: IntervalBound::sharp(0.0, q.q11, "P(Y0=0,Y1=1)"),
        ey0_bound: IntervalBound::sharp(q.q10, py1, "E[Y0]"),
        ey1_bound: IntervalBound::sharp(q.q11, py1, "E[Y1]"),
        ate_bound: IntervalBound::sharp(-q.q10, q.q11, "ATE"),
        polytope: roy_polytope(q.p_y0(), q.q10, q.q11),
    }
}

/// Largest deviation of `P(Y=1|z)` from the pooled `P(Y=1)`.
pub fn outcome_instrument_gap(t: &InstrumentTable) -> f64 {
    let pooled = t.pooled().p_y1();
    t.points()
        .iter()
        .map(|p| (p.cells.p_y1() - pooled).abs())
        .fold(0.0, f64::max)
}

/// Bounds under an excluded instrument. `tau_y` is the tolerated variation
/// of `P(Y=1|z)` across `z`; use 0 for exact cells.
pub fn sharp_bounds_with_instrument(t: &InstrumentTable, tau_y: f64) -> Result<BinaryRoyBounds> {
    let gap = outcome_instrument_gap(t);
    if gap > tau_y + Y_INDEPENDENCE_SLACK {
        return Err(RoyError::OutcomeInstrumentDependence { gap, tolerance: tau_y });
    }
    let pooled = t.pooled();
    let pts = t.points();
    let min10 = pts.iter().map(|p| p.cells.q10).fold(f64::INFINITY, f64::min);
    let min11 = pts.iter().map(|p| p.cells.q11).fold(f64::INFINITY, f64::min);
    let max10 = pts.iter().map(|p| p.cells.q10).fold(0.0, f64::max);
    let max11 = pts.iter().map(|p| p.cells.q11).fold(0.0, f64::max);
    let py1 = pooled.p_y1();
    Ok(BinaryRoyBounds {
        p00_value: pooled.p_y0(),
        p10_bound: IntervalBound::sharp(0.0, min10, "P(Y0=1,Y1=0), instrument"),
        p01_bound: IntervalBound::sharp(0.0, min11, "P(Y0=0,Y1=1), instrument"),
        ey0_bound: IntervalBound::sharp(max10, py1, "E[Y0], instrument"),
        ey1_bound: IntervalBound::sharp(max11, py1, "E[Y1], instrument"),
        ate_bound: IntervalBound::sharp(-min10, min11, "ATE, instrument"),
        polytope: roy_polytope(pooled.p_y0(), min10, min11),
    })
}

/// Cell laws indexed by a sector-0 covariate `x0` and a sector-1 covariate `x1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CovariateGrid {
    cells: BTreeMap<(String, String), CellProbs>,
}

impl CovariateGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x0: impl Into<String>, x1: impl Into<String>, q: CellProbs) {
        self.cells.insert((x0.into(), x1.into()), q);
    }

    pub fn get(&self, x0: &str, x1: &str) -> Result<&CellProbs> {
        self.cells
            .get(&(x0.to_string(), x1.to_string()))
            .ok_or_else(|| RoyError::MissingCell { x0: x0.into(), x1: x1.into() })
    }

    pub fn cells(&self) -> impl Iterator<Item = (&str, &str, &CellProbs)> {
        self.cells.iter().map(|((a, b), q)| (a.as_str(), b.as_str(), q))
    }

    /// Supp(X1 | X0 = x0)
    pub fn support_x1(&self, x0: &str) -> Vec<&str> {
        self.cells
            .keys()
            .filter(|(a, _)| a == x0)
            .map(|(_, b)| b.as_str())
            .collect()
    }

    /// Supp(X0 | X1 = x1)
    pub fn support_x0(&self, x1: &str) -> Vec<&str> {
        self.cells
            .keys()
            .filter(|(_, b)| b == x1)
            .map(|(a, _)| a.as_str())
            .collect()
    }

    pub fn x0_values(&self) -> BTreeSet<&str> {
        self.cells.keys().map(|(a, _)| a.as_str()).collect()
    }

    pub fn x1_values(&self) -> BTreeSet<&str> {
        self.cells.keys().map(|(_, b)| b.as_str()).collect()
    }

    /// Admissible range of `a = E(Y0 | x0)`.
    pub fn a_range(&self, x0: &str, x1: &str) -> Result<(f64, f64)> {
        self.get(x0, x1)?;
        let cells: Vec<&CellProbs> = self
            .support_x1(x0)
            .into_iter()
            .map(|b| self.get(x0, b))
            .collect::<Result<_>>()?;
        Ok(sup_inf(&cells, |q| q.q10))
    }

    /// Admissible range of `b = E(Y1 | x1)`.
    pub fn b_range(&self, x0: &str, x1: &str) -> Result<(f64, f64)> {
        self.get(x0, x1)?;
        let cells: Vec<&CellProbs> = self
            .support_x0(x1)
            .into_iter()
            .map(|a| self.get(a, x1))
            .collect::<Result<_>>()?;
        Ok(sup_inf(&cells, |q| q.q11))
    }
}

fn sup_inf(cells: &[&CellProbs], cell: impl Fn(&CellProbs) -> f64) -> (f64, f64) {
    let lo = cells.iter().map(|q| cell(q)).fold(0.0, f64::max);
    let hi = cells.iter().map(|q| q.p_y1()).fold(1.0, f64::min);
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariateMarginals {
    pub ey0: IntervalBound,
    pub ey1: IntervalBound,
    pub crossed: bool,
}

pub fn marginal_bounds_with_covariates(g: &CovariateGrid, x0: &str, x1: &str) -> Result<CovariateMarginals> {
    let (a_lo, a_hi) = g.a_range(x0, x1)?;
    let (b_lo, b_hi) = g.b_range(x0, x1)?;
    let ey0 = IntervalBound::sharp(a_lo, a_hi, format!("E[Y0|X0={x0}]"));
    let ey1 = IntervalBound::sharp(b_lo, b_hi, format!("E[Y1|X1={x1}]"));
    let crossed = ey0.is_empty() || ey1.is_empty();
    Ok(CovariateMarginals { ey0, ey1, crossed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalBounds {
    pub p_y1_given_y0_zero: IntervalBound,
    pub p_y0_given_y1_zero: IntervalBound,
}

/// Bounds on `P(Y1=1 | Y0=0, x)` and `P(Y0=1 | Y1=0, x)`.
pub fn conditional_bounds(g: &CovariateGrid, x0: &str, x1: &str) -> Result<ConditionalBounds> {
    let c = g.get(x0, x1)?.p_y1();
    let one = |(lo, hi): (f64, f64), what: &str| -> Result<IntervalBound> {
        if lo > hi + 1e-12 {
            return Err(RoyError::BoundsCross { quantity: what.into(), lo, hi });
        }
        if hi >= 1.0 - 1e-9 {
            return Err(RoyError::DegenerateConditioning { mass: 1.0 - hi });
        }
        let f = |a: f64| (c - a) / (1.0 - a);
        Ok(IntervalBound::sharp(f(hi), f(lo), what).clamped(0.0, 1.0))
    };
    Ok(ConditionalBounds {
        p_y1_given_y0_zero: one(g.a_range(x0, x1)?, "P(Y1=1|Y0=0,X)")?,
        p_y0_given_y1_zero: one(g.b_range(x0, x1)?, "P(Y0=1|Y1=0,X)")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{membership, polytope_extrema, PotentialJoint};
    use approx::assert_abs_diff_eq;

    fn q(a: f64, b: f64, c: f64, d: f64) -> CellProbs {
        CellProbs::new(a, b, c, d).unwrap()
    }

    #[test]
    fn thm1_examples() {
        let b = sharp_bounds(&q(0.5, 0.5, 0.0, 0.0));
        assert_eq!(b.p00_value, 1.0);
        assert_eq!((b.p10_bound.hi, b.p01_bound.hi), (0.0, 0.0));
        let b = sharp_bounds(&q(0.2, 0.1, 0.3, 0.4));
        assert_abs_diff_eq!(b.p00_value, 0.3, epsilon = 1e-15);
        assert_eq!((b.p10_bound.lo, b.p10_bound.hi), (0.0, 0.3));
        assert_eq!((b.p01_bound.lo, b.p01_bound.hi), (0.0, 0.4));
        assert!(b.p10_bound.sharp && b.ate_bound.sharp);
    }

    #[test]
    fn manski_examples() {
        let (e0, e1, ate) = manski_bounds(&q(0.2, 0.1, 0.3, 0.4));
        assert_abs_diff_eq!(e0.lo, 0.3);
        assert_abs_diff_eq!(e0.hi, 0.7);
        assert_abs_diff_eq!(e1.lo, 0.4);
        assert_abs_diff_eq!(e1.hi, 0.7);
        assert_abs_diff_eq!(ate.lo, -0.3);
        assert_abs_diff_eq!(ate.hi, 0.4);
        let (e0, e1, ate) = manski_bounds(&q(1.0, 0.0, 0.0, 0.0));
        assert_eq!([e0.lo, e0.hi, e1.lo, e1.hi, ate.lo, ate.hi], [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let (e0, e1, _) = manski_bounds(&q(0.25, 0.25, 0.25, 0.25));
        assert_eq!([e0.lo, e0.hi, e1.lo, e1.hi], [0.25, 0.5, 0.25, 0.5]);
    }

    #[test]
    fn ate_matches_polytope() {
        let b = sharp_bounds(&q(0.15, 0.25, 0.35, 0.25));
        let ext = polytope_extrema(&b.polytope, [0.0, 1.0, -1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(ext.lo, b.ate_bound.lo, epsilon = 1e-9);
        assert_abs_diff_eq!(ext.hi, b.ate_bound.hi, epsilon = 1e-9);
        assert_abs_diff_eq!(b.ey1_bound.lo - b.ey0_bound.hi, b.ate_bound.lo, epsilon = 1e-12);
        assert_abs_diff_eq!(b.ey1_bound.hi - b.ey0_bound.lo, b.ate_bound.hi, epsilon = 1e-12);
    }

    #[test]
    fn instrument_examples() {
        let same = InstrumentTable::uniform(&[q(0.2, 0.1, 0.3, 0.4), q(0.2, 0.1, 0.3, 0.4)]).unwrap();
        let a = sharp_bounds_with_instrument(&same, 0.0).unwrap();
        let b = sharp_bounds(&q(0.2, 0.1, 0.3, 0.4));
        assert_abs_diff_eq!(a.p00_value, b.p00_value, epsilon = 1e-15);
        assert_abs_diff_eq!(a.ey0_bound.lo, b.ey0_bound.lo, epsilon = 1e-15);
        assert_abs_diff_eq!(a.ey1_bound.hi, b.ey1_bound.hi, epsilon = 1e-15);

        let t = InstrumentTable::uniform(&[q(0.2, 0.1, 0.3, 0.4), q(0.25, 0.05, 0.35, 0.35)]).unwrap();
        let r = sharp_bounds_with_instrument(&t, 0.0).unwrap();
        assert_abs_diff_eq!(r.p00_value, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p10_bound.hi, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p01_bound.hi, 0.35, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ey0_bound.lo, 0.35, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ey0_bound.hi, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ey1_bound.lo, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ey1_bound.hi, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ate_bound.lo, -0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ate_bound.hi, 0.35, epsilon = 1e-12);

        let bad = InstrumentTable::uniform(&[q(0.2, 0.1, 0.3, 0.4), q(0.3, 0.1, 0.3, 0.3)]).unwrap();
        let err = sharp_bounds_with_instrument(&bad, 0.0).unwrap_err();
        assert!(matches!(err, RoyError::OutcomeInstrumentDependence { .. }));
        assert!(err.is_model_rejection());
        assert!(sharp_bounds_with_instrument(&bad, 0.2).is_ok());
    }

    #[test]
    fn instrument_pair_is_attained() {
        // every (e0, e1) on a 0.05 grid of the Cor 2 rectangle has a joint in the polytope
        let t = InstrumentTable::uniform(&[q(0.2, 0.1, 0.3, 0.4), q(0.25, 0.05, 0.35, 0.35)]).unwrap();
        let r = sharp_bounds_with_instrument(&t, 0.0).unwrap();
        let p00 = r.p00_value;
        let mut e0 = r.ey0_bound.lo;
        while e0 <= r.ey0_bound.hi + 1e-12 {
            let mut e1 = r.ey1_bound.lo;
            while e1 <= r.ey1_bound.hi + 1e-12 {
                // p10 + p11 = e0, p01 + p11 = e1, p00 fixed -> p11 = e0 + e1 - (1 - p00)
                let p11 = e0 + e1 - (1.0 - p00);
                let p = PotentialJoint::new(p00, e1 - p11, e0 - p11, p11);
                assert!(p.map(|p| membership(&r.polytope, &p)).unwrap_or(false), "({e0},{e1})");
                e1 += 0.05;
            }
            e0 += 0.05;
        }
    }

    #[test]
    fn covariate_examples() {
        let mut g = CovariateGrid::new();
        g.insert("a", "b", q(0.2, 0.1, 0.3, 0.4));
        let m = marginal_bounds_with_covariates(&g, "a", "b").unwrap();
        assert_eq!((m.ey0.lo, m.ey0.hi, m.ey1.lo, m.ey1.hi, m.crossed), (0.3, 0.7, 0.4, 0.7, false));

        let mut g = CovariateGrid::new();
        g.insert("x0a", "x1", q(0.1, 0.1, 0.1, 0.7));
        g.insert("x0b", "x1", q(0.3, 0.3, 0.2, 0.2));
        let m = marginal_bounds_with_covariates(&g, "x0a", "x1").unwrap();
        assert_abs_diff_eq!(m.ey1.lo, 0.7);
        assert_abs_diff_eq!(m.ey1.hi, 0.4);
        assert!(m.crossed);

        let mut g = CovariateGrid::new();
        for a in ["u", "v"] {
            for b in ["s", "t"] {
                g.insert(a, b, q(0.2, 0.1, 0.3, 0.4));
            }
        }
        let m = marginal_bounds_with_covariates(&g, "u", "t").unwrap();
        assert_eq!((m.ey0.lo, m.ey0.hi, m.ey1.lo, m.ey1.hi, m.crossed), (0.3, 0.7, 0.4, 0.7, false));
        assert!(matches!(
            marginal_bounds_with_covariates(&g, "u", "missing"),
            Err(RoyError::MissingCell { .. })
        ));
    }

    #[test]
    fn conditional_examples() {
        let mut g = CovariateGrid::new();
        g.insert("a", "b", q(0.2, 0.1, 0.3, 0.4));
        let c = conditional_bounds(&g, "a", "b").unwrap();
        assert_abs_diff_eq!(c.p_y1_given_y0_zero.lo, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.p_y1_given_y0_zero.hi, 4.0 / 7.0, epsilon = 1e-12);
        // b in [0.4, 0.7]: [(0.7-0.7)/0.3, (0.7-0.4)/0.6]
        assert_abs_diff_eq!(c.p_y0_given_y1_zero.hi, 0.5, epsilon = 1e-12);

        let mut g = CovariateGrid::new();
        g.insert("a", "b", q(0.0, 0.0, 0.5, 0.5));
        assert!(matches!(conditional_bounds(&g, "a", "b"), Err(RoyError::DegenerateConditioning { .. })));
    }

    #[test]
    fn conditional_constant_grid() {
        // q10 and P(Y=1) constant across the grid: endpoints use the fixed a-range
        let mut g = CovariateGrid::new();
        g.insert("u", "s", q(0.3, 0.1, 0.2, 0.4));
        g.insert("u", "t", q(0.2, 0.2, 0.2, 0.4));
        let c = conditional_bounds(&g, "u", "s").unwrap();
        let f = |a: f64| (0.6 - a) / (1.0 - a);
        assert_abs_diff_eq!(c.p_y1_given_y0_zero.lo, f(0.6), epsilon = 1e-12);
        assert_abs_diff_eq!(c.p_y1_given_y0_zero.hi, f(0.2), epsilon = 1e-12);
    }
}
