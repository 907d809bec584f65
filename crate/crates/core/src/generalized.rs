//! Generalized binary Roy model: selection is unrestricted, the instrument is
//! excluded from `(Y0, Y1)`.
//!
//! Everything here is a function of eight envelopes of the cell laws over the
//! instrument support (see [`InstrumentEnvelopes`]).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Result, RoyError};
use crate::probability::{polytope_extrema, InstrumentTable, IntervalBound, SimplexPolytope};

/// Infima and suprema of cell combinations over the instrument support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InstrumentEnvelopes {
    /// inf P(Y=1|z)
    pub inf_y1: f64,
    /// inf P(Y=0|z)
    pub inf_y0: f64,
    /// inf q10(z) + q01(z)
    pub inf_10_01: f64,
    /// inf q00(z) + q11(z)
    pub inf_00_11: f64,
    pub sup_10: f64,
    pub sup_00: f64,
    pub sup_11: f64,
    pub sup_01: f64,
}

pub fn envelopes(t: &InstrumentTable) -> InstrumentEnvelopes {
    let mut e = InstrumentEnvelopes {
        inf_y1: f64::INFINITY,
        inf_y0: f64::INFINITY,
        inf_10_01: f64::INFINITY,
        inf_00_11: f64::INFINITY,
        sup_10: f64::NEG_INFINITY,
        sup_00: f64::NEG_INFINITY,
        sup_11: f64::NEG_INFINITY,
        sup_01: f64::NEG_INFINITY,
    };
    for p in t.points() {
        let q = &p.cells;
        e.inf_y1 = e.inf_y1.min(q.q10 + q.q11);
        e.inf_y0 = e.inf_y0.min(q.q00 + q.q01);
        e.inf_10_01 = e.inf_10_01.min(q.q10 + q.q01);
        e.inf_00_11 = e.inf_00_11.min(q.q00 + q.q11);
        e.sup_10 = e.sup_10.max(q.q10);
        e.sup_00 = e.sup_00.max(q.q00);
        e.sup_11 = e.sup_11.max(q.q11);
        e.sup_01 = e.sup_01.max(q.q01);
    }
    e
}

/// Identified set of the joint law, intersected over `z`.
pub fn joint_polytope(t: &InstrumentTable) -> Result<SimplexPolytope> {
    let poly = joint_polytope_unchecked(t);
    if poly.is_feasible() {
        Ok(poly)
    } else {
        Err(RoyError::InfeasibleModel)
    }
}

pub(crate) fn joint_polytope_unchecked(t: &InstrumentTable) -> SimplexPolytope {
    let mut poly = SimplexPolytope::full();
    for p in t.points() {
        let q = &p.cells;
        poly.at_most([0.0, 0.0, 0.0, 1.0], q.q10 + q.q11)
            .at_most([1.0, 0.0, 0.0, 0.0], q.q00 + q.q01)
            .at_most([0.0, 0.0, 1.0, 0.0], q.q10 + q.q01)
            .at_most([0.0, 1.0, 0.0, 0.0], q.q00 + q.q11)
            .at_least([0.0, 0.0, 1.0, 1.0], q.q10)
            .at_most([0.0, 0.0, 1.0, 1.0], 1.0 - q.q00)
            .at_least([0.0, 1.0, 0.0, 1.0], q.q11)
            .at_most([0.0, 1.0, 0.0, 1.0], 1.0 - q.q01);
    }
    poly
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalBounds {
    pub ey0: IntervalBound,
    pub ey1: IntervalBound,
    pub ate: IntervalBound,
}

/// Marginal bounds without the emptiness check; crossed intervals pass through.
pub fn marginal_intervals(e: &InstrumentEnvelopes) -> MarginalBounds {
    let ey0 = IntervalBound::sharp(
        e.sup_10.max(1.0 - e.inf_y0 - e.inf_00_11),
        (1.0 - e.sup_00).min(e.inf_y1 + e.inf_10_01),
        "E[Y0]",
    );
    let ey1 = IntervalBound::sharp(
        e.sup_11.max(1.0 - e.inf_y0 - e.inf_10_01),
        (1.0 - e.sup_01).min(e.inf_y1 + e.inf_00_11),
        "E[Y1]",
    );
    let ate = IntervalBound::sharp(ey1.lo - ey0.hi, ey1.hi - ey0.lo, "E[Y1-Y0]");
    MarginalBounds { ey0, ey1, ate }
}

/// Sharp bounds on `E Y0`, `E Y1` and the ATE.
pub fn bp_marginal_bounds(e: &InstrumentEnvelopes) -> Result<MarginalBounds> {
    let m = marginal_intervals(e);
    for b in [&m.ey0, &m.ey1] {
        if b.is_empty() {
            return Err(RoyError::BoundsCross { quantity: b.label.clone(), lo: b.lo, hi: b.hi });
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenefitBounds {
    /// P(Y1 > Y0)
    pub strict: IntervalBound,
    /// P(Y1 >= Y0)
    pub weak: IntervalBound,
}

/// Identified set of the joint law written through the envelopes alone.
pub fn envelope_polytope(e: &InstrumentEnvelopes) -> SimplexPolytope {
    let mut poly = SimplexPolytope::full();
    poly.at_most([0.0, 0.0, 0.0, 1.0], e.inf_y1)
        .at_most([1.0, 0.0, 0.0, 0.0], e.inf_y0)
        .at_most([0.0, 0.0, 1.0, 0.0], e.inf_10_01)
        .at_most([0.0, 1.0, 0.0, 0.0], e.inf_00_11)
        .at_least([0.0, 0.0, 1.0, 1.0], e.sup_10)
        .at_most([0.0, 0.0, 1.0, 1.0], 1.0 - e.sup_00)
        .at_least([0.0, 1.0, 0.0, 1.0], e.sup_11)
        .at_most([0.0, 1.0, 0.0, 1.0], 1.0 - e.sup_01);
    poly
}

/// Envelope bounds on `P(Y1 > Y0)` and `P(Y1 >= Y0)` that bound each
/// representation of `p01` (resp. `p10`) separately.
pub fn benefit_closed_form(e: &InstrumentEnvelopes) -> BenefitBounds {
    let strict_lo = 0f64
        .max(1.0 - e.inf_y1 - e.inf_10_01 - e.inf_y0)
        .max(e.sup_00 - e.inf_y0)
        .max(e.sup_11 - e.inf_y1);
    // P(Y0 > Y1) = p10 by the mirrored argument
    let loss_lo = 0f64
        .max(1.0 - e.inf_y1 - e.inf_00_11 - e.inf_y0)
        .max(e.sup_01 - e.inf_y0)
        .max(e.sup_10 - e.inf_y1);
    BenefitBounds {
        strict: IntervalBound::new(strict_lo, e.inf_00_11, false, "P(Y1>Y0)").clamped(0.0, 1.0),
        weak: IntervalBound::new(1.0 - e.inf_10_01, 1.0 - loss_lo, false, "P(Y1>=Y0)").clamped(0.0, 1.0),
    }
}

/// Sharp bounds on `P(Y1 > Y0) = p01` and `P(Y1 >= Y0) = 1 - p10`. With
/// several instrument points the constraints interact, so the extrema are
/// taken over the joint identified set; when that set is empty the envelope
/// bounds of [`benefit_closed_form`] are returned.
pub fn benefit_bounds(e: &InstrumentEnvelopes) -> BenefitBounds {
    let poly = envelope_polytope(e);
    match (
        polytope_extrema(&poly, [0.0, 1.0, 0.0, 0.0]),
        polytope_extrema(&poly, [0.0, 0.0, 1.0, 0.0]),
    ) {
        (Ok(gain), Ok(loss)) => BenefitBounds {
            strict: IntervalBound::sharp(gain.lo, gain.hi, "P(Y1>Y0)").clamped(0.0, 1.0),
            weak: IntervalBound::sharp(1.0 - loss.hi, 1.0 - loss.lo, "P(Y1>=Y0)").clamped(0.0, 1.0),
        },
        _ => benefit_closed_form(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionCheck {
    pub z: String,
    pub p_d1: f64,
    pub lower: f64,
    pub upper: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionTestReport {
    pub checks: Vec<SelectionCheck>,
    pub violations: usize,
    /// max_z |P(Y=1|z) - P(Y=1)|
    pub outcome_instrument_gap: f64,
}

/// Testable implications of Roy selection: `P(Y1>Y0) <= P(D=1|z) <= P(Y1>=Y0)`
/// at every `z`, and `Y ⊥ Z`.
pub fn roy_selection_test(t: &InstrumentTable) -> SelectionTestReport {
    roy_selection_test_tol(t, 1e-12)
}

pub fn roy_selection_test_tol(t: &InstrumentTable, tol: f64) -> SelectionTestReport {
    let b = benefit_bounds(&envelopes(t));
    let checks: Vec<SelectionCheck> = t
        .points()
        .iter()
        .map(|p| {
            let p_d1 = p.cells.p_d1();
            SelectionCheck {
                z: p.label.clone(),
                p_d1,
                lower: b.strict.lo,
                upper: b.weak.hi,
                violated: p_d1 < b.strict.lo - tol || p_d1 > b.weak.hi + tol,
            }
        })
        .collect();
    SelectionTestReport {
        violations: checks.iter().filter(|c| c.violated).count(),
        checks,
        outcome_instrument_gap: crate::binary::outcome_instrument_gap(t),
    }
}

/// Upper bound on `P(Y1=1 | Y=0, D=0, Z=z)`.
pub fn regret_bound(t: &InstrumentTable, z: &str) -> Result<f64> {
    let p = t
        .get(z)
        .ok_or_else(|| RoyError::InvalidArgument(format!("unknown instrument value {z}")))?;
    if p.cells.q00 <= 1e-12 {
        return Err(RoyError::ZeroConditioningCell { z: z.into() });
    }
    Ok((envelopes(t).inf_00_11 / p.cells.q00).clamp(0.0, 1.0))
}

/// Bounds on `P(Y1=1 | Y0=0)`.
pub fn mobility_bounds(e: &InstrumentEnvelopes) -> Result<IntervalBound> {
    let m = marginal_intervals(e);
    let b = benefit_closed_form(e);
    let den_hi = 1.0 - m.ey0.hi;
    if den_hi <= 1e-9 {
        return Err(RoyError::DegenerateDenominator { value: den_hi });
    }
    let lo = b.strict.lo / (1.0 - m.ey0.lo);
    let hi = e.inf_00_11 / den_hi;
    Ok(IntervalBound::new(lo, hi, false, "P(Y1=1|Y0=0)").clamped(0.0, 1.0))
}

fn att_side(
    t: &InstrumentTable,
    d: u8,
    lo_ref: f64,
    hi_ref: f64,
    label: &str,
) -> Result<IntervalBound> {
    let (mut lo, mut hi) = (0.0, 0.0);
    for p in t.points() {
        let pd = if d == 1 { p.cells.p_d1() } else { p.cells.p_d0() };
        if pd <= 1e-12 {
            return Err(RoyError::ZeroSectorProbability { d, z: p.label.clone() });
        }
        let py1 = p.cells.p_y1();
        lo += p.weight * (py1 - hi_ref) / pd;
        hi += p.weight * (py1 - lo_ref) / pd;
    }
    Ok(IntervalBound::new(lo, hi, false, label).clamped(-1.0, 1.0))
}

/// `E(Y1 - Y0 | D=1)` given bounds `[l0, u0]` on `E Y0`.
pub fn att1_from(t: &InstrumentTable, l0: f64, u0: f64) -> Result<IntervalBound> {
    att_side(t, 1, l0, u0, "E[Y1-Y0|D=1]")
}

/// `E(Y0 - Y1 | D=0)` given bounds `[l1, u1]` on `E Y1`.
pub fn att0_from(t: &InstrumentTable, l1: f64, u1: f64) -> Result<IntervalBound> {
    att_side(t, 0, l1, u1, "E[Y0-Y1|D=0]")
}

pub fn att_bounds(t: &InstrumentTable) -> Result<(IntervalBound, IntervalBound)> {
    let m = bp_marginal_bounds(&envelopes(t))?;
    Ok((att1_from(t, m.ey0.lo, m.ey0.hi)?, att0_from(t, m.ey1.lo, m.ey1.hi)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizedBounds {
    pub envelopes: InstrumentEnvelopes,
    pub joint_polytope: SimplexPolytope,
    pub ey0: IntervalBound,
    pub ey1: IntervalBound,
    pub ate: IntervalBound,
    pub benefit_strict: IntervalBound,
    pub benefit_weak: IntervalBound,
    pub mobility: Option<IntervalBound>,
    pub att1: Option<IntervalBound>,
    pub att0: Option<IntervalBound>,
    pub regret_by_z: BTreeMap<String, Option<f64>>,
}

/// All generalized-model bounds for a table. Quantities whose conditioning
/// event has zero probability are `None`.
pub fn generalized_bounds(t: &InstrumentTable) -> Result<GeneralizedBounds> {
    let e = envelopes(t);
    let joint = joint_polytope(t)?;
    let m = bp_marginal_bounds(&e)?;
    let b = benefit_bounds(&e);
    Ok(GeneralizedBounds {
        envelopes: e,
        joint_polytope: joint,
        mobility: mobility_bounds(&e).ok(),
        att1: att1_from(t, m.ey0.lo, m.ey0.hi).ok(),
        att0: att0_from(t, m.ey1.lo, m.ey1.hi).ok(),
        regret_by_z: t
            .points()
            .iter()
            .map(|p| (p.label.clone(), regret_bound(t, &p.label).ok()))
            .collect(),
        ey0: m.ey0,
        ey1: m.ey1,
        ate: m.ate,
        benefit_strict: b.strict,
        benefit_weak: b.weak,
    })
}
