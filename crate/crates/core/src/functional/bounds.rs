use crate::error::{Result, RoyError};
use crate::probability::IntervalBound;

use super::sets::{upper_lower_sets, Interval, IntervalUnion, RectUnion};
use super::subcdf::SubCdf;

/// Pointwise bounds `F(y) <= F_d(y) <= F̄_d(y)`.
pub fn peterson_bounds(c: &SubCdf, d: u8, y: f64) -> IntervalBound {
    IntervalBound::sharp(c.f(y), c.upper(d, y), format!("P(Y{d}<=y) pointwise"))
}

/// Lower bound on `P(y1 < Y_d <= y2)`; `y1` may be `-inf` and `y2` `+inf`.
pub fn interval_lower_bound(c: &SubCdf, d: u8, y1: f64, y2: f64) -> Result<f64> {
    if !(y1 < y2) {
        return Err(RoyError::BadInterval { y1, y2 });
    }
    let own = c.lower(d, y2) - c.lower(d, y1);
    let other = if y1 == f64::NEG_INFINITY { c.lower(1 - d, y2) } else { 0.0 };
    Ok(own + other)
}

impl SubCdf {
    /// `P(Y ∈ I, D = d)`
    pub fn sector_mass(&self, d: u8, i: &Interval) -> f64 {
        if i.is_empty() {
            return 0.0;
        }
        let top = if i.hi == f64::INFINITY {
            self.p_d(d)
        } else if i.hi_closed {
            self.lower(d, i.hi)
        } else {
            self.lower_before(d, i.hi)
        };
        let bottom = if i.lo == f64::NEG_INFINITY {
            0.0
        } else if i.lo_closed {
            self.lower_before(d, i.lo)
        } else {
            self.lower(d, i.lo)
        };
        (top - bottom).max(0.0)
    }

    pub fn sector_mass_union(&self, d: u8, u: &IntervalUnion) -> f64 {
        u.parts().iter().map(|i| self.sector_mass(d, i)).sum()
    }
}

/// Bounds on `P((Y0, Y1) ∈ A)` for a rectangle union `A`.
pub fn joint_set_bounds(c: &SubCdf, a: &RectUnion) -> IntervalBound {
    let s = upper_lower_sets(a);
    let lo = c.sector_mass_union(0, &s.l0) + c.sector_mass_union(1, &s.l1);
    let hi = c.sector_mass_union(0, &s.u0) + c.sector_mass_union(1, &s.u1);
    IntervalBound::sharp(lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0), "P((Y0,Y1) in A)")
}

/// Upper bound on `P(y01 < Y0 <= y02, y11 < Y1 <= y12)` from combining the
/// pointwise joint bounds; assumes `y12 > y01` and `y02 > y11`.
pub fn peterson_rectangle_upper(c: &SubCdf, y01: f64, y02: f64, y11: f64, y12: f64) -> f64 {
    c.sector_mass(0, &Interval::left_open(y11, y02)) + c.sector_mass(1, &Interval::left_open(y01, y12))
}

/// Upper bound on `P(Y1 > y | Y0 <= y)`.
pub fn mobility_upper(c: &SubCdf, y: f64) -> Result<f64> {
    let den = c.upper(0, y);
    if den <= 1e-12 {
        return Err(RoyError::DegenerateDenominator { value: den });
    }
    let num = c.p_d(1) - c.lower(1, y);
    Ok((num / den).clamp(0.0, 1.0))
}
