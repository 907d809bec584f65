use serde::Serialize;

use crate::error::{Result, RoyError};
use crate::probability::IntervalBound;

use super::subcdf::SubCdf;

fn check_quantiles(q1: f64, q2: f64) -> Result<()> {
    if 0.0 < q1 && q1 < q2 && q2 < 1.0 {
        Ok(())
    } else {
        Err(RoyError::QuantileOutOfRange { q1, q2 })
    }
}

/// Largest interquantile range of `Y_d` with `q1`-quantile at `y` that the
/// functional bounds allow.
pub fn iqr_objective(c: &SubCdf, d: u8, q1: f64, q2: f64, y: f64) -> f64 {
    let top = c.inv_f(q2) - y;
    let slope = c.inv_lower(d, q2 - q1 + c.lower(d, y)) - y;
    top.min(slope)
}

/// Sharp bounds on `F_d⁻¹(q2) - F_d⁻¹(q1)`. The upper endpoint is `+inf` when
/// the `q1`-quantile of `Y_d` is not bounded below.
pub fn iqr_bounds(c: &SubCdf, d: u8, q1: f64, q2: f64) -> Result<IntervalBound> {
    check_quantiles(q1, q2)?;
    let lo = (c.inv_upper(d, q2) - c.inv_f(q1)).max(0.0);
    let y_lo = c.inv_upper(d, q1);
    let y_hi = c.inv_f(q1);
    let hi = if y_lo == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        let mut best = iqr_objective(c, d, q1, q2, y_lo).max(iqr_objective(c, d, q1, q2, y_hi));
        for y in c.sector_jump_points(d) {
            if y >= y_lo && y <= y_hi {
                best = best.max(iqr_objective(c, d, q1, q2, y));
            }
        }
        best.max(lo)
    };
    Ok(IntervalBound::sharp(lo, hi, format!("IQR of Y{d} at ({q1}, {q2})")))
}

/// Interquantile range of `Y | D = d`.
pub fn observed_iqr(c: &SubCdf, d: u8, q1: f64, q2: f64) -> Result<f64> {
    check_quantiles(q1, q2)?;
    if c.p_d(d) <= 0.0 {
        return Err(RoyError::EmptySector { d });
    }
    Ok(c.conditional_quantile(d, q2) - c.conditional_quantile(d, q1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop1Report {
    pub sector: u8,
    /// `P(Y<=y|D=d) <= P(Y<=y|D=1-d)` at every jump point.
    pub sector_dominates: bool,
    /// `P(Y<=y|D=1-d) <= P(Y<=y|D=d)` at every jump point. Under this ordering
    /// the observed law of `Y | D=d` is itself admissible for `Y_d`.
    pub other_sector_dominates: bool,
    pub observed_iqr: f64,
    pub bounds: IntervalBound,
    /// Observed IQR strictly above every admissible potential IQR.
    pub selection_increases_inequality: bool,
}

/// Compare the observed spread in sector `d` with the bounds on the spread of `Y_d`.
pub fn proposition1_check(c: &SubCdf, d: u8, q1: f64, q2: f64) -> Result<Prop1Report> {
    let observed = observed_iqr(c, d, q1, q2)?;
    let bounds = iqr_bounds(c, d, q1, q2)?;
    let (mut fwd, mut back) = (true, true);
    if c.p_d(1 - d) > 0.0 {
        for &y in c.jump_points() {
            let own = c.conditional_cdf(d, y);
            let other = c.conditional_cdf(1 - d, y);
            fwd &= own <= other + 1e-12;
            back &= other <= own + 1e-12;
        }
    }
    Ok(Prop1Report {
        sector: d,
        sector_dominates: fwd,
        other_sector_dominates: back,
        observed_iqr: observed,
        selection_increases_inequality: observed > bounds.hi + 1e-12,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{build_subcdf, OutcomeSample};

    fn cdf(pts: &[(f64, u8)]) -> SubCdf {
        build_subcdf(&OutcomeSample::from_pairs(pts).unwrap()).unwrap()
    }

    #[test]
    fn one_sector_point_identified() {
        let pts: Vec<(f64, u8)> = (0..40).map(|i| ((i * 13 % 40) as f64, 1)).collect();
        let c = cdf(&pts);
        let b = iqr_bounds(&c, 1, 0.25, 0.75).unwrap();
        let obs = c.inv_f(0.75) - c.inv_f(0.25);
        assert_eq!((b.lo, b.hi), (obs, obs));
    }

    #[test]
    fn collapsing_quantiles() {
        let pts: Vec<(f64, u8)> = (0..20).map(|i| (i as f64 * 0.37 % 5.0, (i % 3 != 0) as u8)).collect();
        let c = cdf(&pts);
        let b = iqr_bounds(&c, 1, 0.5, 0.5 + 1e-9).unwrap();
        assert!(c.inv_upper(1, 0.5) - c.inv_f(0.5) <= 0.0);
        assert_eq!(b.lo, 0.0);
    }

    #[test]
    fn unbounded_when_q1_below_other_mass() {
        let pts: Vec<(f64, u8)> = (0..10).map(|i| (i as f64, (i % 2) as u8)).collect();
        let b = iqr_bounds(&cdf(&pts), 1, 0.25, 0.75).unwrap();
        assert_eq!(b.hi, f64::INFINITY);
        assert!(matches!(iqr_bounds(&cdf(&pts), 1, 0.6, 0.5), Err(RoyError::QuantileOutOfRange { .. })));
    }

    #[test]
    fn prop1_construction_exceeds_bound() {
        // sector 0 sits entirely below sector 1's upper tail
        let mut pts: Vec<(f64, u8)> = (0..20).map(|i| (i as f64 / 20.0, 0)).collect();
        pts.extend((0..55).map(|i| (i as f64 / 55.0 + 0.001, 1)));
        pts.extend((0..25).map(|i| (10.0 + i as f64 / 2.5, 1)));
        let c = cdf(&pts);
        let r = proposition1_check(&c, 1, 0.25, 0.75).unwrap();
        assert!(r.selection_increases_inequality, "{r:?}");
        assert!(r.sector_dominates && !r.other_sector_dominates);
    }

    #[test]
    fn prop1_equal_sectors() {
        let pts: Vec<(f64, u8)> = (0..40).map(|i| ((i / 2) as f64, (i % 2) as u8)).collect();
        let r = proposition1_check(&cdf(&pts), 0, 0.25, 0.75).unwrap();
        assert!(r.sector_dominates && r.other_sector_dominates);
        let shifted: Vec<(f64, u8)> = (0..40).map(|i| ((i / 2) as f64 + (i % 2) as f64 * 0.5, (i % 2) as u8)).collect();
        let r = proposition1_check(&cdf(&shifted), 0, 0.25, 0.75).unwrap();
        assert!(r.sector_dominates != r.other_sector_dominates);
        assert!(matches!(
            proposition1_check(&cdf(&[(1.0, 1)]), 0, 0.25, 0.75),
            Err(RoyError::EmptySector { d: 0 })
        ));
    }
}
