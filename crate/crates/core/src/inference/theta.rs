use rand::Rng;
use serde::Serialize;

use crate::error::{Result, RoyError};
use crate::functional::OutcomeSample;
use crate::generalized::{att0_from, att1_from, benefit_bounds, marginal_intervals, mobility_bounds, InstrumentEnvelopes};
use crate::probability::{CellProbs, InstrumentPoint, InstrumentTable};
use crate::{par, rng};

/// Cell weights of one instrument stratum, `(cell, weight)` per record.
#[derive(Debug, Clone, PartialEq)]
struct Stratum {
    label: String,
    obs: Vec<(usize, f64)>,
}

/// `θ1..θ8` per instrument value: `P(Y=1)`, `P(Y=0)`, `q10+q01`, `q00+q11`,
/// `q10`, `q00`, `q11`, `q01`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaVector {
    pub labels: Vec<String>,
    /// Estimated `P(Z = z)`.
    pub weights: Vec<f64>,
    /// Kish effective sample size per stratum.
    pub n_eff: Vec<f64>,
    pub theta: Vec<[f64; 8]>,
    pub se: Vec<[f64; 8]>,
    #[serde(skip)]
    strata: Vec<Stratum>,
}

fn theta_of(q: [f64; 4]) -> [f64; 8] {
    let [q00, q01, q10, q11] = q;
    [q10 + q11, q00 + q01, q10 + q01, q00 + q11, q10, q00, q11, q01]
}

fn cells_of(obs: &[(usize, f64)], pick: impl Iterator<Item = usize>) -> [f64; 4] {
    let mut c = [0.0; 4];
    let mut w = 0.0;
    for i in pick {
        let (cell, wt) = obs[i];
        c[cell] += wt;
        w += wt;
    }
    c.map(|v| v / w)
}

pub fn estimate_theta(s: &OutcomeSample) -> Result<ThetaVector> {
    if !s.is_binary() {
        return Err(RoyError::InvalidData("cell estimation needs a 0/1 outcome".into()));
    }
    let mut out = ThetaVector { labels: vec![], weights: vec![], n_eff: vec![], theta: vec![], se: vec![], strata: vec![] };
    for (label, rs) in s.groups() {
        if rs.is_empty() {
            return Err(RoyError::EmptyInstrumentCell { z: label });
        }
        let obs: Vec<(usize, f64)> = rs.iter().map(|r| (2 * r.y as usize + r.d as usize, r.weight)).collect();
        let w: f64 = obs.iter().map(|o| o.1).sum();
        let w2: f64 = obs.iter().map(|o| o.1 * o.1).sum();
        let n_eff = w * w / w2;
        let th = theta_of(cells_of(&obs, 0..obs.len()));
        out.se.push(th.map(|t| (t * (1.0 - t)).max(0.0).sqrt() / n_eff.sqrt()));
        out.theta.push(th);
        out.n_eff.push(n_eff);
        out.weights.push(w / s.total_weight());
        out.labels.push(label.clone());
        out.strata.push(Stratum { label, obs });
    }
    Ok(out)
}

impl ThetaVector {
    /// Estimated cell table.
    pub fn table(&self) -> Result<InstrumentTable> {
        let points = self
            .labels
            .iter()
            .zip(&self.theta)
            .zip(&self.weights)
            .map(|((l, t), &w)| {
                Ok(InstrumentPoint { label: l.clone(), cells: CellProbs::new(t[5], t[7], t[4], t[6])?, weight: w })
            })
            .collect::<Result<Vec<_>>>()?;
        InstrumentTable::new(points)
    }

    /// Bootstrap replicate of the per-stratum cells, resampling within strata.
    fn replicate_cells(&self, g: &mut rand_chacha::ChaCha8Rng) -> Vec<[f64; 4]> {
        self.strata
            .iter()
            .map(|s| {
                let n = s.obs.len();
                let picks: Vec<usize> = (0..n).map(|_| g.gen_range(0..n)).collect();
                cells_of(&s.obs, picks.into_iter())
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalValue {
    pub k: f64,
    pub level: f64,
    pub bootstrap: usize,
    pub seed: u64,
    pub method: &'static str,
}

/// `ceil(level * n)`-th smallest of `v`.
pub fn order_statistic(v: &mut [f64], level: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let r = ((level * n as f64).ceil() as usize).clamp(1, n);
    v[r - 1]
}

/// Critical value over the moments `which` (0-based indices into `θ1..θ8`).
pub fn critical_value_moments(t: &ThetaVector, which: &[usize], level: f64, b: usize, seed: u64) -> Result<CriticalValue> {
    if !(level > 0.0 && level < 1.0) {
        return Err(RoyError::InvalidArgument(format!("level {level} must lie in (0, 1)")));
    }
    if b < 100 {
        return Err(RoyError::InvalidArgument(format!("need at least 100 bootstrap replications, got {b}")));
    }
    let mut stats = par::map_range(b, |rep| {
        let mut g = rng::stream(seed, rng::BOOT_THETA, rep as u64);
        let cells = t.replicate_cells(&mut g);
        let mut m = f64::NEG_INFINITY;
        for (z, c) in cells.iter().enumerate() {
            let star = theta_of(*c);
            for &i in which {
                let s = t.se[z][i];
                if s > 0.0 {
                    let dev = if i < 4 { t.theta[z][i] - star[i] } else { star[i] - t.theta[z][i] };
                    m = m.max(dev / s);
                }
            }
        }
        m
    });
    let k = order_statistic(&mut stats, level).max(0.0);
    Ok(CriticalValue { k, level, bootstrap: b, seed, method: "studentized max-statistic bootstrap, stratified by instrument" })
}

pub fn critical_value(t: &ThetaVector, level: f64, b: usize, seed: u64) -> Result<CriticalValue> {
    critical_value_moments(t, &[0, 1, 2, 3, 4, 5, 6, 7], level, b, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    #[serde(with = "crate::extf64")]
    pub lo: f64,
    #[serde(with = "crate::extf64")]
    pub hi: f64,
    /// Endpoints crossed: the data reject the model at this level.
    pub empty: bool,
}

impl ConfidenceInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        ConfidenceInterval { lo, hi, empty: lo > hi }
    }

    fn clamped(lo: f64, hi: f64, min: f64, max: f64) -> Self {
        Self::new(lo.clamp(min, max), hi.clamp(min, max))
    }

    pub fn covers(&self, lo: f64, hi: f64, tol: f64) -> bool {
        !self.empty && self.lo <= lo + tol && self.hi >= hi - tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiReport {
    pub level: f64,
    pub k: f64,
    pub ey0: ConfidenceInterval,
    pub ey1: ConfidenceInterval,
    pub ate: ConfidenceInterval,
    pub benefit_strict: ConfidenceInterval,
    pub benefit_weak: ConfidenceInterval,
    pub mobility: Option<ConfidenceInterval>,
}

/// Envelopes with infima inflated and suprema deflated by `k` standard errors.
fn inflated_envelopes(t: &ThetaVector, k: f64) -> InstrumentEnvelopes {
    let inf = |i: usize| t.theta.iter().zip(&t.se).map(|(th, s)| th[i] + k * s[i]).fold(f64::INFINITY, f64::min);
    let sup = |i: usize| t.theta.iter().zip(&t.se).map(|(th, s)| th[i] - k * s[i]).fold(f64::NEG_INFINITY, f64::max);
    InstrumentEnvelopes {
        inf_y1: inf(0),
        inf_y0: inf(1),
        inf_10_01: inf(2),
        inf_00_11: inf(3),
        sup_10: sup(4),
        sup_00: sup(5),
        sup_11: sup(6),
        sup_01: sup(7),
    }
}

pub fn assemble_cis(t: &ThetaVector, cv: &CriticalValue) -> CiReport {
    let e = inflated_envelopes(t, cv.k);
    let m = marginal_intervals(&e);
    let b = benefit_bounds(&e);
    let ey0 = ConfidenceInterval::clamped(m.ey0.lo, m.ey0.hi, 0.0, 1.0);
    let ey1 = ConfidenceInterval::clamped(m.ey1.lo, m.ey1.hi, 0.0, 1.0);
    let ate = ConfidenceInterval::clamped(ey1.lo - ey0.hi, ey1.hi - ey0.lo, -1.0, 1.0);
    CiReport {
        level: cv.level,
        k: cv.k,
        ey0,
        ey1,
        ate,
        benefit_strict: ConfidenceInterval::clamped(b.strict.lo, b.strict.hi, 0.0, 1.0),
        benefit_weak: ConfidenceInterval::clamped(b.weak.lo, b.weak.hi, 0.0, 1.0),
        mobility: mobility_bounds(&e).ok().map(|v| ConfidenceInterval::clamped(v.lo, v.hi, 0.0, 1.0)),
    }
}

fn table_from_cells(t: &ThetaVector, cells: &[[f64; 4]]) -> Result<InstrumentTable> {
    let points = cells
        .iter()
        .zip(&t.labels)
        .zip(&t.weights)
        .map(|((c, l), &w)| Ok(InstrumentPoint { label: l.clone(), cells: CellProbs::new(c[0], c[1], c[2], c[3])?, weight: w }))
        .collect::<Result<Vec<_>>>()?;
    InstrumentTable::new(points)
}

/// Percentile bootstrap of the plug-in endpoints with `[l, u]` held fixed;
/// each tail gets half of `1 - level`.
fn att_ci(
    t: &ThetaVector,
    l: f64,
    u: f64,
    level: f64,
    b: usize,
    seed: u64,
    side: impl Fn(&InstrumentTable, f64, f64) -> Result<crate::probability::IntervalBound> + Sync + Send,
) -> Result<ConfidenceInterval> {
    side(&t.table()?, l, u)?;
    let reps: Vec<(f64, f64)> = par::map_range(b, |rep| {
        let mut g = rng::stream(seed, rng::BOOT_THETA, (1u64 << 32) + rep as u64);
        let cells = t.replicate_cells(&mut g);
        table_from_cells(t, &cells)
            .and_then(|tb| side(&tb, l, u))
            .map(|v| (v.lo, v.hi))
            .unwrap_or((f64::NAN, f64::NAN))
    })
    .into_iter()
    .filter(|(a, _)| !a.is_nan())
    .collect();
    if reps.is_empty() {
        return Err(RoyError::InvalidArgument("every bootstrap replicate hit an empty sector".into()));
    }
    let tail = (1.0 - level) / 2.0;
    let mut los: Vec<f64> = reps.iter().map(|r| -r.0).collect();
    let mut his: Vec<f64> = reps.iter().map(|r| r.1).collect();
    let lo = -order_statistic(&mut los, 1.0 - tail);
    let hi = order_statistic(&mut his, 1.0 - tail);
    Ok(ConfidenceInterval::clamped(lo, hi, -1.0, 1.0))
}

/// Confidence interval for `E(Y1 - Y0 | D=1)` given a confidence interval for `E Y0`.
pub fn att1_ci(t: &ThetaVector, ey0: &ConfidenceInterval, level: f64, b: usize, seed: u64) -> Result<ConfidenceInterval> {
    att_ci(t, ey0.lo, ey0.hi, level, b, seed, |tb, l, u| att1_from(tb, l, u))
}

/// Confidence interval for `E(Y0 - Y1 | D=0)` given a confidence interval for `E Y1`.
pub fn att0_ci(t: &ThetaVector, ey1: &ConfidenceInterval, level: f64, b: usize, seed: u64) -> Result<ConfidenceInterval> {
    att_ci(t, ey1.lo, ey1.hi, level, b, seed.wrapping_add(1), |tb, l, u| att0_from(tb, l, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::Record;
    use crate::generalized::{att_bounds, bp_marginal_bounds, envelopes};
    use statrs::distribution::{ContinuousCDF, Normal};

    fn tiny() -> OutcomeSample {
        OutcomeSample::new(vec![
            Record::new(1.0, 1).with_z("z1"),
            Record::new(0.0, 0).with_z("z1"),
            Record::new(1.0, 0).with_z("z2"),
            Record::new(0.0, 1).with_z("z2"),
        ])
        .unwrap()
    }

    fn sample(n: usize, seed: u64) -> OutcomeSample {
        let mut g = rng::stream(seed, rng::DESIGN, 0);
        let recs = (0..n)
            .map(|i| {
                let z = if i % 2 == 0 { "a" } else { "b" };
                let d = (g.gen::<f64>() < if z == "a" { 0.6 } else { 0.4 }) as u8;
                let y = (g.gen::<f64>() < 0.5 + 0.1 * d as f64) as u8 as f64;
                Record::new(y, d).with_z(z)
            })
            .collect();
        OutcomeSample::new(recs).unwrap()
    }

    #[test]
    fn counting() {
        let t = estimate_theta(&tiny()).unwrap();
        assert_eq!(t.theta[0][6], 0.5);
        assert_eq!(t.theta[1][4], 0.5);
        assert_eq!((t.theta[0][0], t.theta[1][0]), (0.5, 0.5));
        for th in &t.theta {
            assert!((th[0] + th[1] - 1.0).abs() < 1e-15);
            assert!((th[4] + th[5] + th[6] + th[7] - 1.0).abs() < 1e-15);
        }
        let same = OutcomeSample::new(vec![Record::new(1.0, 1); 5]).unwrap();
        assert!(estimate_theta(&same).unwrap().se[0].iter().all(|&s| s == 0.0));
    }

    #[test]
    fn single_moment_is_normal_quantile() {
        let s = OutcomeSample::new(
            (0..4000).map(|i| Record::new((i % 10 < 4) as u8 as f64, (i % 7 < 3) as u8)).collect(),
        )
        .unwrap();
        let t = estimate_theta(&s).unwrap();
        let cv = critical_value_moments(&t, &[0], 0.95, 2000, 3).unwrap();
        let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.95);
        assert!((cv.k - z).abs() < 0.15, "{} vs {z}", cv.k);
        let all = critical_value(&t, 0.95, 2000, 3).unwrap();
        assert!(all.k >= cv.k);
        assert_eq!(critical_value(&t, 0.95, 200, 9).unwrap(), critical_value(&t, 0.95, 200, 9).unwrap());
    }

    #[test]
    fn zero_and_huge_inflation() {
        let s = sample(2000, 1);
        let t = estimate_theta(&s).unwrap();
        let mut cv = critical_value(&t, 0.95, 100, 1).unwrap();
        cv.k = 0.0;
        let r = assemble_cis(&t, &cv);
        let m = bp_marginal_bounds(&envelopes(&t.table().unwrap())).unwrap();
        assert!((r.ey0.lo - m.ey0.lo).abs() < 1e-12 && (r.ey0.hi - m.ey0.hi).abs() < 1e-12);
        assert!((r.ey1.lo - m.ey1.lo).abs() < 1e-12 && (r.ey1.hi - m.ey1.hi).abs() < 1e-12);
        cv.k = 1e6;
        let r = assemble_cis(&t, &cv);
        assert_eq!((r.ey0.lo, r.ey0.hi), (0.0, 1.0));
        assert_eq!((r.ate.lo, r.ate.hi), (-1.0, 1.0));
    }

    #[test]
    fn att_contains_plug_in() {
        let s = sample(3000, 2);
        let t = estimate_theta(&s).unwrap();
        let (a1, _) = att_bounds(&t.table().unwrap()).unwrap();
        let mut cv = critical_value(&t, 0.95, 100, 1).unwrap();
        cv.k = 0.0;
        let r = assemble_cis(&t, &cv);
        let ci = att1_ci(&t, &r.ey0, 0.95, 500, 4).unwrap();
        assert!(ci.lo <= a1.lo && ci.hi >= a1.hi, "{ci:?} {a1:?}");
        let ones = OutcomeSample::new(vec![Record::new(1.0, 1), Record::new(0.0, 1)]).unwrap();
        let t1 = estimate_theta(&ones).unwrap();
        let e = ConfidenceInterval::new(0.0, 1.0);
        assert!(matches!(att0_ci(&t1, &e, 0.95, 100, 1), Err(RoyError::ZeroSectorProbability { d: 0, .. })));
    }

    #[test]
    fn monotone_in_level() {
        let s = sample(1500, 3);
        let t = estimate_theta(&s).unwrap();
        let a = assemble_cis(&t, &critical_value(&t, 0.95, 300, 5).unwrap());
        let b = assemble_cis(&t, &critical_value(&t, 0.99, 300, 5).unwrap());
        assert!(b.ey0.lo <= a.ey0.lo && b.ey0.hi >= a.ey0.hi);
    }
}
