use crate::error::{Result, RoyError};

use super::sample::OutcomeSample;

/// Slack when comparing a step function value with a target level.
const LEVEL_TOL: f64 = 1e-12;

/// Empirical sub-distribution functions of `(Y, D)`.
///
/// Step functions jump at the distinct observed outcomes. Inverses follow
/// `G⁻¹(u) = inf{y : G(y) >= u}`, returning `-inf` when `G(-inf) >= u` and
/// `+inf` when `G` never reaches `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubCdf {
    ys: Vec<f64>,
    cum: [Vec<f64>; 2],
    mass: [f64; 2],
}

pub fn build_subcdf(s: &OutcomeSample) -> Result<SubCdf> {
    SubCdf::from_sorted(s.records().iter().map(|r| (r.y, r.d, r.weight)))
}

impl SubCdf {
    /// Build from `(y, d, weight)` triples already sorted by `y`.
    pub fn from_sorted(items: impl IntoIterator<Item = (f64, u8, f64)>) -> Result<Self> {
        let mut ys: Vec<f64> = Vec::new();
        let mut raw: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        let mut acc = [0.0f64; 2];
        let mut total = 0.0;
        for (y, d, w) in items {
            if ys.last() != Some(&y) {
                if let Some(&prev) = ys.last() {
                    debug_assert!(prev < y, "input must be sorted");
                }
                ys.push(y);
                raw[0].push(acc[0]);
                raw[1].push(acc[1]);
            }
            acc[d as usize] += w;
            total += w;
            let last = ys.len() - 1;
            raw[0][last] = acc[0];
            raw[1][last] = acc[1];
        }
        if ys.is_empty() || !(total > 0.0) {
            return Err(RoyError::EmptySample);
        }
        let cum = raw.map(|v| v.into_iter().map(|x| x / total).collect::<Vec<f64>>());
        let mass = [acc[0] / total, acc[1] / total];
        Ok(SubCdf { ys, cum, mass })
    }

    /// Distinct observed outcomes.
    pub fn jump_points(&self) -> &[f64] {
        &self.ys
    }

    /// Outcomes observed in sector `d`.
    pub fn sector_jump_points(&self, d: u8) -> Vec<f64> {
        let c = &self.cum[d as usize];
        self.ys
            .iter()
            .enumerate()
            .filter(|&(i, _)| c[i] > if i == 0 { 0.0 } else { c[i - 1] })
            .map(|(_, &y)| y)
            .collect()
    }

    /// P(D = d)
    pub fn p_d(&self, d: u8) -> f64 {
        self.mass[d as usize]
    }

    /// Number of jump points at or below `y`.
    fn rank(&self, y: f64) -> usize {
        self.ys.partition_point(|&v| v <= y)
    }

    /// Number of jump points strictly below `y`.
    fn rank_strict(&self, y: f64) -> usize {
        self.ys.partition_point(|&v| v < y)
    }

    fn cum_at(&self, d: usize, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.cum[d][k - 1]
        }
    }

    /// `F̲_d(y) = P(Y <= y, D = d)`
    pub fn lower(&self, d: u8, y: f64) -> f64 {
        self.cum_at(d as usize, self.rank(y))
    }

    /// `P(Y < y, D = d)`
    pub fn lower_before(&self, d: u8, y: f64) -> f64 {
        self.cum_at(d as usize, self.rank_strict(y))
    }

    /// `F̄_d(y) = F̲_d(y) + P(D = 1-d)`
    pub fn upper(&self, d: u8, y: f64) -> f64 {
        self.lower(d, y) + self.p_d(1 - d)
    }

    /// `F(y) = P(Y <= y)`
    pub fn f(&self, y: f64) -> f64 {
        let k = self.rank(y);
        self.cum_at(0, k) + self.cum_at(1, k)
    }

    /// Generalized inverse of a step function given by its value at `-inf`
    /// and at each jump point.
    fn inverse(&self, base: f64, at: impl Fn(usize) -> f64, u: f64) -> f64 {
        if base >= u - LEVEL_TOL {
            return f64::NEG_INFINITY;
        }
        let (mut i, mut j) = (0, self.ys.len());
        while i < j {
            let mid = (i + j) / 2;
            if at(mid) < u - LEVEL_TOL {
                i = mid + 1;
            } else {
                j = mid;
            }
        }
        if i == self.ys.len() {
            f64::INFINITY
        } else {
            self.ys[i]
        }
    }

    pub fn inv_f(&self, u: f64) -> f64 {
        self.inverse(0.0, |i| self.cum[0][i] + self.cum[1][i], u)
    }

    pub fn inv_lower(&self, d: u8, u: f64) -> f64 {
        let c = &self.cum[d as usize];
        self.inverse(0.0, |i| c[i], u)
    }

    pub fn inv_upper(&self, d: u8, u: f64) -> f64 {
        let c = &self.cum[d as usize];
        let other = self.p_d(1 - d);
        self.inverse(other, |i| c[i] + other, u)
    }

    /// Quantile of `Y | D = d`.
    pub fn conditional_quantile(&self, d: u8, q: f64) -> f64 {
        self.inv_lower(d, q * self.p_d(d))
    }

    /// `P(Y <= y | D = d)`
    pub fn conditional_cdf(&self, d: u8, y: f64) -> f64 {
        self.lower(d, y) / self.p_d(d)
    }
}
