use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::binary::CovariateGrid;
use crate::error::{Result, RoyError};
use crate::functional::SubCdf;
use crate::probability::{CellProbs, PotentialJoint};
use crate::{par, rng};

/// One simulated unit. `z` indexes the instrument level (0 when absent).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub y0: f64,
    pub y1: f64,
    pub y: f64,
    pub d: u8,
    pub z: usize,
}

impl Draw {
    pub fn new(y0: f64, y1: f64, d: u8, z: usize) -> Self {
        let y = if d == 1 { y1 } else { y0 };
        Draw { y0, y1, y, d, z }
    }

    /// Sector choice never contradicts the potential outcomes.
    pub fn is_roy(&self) -> bool {
        let consistent = self.y == if self.d == 1 { self.y1 } else { self.y0 };
        let selected = if self.d == 1 { self.y1 >= self.y0 } else { self.y0 >= self.y1 };
        consistent && selected
    }
}

const CHUNK: usize = 8192;

/// Draw `n` uniforms and map them. With `stratified`, the `i`-th uniform is
/// `(i + V_i) / n`.
fn draw_uniforms<F>(n: usize, seed: u64, stratified: bool, map: F) -> Vec<Draw>
where
    F: Fn(f64) -> Draw + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    par::map_range(chunks, |c| {
        let mut g = rng::stream(seed, rng::WITNESS, c as u64);
        let start = c * CHUNK;
        let end = (start + CHUNK).min(n);
        (start..end)
            .map(|i| {
                let v: f64 = g.gen();
                let u = if stratified { (i as f64 + v) / n as f64 } else { v };
                map(u)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Roy structure on binary outcomes with `E(Y0) = a` and `E(Y1) = b` at a
/// covariate point, built by cutting the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryWitness {
    pub cells: CellProbs,
    pub joint: PotentialJoint,
    pub a: f64,
    pub b: f64,
}

pub fn coupling_witness_binary(g: &CovariateGrid, x0: &str, x1: &str, a: f64, b: f64) -> Result<BinaryWitness> {
    let (a_lo, a_hi) = g.a_range(x0, x1)?;
    let (b_lo, b_hi) = g.b_range(x0, x1)?;
    let tol = 1e-12;
    if !(a >= a_lo - tol && a <= a_hi + tol && b >= b_lo - tol && b <= b_hi + tol) {
        return Err(RoyError::OutOfRange { a, b, a_lo, a_hi, b_lo, b_hi });
    }
    let q = *g.get(x0, x1)?;
    let s = q.q10 + q.q11;
    let raw = [q.q00 + q.q01, s - a, s - b, a + b - s];
    let joint = PotentialJoint::from_array(raw.map(|v| v.max(0.0)))?;
    Ok(BinaryWitness { cells: q, joint, a, b })
}

impl BinaryWitness {
    pub fn map(&self, u: f64) -> Draw {
        let q = &self.cells;
        let zero = q.q00 + q.q01;
        let d = if u <= q.q00 {
            0
        } else if u <= zero {
            1
        } else if u <= zero + q.q10 {
            0
        } else {
            1
        };
        let p = &self.joint;
        let (y0, y1) = if u <= zero {
            (0.0, 0.0)
        } else if u <= zero + p.p10 {
            (1.0, 0.0)
        } else if u <= 1.0 - p.p01 {
            (1.0, 1.0)
        } else {
            (0.0, 1.0)
        };
        Draw::new(y0, y1, d, 0)
    }

    pub fn sample(&self, n: usize, seed: u64, stratified: bool) -> Vec<Draw> {
        draw_uniforms(n, seed, stratified, |u| self.map(u))
    }
}

/// Right-continuous step cdf: value `vs[i]` on `[xs[i], xs[i+1])`, zero below `xs[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCdf {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl StepCdf {
    pub fn new(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        let ok = xs.len() == vs.len()
            && !xs.is_empty()
            && xs.windows(2).all(|w| w[0] < w[1])
            && vs.windows(2).all(|w| w[0] <= w[1] + 1e-15)
            && vs.iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v))
            && (vs[vs.len() - 1] - 1.0).abs() < 1e-9;
        if !ok {
            return Err(RoyError::InvalidArgument("step cdf must be increasing and end at 1".into()));
        }
        Ok(StepCdf { xs, vs })
    }

    pub fn eval(&self, y: f64) -> f64 {
        let k = self.xs.partition_point(|&x| x <= y);
        if k == 0 {
            0.0
        } else {
            self.vs[k - 1]
        }
    }

    pub fn jump_points(&self) -> &[f64] {
        &self.xs
    }

    /// `F̄_d`, with the mass `P(D = 1-d)` placed at `below`.
    pub fn peterson_upper(c: &SubCdf, d: u8, below: f64) -> Result<Self> {
        let mut xs = vec![below];
        xs.extend(c.jump_points().iter().copied().filter(|&y| y > below));
        let vs = xs.iter().map(|&y| c.upper(d, y)).collect();
        Self::new(xs, vs)
    }

    /// `F`, the lower envelope.
    pub fn lower_envelope(c: &SubCdf) -> Result<Self> {
        let xs = c.jump_points().to_vec();
        let vs = xs.iter().map(|&y| c.f(y)).collect();
        Self::new(xs, vs)
    }
}

/// Roy structure on continuous outcomes with given marginals.
#[derive(Debug, Clone)]
pub struct ContinuousWitness {
    c: SubCdf,
    grid: Vec<f64>,
    /// `F_d - F̲_d` on the grid, per sector.
    excess: [Vec<f64>; 2],
    marginals: [StepCdf; 2],
}

/// Slack on the excess-mass inverse so that rounding never orders `Y0` above `Y1`.
const EXCESS_TOL: f64 = 1e-10;

pub fn coupling_witness_continuous(c: &SubCdf, f0: StepCdf, f1: StepCdf) -> Result<ContinuousWitness> {
    let mut grid: Vec<f64> = c.jump_points().to_vec();
    grid.extend_from_slice(f0.jump_points());
    grid.extend_from_slice(f1.jump_points());
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let marginals = [f0, f1];
    let mut excess = [Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len())];
    for d in 0..2u8 {
        let f = &marginals[d as usize];
        let mut prev = 0.0;
        for &y in &grid {
            let v = f.eval(y);
            if v < c.f(y) - 1e-12 || v > c.upper(d, y) + 1e-12 {
                return Err(RoyError::BoundsViolated { d, y });
            }
            let e = v - c.lower(d, y);
            if e < prev - 1e-12 {
                return Err(RoyError::BoundsViolated { d, y });
            }
            prev = e;
            excess[d as usize].push(e);
        }
    }
    Ok(ContinuousWitness { c: c.clone(), grid, excess, marginals })
}

impl ContinuousWitness {
    pub fn marginal(&self, d: u8) -> &StepCdf {
        &self.marginals[d as usize]
    }

    fn excess_inverse(&self, d: u8, u: f64) -> f64 {
        let e = &self.excess[d as usize];
        let k = e.partition_point(|&v| v < u - EXCESS_TOL);
        self.grid.get(k).copied().unwrap_or(f64::INFINITY)
    }

    pub fn map(&self, u: f64) -> Draw {
        let p1 = self.c.p_d(1);
        if u < p1 {
            let y1 = self.c.inv_lower(1, u);
            let y0 = self.excess_inverse(0, u);
            Draw::new(y0, y1, 1, 0)
        } else {
            let v = u - p1;
            let y0 = self.c.inv_lower(0, v);
            let y1 = self.excess_inverse(1, v);
            Draw::new(y0, y1, 0, 0)
        }
    }

    pub fn sample(&self, n: usize, seed: u64, stratified: bool) -> Vec<Draw> {
        draw_uniforms(n, seed, stratified, |u| self.map(u))
    }
}
