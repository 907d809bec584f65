//! Dense two-phase simplex for `min c·x` subject to `A x = b`, `x >= 0`.
//!
//! Bland's rule prevents cycling. Problems here have at most a few dozen rows
//! and a few hundred columns.

use crate::error::{Result, RoyError};

const EPS: f64 = 1e-11;
/// Phase-one residual above which the program is declared infeasible.
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize, cost: &mut [f64]) {
        let w = self.width;
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pr = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[col];
                if f != 0.0 {
                    for j in 0..=w {
                        row[j] -= f * pr[j];
                    }
                }
            }
        }
        let f = cost[col];
        if f != 0.0 {
            for j in 0..=w {
                cost[j] -= f * pr[j];
            }
        }
        self.basis[r] = col;
    }

    /// Run simplex iterations on the reduced-cost row over columns `< allowed`.
    fn optimize(&mut self, cost: &mut [f64], allowed: usize) -> Result<()> {
        let w = self.width;
        loop {
            let Some(col) = (0..allowed).find(|&j| cost[j] < -EPS) else { return Ok(()) };
            let mut best: Option<(f64, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > EPS {
                    let ratio = row[w] / row[col];
                    best = match best {
                        None => Some((ratio, i)),
                        Some((br, bi)) => {
                            if ratio < br - EPS || (ratio <= br + EPS && self.basis[i] < self.basis[bi]) {
                                Some((ratio, i))
                            } else {
                                Some((br, bi))
                            }
                        }
                    };
                }
            }
            let Some((_, r)) = best else {
                return Err(RoyError::InvalidArgument("unbounded linear program".into()));
            };
            self.pivot(r, col, cost);
        }
    }
}

/// Minimize `c·x` subject to `a x = b`, `x >= 0`.
pub fn minimize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    let width = n + m;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, ai) in a.iter().enumerate() {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width + 1];
        for j in 0..n {
            row[j] = sign * ai[j];
        }
        row[n + i] = 1.0;
        row[width] = sign * b[i];
        rows.push(row);
    }
    let mut t = Tableau { rows, basis: (n..n + m).collect(), width };

    // phase one: minimize the sum of artificials
    let mut cost = vec![0.0; width + 1];
    for row in &t.rows {
        for j in 0..n {
            cost[j] -= row[j];
        }
        cost[width] -= row[width];
    }
    t.optimize(&mut cost, width)?;
    if -cost[width] > FEAS_TOL {
        return Err(RoyError::InfeasibleLp);
    }

    // drive artificials out of the basis, dropping redundant rows
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| t.rows[r][j].abs() > 1e-9) {
                t.pivot(r, col, &mut cost);
            } else {
                t.rows.remove(r);
                t.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }

    // phase two
    let mut cost = vec![0.0; width + 1];
    cost[..n].copy_from_slice(c);
    for (i, &bi) in t.basis.clone().iter().enumerate() {
        let f = cost[bi];
        if f != 0.0 {
            let row = t.rows[i].clone();
            for j in 0..=width {
                cost[j] -= f * row[j];
            }
        }
    }
    t.optimize(&mut cost, n)?;
    let mut x = vec![0.0; n];
    for (i, &bi) in t.basis.iter().enumerate() {
        if bi < n {
            x[bi] = t.rows[i][width];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { value, x })
}

/// Maximize `c·x` subject to `a x = b`, `x >= 0`.
pub fn maximize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let neg: Vec<f64> = c.iter().map(|v| -v).collect();
    let mut s = minimize(a, b, &neg)?;
    s.value = -s.value;
    Ok(s)
}
