use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, RoyError};
use crate::probability::{CellProbs, InstrumentPoint, InstrumentTable, IntervalBound};

use super::lp;

pub const MAX_INSTRUMENT_POINTS: usize = 6;

/// Potential outcomes plus the sector chosen at every instrument point;
/// bit `k` of `choice` is `d(z_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResponseType {
    pub y0: u8,
    pub y1: u8,
    pub choice: u32,
}

impl ResponseType {
    pub fn d(&self, k: usize) -> u8 {
        ((self.choice >> k) & 1) as u8
    }

    /// Observed `(Y, D)` cell index at instrument point `k`.
    pub fn cell(&self, k: usize) -> usize {
        let d = self.d(k);
        let y = if d == 1 { self.y1 } else { self.y0 };
        2 * y as usize + d as usize
    }

    /// Index of `(y0, y1)` in the potential joint.
    pub fn pair(&self) -> usize {
        2 * self.y0 as usize + self.y1 as usize
    }
}

pub fn enumerate_types(k: usize) -> Vec<ResponseType> {
    let mut out = Vec::with_capacity(4 << k);
    for y0 in 0..2u8 {
        for y1 in 0..2u8 {
            for choice in 0..(1u32 << k) {
                out.push(ResponseType { y0, y1, choice });
            }
        }
    }
    out
}

/// Range of `c·p` over type laws reproducing the raw per-`z` cells.
pub fn response_type_lp_raw(cells: &[[f64; 4]], c: [f64; 4]) -> Result<IntervalBound> {
    let k = cells.len();
    if k > MAX_INSTRUMENT_POINTS {
        return Err(RoyError::TooManyInstrumentPoints { k, max: MAX_INSTRUMENT_POINTS });
    }
    if k == 0 {
        return Err(RoyError::InvalidTable("no instrument points".into()));
    }
    let types = enumerate_types(k);
    let mut a = Vec::with_capacity(4 * k);
    let mut b = Vec::with_capacity(4 * k);
    for (z, q) in cells.iter().enumerate() {
        for (cell, &qc) in q.iter().enumerate() {
            a.push(types.iter().map(|t| (t.cell(z) == cell) as u8 as f64).collect::<Vec<f64>>());
            b.push(qc);
        }
    }
    a.push(vec![1.0; types.len()]);
    b.push(1.0);
    let obj: Vec<f64> = types.iter().map(|t| c[t.pair()]).collect();
    let lo = lp::minimize(&a, &b, &obj)?.value;
    let hi = lp::maximize(&a, &b, &obj)?.value;
    Ok(IntervalBound::sharp(lo, hi, "response-type program"))
}

pub fn response_type_lp(t: &InstrumentTable, c: [f64; 4]) -> Result<IntervalBound> {
    let cells: Vec<[f64; 4]> = t.points().iter().map(|p| p.cells.as_array()).collect();
    response_type_lp_raw(&cells, c)
}

/// Cells induced by a type law at each of `k` instrument points.
pub fn forward_table(types: &[ResponseType], weights: &[f64], k: usize) -> Result<InstrumentTable> {
    let mut cells = vec![[0.0; 4]; k];
    for (t, &w) in types.iter().zip(weights) {
        for (z, c) in cells.iter_mut().enumerate() {
            c[t.cell(z)] += w;
        }
    }
    let points = cells
        .into_iter()
        .enumerate()
        .map(|(z, c)| {
            Ok(InstrumentPoint {
                label: format!("z{}", z + 1),
                cells: CellProbs::new(c[0], c[1], c[2], c[3])?,
                weight: 1.0 / k as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    InstrumentTable::new(points)
}

/// Random sparse type law on `k` instrument points and the table it induces.
pub fn random_type_table(rng: &mut ChaCha8Rng, k: usize) -> Result<(Vec<f64>, InstrumentTable)> {
    let types = enumerate_types(k);
    let keep = rng.gen_range(0.2..1.0);
    let mut w: Vec<f64> = types
        .iter()
        .map(|_| if rng.gen::<f64>() < keep { -rng.gen::<f64>().ln() } else { 0.0 })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        let i = rng.gen_range(0..w.len());
        w[i] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    let t = forward_table(&types, &w, k)?;
    Ok((w, t))
}
