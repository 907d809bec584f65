use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, RoyError};
use crate::functional::{OutcomeSample, Record};
use crate::probability::{CellProbs, InstrumentPoint, InstrumentTable};
use crate::{par, rng};

use super::witness::Draw;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Marginal {
    Normal { mean: f64, sd: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

impl Marginal {
    /// Image of a standard normal draw.
    fn from_normal(&self, z: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => mean + sd * z,
            Marginal::LogNormal { mu, sigma } => (mu + sigma * z).exp(),
            Marginal::Uniform { lo, hi } => lo + (hi - lo) * std_normal().cdf(z),
        }
    }

    pub fn quantile(&self, q: f64) -> f64 {
        self.from_normal(std_normal().inverse_cdf(q))
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::Normal { mean, sd } => mean.is_finite() && sd > 0.0,
            Marginal::LogNormal { mu, sigma } => mu.is_finite() && sigma > 0.0,
            Marginal::Uniform { lo, hi } => lo.is_finite() && hi > lo,
        };
        if ok {
            Ok(())
        } else {
            Err(RoyError::InvalidDesign(format!("bad marginal {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointPoint {
    pub y0: f64,
    pub y1: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JointLaw {
    /// Binary potential outcomes, `p_ij = P(Y0=i, Y1=j)`.
    Binary { p00: f64, p01: f64, p10: f64, p11: f64 },
    Discrete { points: Vec<JointPoint> },
    GaussianCopula {
        rho: f64,
        y0: Marginal,
        y1: Marginal,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        round_to: Option<f64>,
    },
}

impl JointLaw {
    /// Finite support, when there is one.
    pub fn points(&self) -> Option<Vec<JointPoint>> {
        match self {
            JointLaw::Binary { p00, p01, p10, p11 } => Some(
                [(0.0, 0.0, *p00), (0.0, 1.0, *p01), (1.0, 0.0, *p10), (1.0, 1.0, *p11)]
                    .into_iter()
                    .map(|(y0, y1, mass)| JointPoint { y0, y1, mass })
                    .collect(),
            ),
            JointLaw::Discrete { points } => Some(points.clone()),
            JointLaw::GaussianCopula { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(points) = self.points() {
            if points.is_empty() || points.iter().any(|p| !(p.mass >= 0.0) || !p.y0.is_finite() || !p.y1.is_finite()) {
                return Err(RoyError::InvalidDesign("joint masses must be nonnegative and finite".into()));
            }
            let s: f64 = points.iter().map(|p| p.mass).sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(RoyError::InvalidDesign(format!("joint masses sum to {s}")));
            }
        }
        if let JointLaw::GaussianCopula { rho, y0, y1, round_to } = self {
            if !(-1.0..=1.0).contains(rho) {
                return Err(RoyError::InvalidDesign(format!("copula correlation {rho} outside [-1, 1]")));
            }
            if matches!(round_to, Some(r) if !(*r > 0.0)) {
                return Err(RoyError::InvalidDesign("round_to must be positive".into()));
            }
            y0.validate()?;
            y1.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentLevel {
    pub label: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentLaw {
    pub levels: Vec<InstrumentLevel>,
}

/// `P(D = 1)` when `Y1 > Y0`, when `Y1 < Y0`, and at ties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChoiceProbs {
    pub gain: f64,
    pub loss: f64,
    pub tie: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SelectionRule {
    Roy,
    /// Choice probabilities per instrument label (`all` without an instrument).
    Generalized { by_z: BTreeMap<String, ChoiceProbs> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    #[serde(default)]
    pub name: String,
    pub joint: JointLaw,
    /// `P(D = 1 | Y0 = Y1)` under Roy selection.
    #[serde(default = "half")]
    pub tie_break: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instrument: Option<InstrumentLaw>,
    #[serde(default = "roy")]
    pub selection: SelectionRule,
    pub n: usize,
    pub seed: u64,
}

fn half() -> f64 {
    0.5
}

fn roy() -> SelectionRule {
    SelectionRule::Roy
}

impl SimDesign {
    pub fn labels(&self) -> Vec<String> {
        match &self.instrument {
            Some(l) => l.levels.iter().map(|v| v.label.clone()).collect(),
            None => vec!["all".to_string()],
        }
    }

    fn level_weights(&self) -> Vec<f64> {
        match &self.instrument {
            Some(l) => l.levels.iter().map(|v| v.weight).collect(),
            None => vec![1.0],
        }
    }

    /// Choice probabilities at each instrument level.
    pub fn choice(&self) -> Vec<ChoiceProbs> {
        match &self.selection {
            SelectionRule::Roy => vec![ChoiceProbs { gain: 1.0, loss: 0.0, tie: self.tie_break }; self.labels().len()],
            SelectionRule::Generalized { by_z } => self.labels().iter().map(|l| by_z[l]).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tie_break) {
            return Err(RoyError::InvalidDesign(format!("tie_break {} outside [0, 1]", self.tie_break)));
        }
        self.joint.validate()?;
        if let Some(l) = &self.instrument {
            if l.levels.is_empty() || l.levels.iter().any(|v| !(v.weight > 0.0)) {
                return Err(RoyError::InvalidDesign("instrument levels need positive weights".into()));
            }
            let s: f64 = l.levels.iter().map(|v| v.weight).sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(RoyError::InvalidDesign(format!("instrument weights sum to {s}")));
            }
            let mut labels: Vec<&str> = l.levels.iter().map(|v| v.label.as_str()).collect();
            labels.sort_unstable();
            labels.dedup();
            if labels.len() != l.levels.len() {
                return Err(RoyError::InvalidDesign("duplicate instrument labels".into()));
            }
        }
        if let SelectionRule::Generalized { by_z } = &self.selection {
            for l in self.labels() {
                let Some(c) = by_z.get(&l) else {
                    return Err(RoyError::InvalidDesign(format!("no selection rule for level {l}")));
                };
                if [c.gain, c.loss, c.tie].iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(RoyError::InvalidDesign(format!("choice probabilities at {l} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }

    /// Quantile of `Y_d`, for copula designs.
    pub fn true_quantile(&self, d: u8, q: f64) -> Option<f64> {
        match &self.joint {
            JointLaw::GaussianCopula { y0, y1, round_to, .. } => {
                let m = if d == 1 { y1 } else { y0 };
                let v = m.quantile(q);
                Some(match round_to {
                    Some(r) => (v / r).round() * r,
                    None => v,
                })
            }
            _ => None,
        }
    }
}

fn choose(c: &ChoiceProbs, y0: f64, y1: f64) -> f64 {
    if y1 > y0 {
        c.gain
    } else if y1 < y0 {
        c.loss
    } else {
        c.tie
    }
}

/// Population quantities of a design, exact for discrete joints and Monte
/// Carlo over the drawn potentials otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub design: String,
    pub seed: u64,
    pub n: usize,
    pub exact: bool,
    pub ey0: f64,
    pub ey1: f64,
    pub ate: f64,
    pub p_d1: f64,
    /// `E(Y1 - Y0 | D = 1)`
    pub att1: Option<f64>,
    /// `E(Y0 - Y1 | D = 0)`
    pub att0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells_by_z: Option<BTreeMap<String, [f64; 4]>>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub sample: OutcomeSample,
    /// Draws in generation order; `z` indexes [`SimDesign::labels`].
    pub draws: Vec<Draw>,
    pub truth: TruthRecord,
}

const CHUNK: usize = 4096;

pub fn simulate(design: &SimDesign) -> Result<Simulation> {
    design.validate()?;
    let n = design.n;
    if n == 0 {
        return Err(RoyError::InvalidDesign("n must be positive".into()));
    }
    let labels = design.labels();
    let choice = design.choice();
    let zdist = WeightedIndex::new(design.level_weights()).map_err(|e| RoyError::InvalidDesign(e.to_string()))?;
    let points = design.joint.points();
    let pdist = match &points {
        Some(p) => Some(
            WeightedIndex::new(p.iter().map(|v| v.mass)).map_err(|e| RoyError::InvalidDesign(e.to_string()))?,
        ),
        None => None,
    };
    let draw_pair = |g: &mut rand_chacha::ChaCha8Rng| -> (f64, f64) {
        match (&design.joint, &points, &pdist) {
            (_, Some(p), Some(w)) => {
                let v = p[w.sample(g)];
                (v.y0, v.y1)
            }
            (JointLaw::GaussianCopula { rho, y0, y1, round_to }, _, _) => {
                let a: f64 = g.sample(StandardNormal);
                let e: f64 = g.sample(StandardNormal);
                let b = rho * a + (1.0 - rho * rho).max(0.0).sqrt() * e;
                let r = |v: f64| match round_to {
                    Some(s) => (v / s).round() * s,
                    None => v,
                };
                (r(y0.from_normal(a)), r(y1.from_normal(b)))
            }
            _ => unreachable!("discrete laws carry points"),
        }
    };
    let chunks = n.div_ceil(CHUNK);
    let draws: Vec<Draw> = par::map_range(chunks, |c| {
        let mut g = rng::stream(design.seed, rng::SIMULATE, c as u64);
        let len = CHUNK.min(n - c * CHUNK);
        (0..len)
            .map(|_| {
                let (y0, y1) = draw_pair(&mut g);
                let z = zdist.sample(&mut g);
                let p = choose(&choice[z], y0, y1);
                let d = (g.gen::<f64>() < p) as u8;
                Draw::new(y0, y1, d, z)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let with_z = design.instrument.is_some();
    let records: Vec<Record> = draws
        .iter()
        .map(|dr| {
            let r = Record::new(dr.y, dr.d);
            if with_z {
                r.with_z(labels[dr.z].clone())
            } else {
                r
            }
        })
        .collect();
    let sample = OutcomeSample::new(records)?;
    let truth = match points {
        Some(_) => exact_truth(design)?,
        None => sample_truth(design, &draws),
    };
    Ok(Simulation { sample, draws, truth })
}

fn exact_truth(design: &SimDesign) -> Result<TruthRecord> {
    let points = design.joint.points().expect("discrete joint");
    let choice = design.choice();
    let weights = design.level_weights();
    let (mut ey0, mut ey1, mut p1, mut gain1, mut gain0) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for v in &points {
        ey0 += v.mass * v.y0;
        ey1 += v.mass * v.y1;
        for (c, w) in choice.iter().zip(&weights) {
            let p = choose(c, v.y0, v.y1);
            p1 += w * v.mass * p;
            gain1 += w * v.mass * p * (v.y1 - v.y0);
            gain0 += w * v.mass * (1.0 - p) * (v.y0 - v.y1);
        }
    }
    let binary = points.iter().all(|v| (v.y0 == 0.0 || v.y0 == 1.0) && (v.y1 == 0.0 || v.y1 == 1.0));
    let (joint, cells_by_z) = if binary {
        let mut j = [0.0; 4];
        for v in &points {
            j[2 * v.y0 as usize + v.y1 as usize] += v.mass;
        }
        let t = population_table(design)?;
        let cells = t.points().iter().map(|p| (p.label.clone(), p.cells.as_array())).collect();
        (Some(j), Some(cells))
    } else {
        (None, None)
    };
    Ok(TruthRecord {
        design: design.name.clone(),
        seed: design.seed,
        n: design.n,
        exact: true,
        ey0,
        ey1,
        ate: ey1 - ey0,
        p_d1: p1,
        att1: (p1 > 0.0).then(|| gain1 / p1),
        att0: (p1 < 1.0).then(|| gain0 / (1.0 - p1)),
        joint,
        cells_by_z,
    })
}

fn sample_truth(design: &SimDesign, draws: &[Draw]) -> TruthRecord {
    let n = draws.len() as f64;
    let ey0 = draws.iter().map(|d| d.y0).sum::<f64>() / n;
    let ey1 = draws.iter().map(|d| d.y1).sum::<f64>() / n;
    let n1 = draws.iter().filter(|d| d.d == 1).count() as f64;
    let g1: f64 = draws.iter().filter(|d| d.d == 1).map(|d| d.y1 - d.y0).sum();
    let g0: f64 = draws.iter().filter(|d| d.d == 0).map(|d| d.y0 - d.y1).sum();
    TruthRecord {
        design: design.name.clone(),
        seed: design.seed,
        n: design.n,
        exact: false,
        ey0,
        ey1,
        ate: ey1 - ey0,
        p_d1: n1 / n,
        att1: (n1 > 0.0).then(|| g1 / n1),
        att0: (n1 < n).then(|| g0 / (n - n1)),
        joint: None,
        cells_by_z: None,
    }
}

/// Population `(Y, D)` cells at each instrument level of a binary design.
pub fn population_table(design: &SimDesign) -> Result<InstrumentTable> {
    design.validate()?;
    let points = design
        .joint
        .points()
        .ok_or_else(|| RoyError::InvalidDesign("population cells need a discrete joint".into()))?;
    if points.iter().any(|v| !(v.y0 == 0.0 || v.y0 == 1.0) || !(v.y1 == 0.0 || v.y1 == 1.0)) {
        return Err(RoyError::InvalidDesign("population cells need binary outcomes".into()));
    }
    let choice = design.choice();
    let labels = design.labels();
    let weights = design.level_weights();
    let mut out = Vec::with_capacity(labels.len());
    for ((label, c), w) in labels.into_iter().zip(&choice).zip(weights) {
        let mut cells = [0.0; 4];
        for v in &points {
            let p = choose(c, v.y0, v.y1);
            cells[2 * v.y1 as usize + 1] += v.mass * p;
            cells[2 * v.y0 as usize] += v.mass * (1.0 - p);
        }
        out.push(InstrumentPoint { label, cells: CellProbs::new(cells[0], cells[1], cells[2], cells[3])?, weight: w });
    }
    InstrumentTable::new(out)
}
