use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RoyError};
use crate::probability::{validate_cells, InstrumentPoint, InstrumentTable};

/// One observation: outcome, chosen sector, weight and optional instrument value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub y: f64,
    pub d: u8,
    pub weight: f64,
    pub z: Option<String>,
}

impl Record {
    pub fn new(y: f64, d: u8) -> Self {
        Record { y, d, weight: 1.0, z: None }
    }

    pub fn weighted(y: f64, d: u8, weight: f64) -> Self {
        Record { y, d, weight, z: None }
    }

    pub fn with_z(mut self, z: impl Into<String>) -> Self {
        self.z = Some(z.into());
        self
    }
}

/// Weighted observations sorted by outcome. Weights are kept raw; consumers
/// normalize.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeSample {
    records: Vec<Record>,
    total_weight: f64,
}

impl OutcomeSample {
    pub fn new(mut records: Vec<Record>) -> Result<Self> {
        if records.is_empty() {
            return Err(RoyError::EmptySample);
        }
        let mut total_weight = 0.0;
        for (i, r) in records.iter().enumerate() {
            if !r.y.is_finite() {
                return Err(RoyError::InvalidData(format!("record {i}: outcome {} is not finite", r.y)));
            }
            if r.d > 1 {
                return Err(RoyError::InvalidData(format!("record {i}: sector {} is not 0/1", r.d)));
            }
            if !(r.weight > 0.0) || !r.weight.is_finite() {
                return Err(RoyError::InvalidData(format!("record {i}: weight {} is not positive", r.weight)));
            }
            total_weight += r.weight;
        }
        records.sort_by(|a, b| a.y.total_cmp(&b.y));
        Ok(OutcomeSample { records, total_weight })
    }

    /// Equally weighted sample from `(y, d)` pairs.
    pub fn from_pairs(pairs: &[(f64, u8)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(y, d)| Record::new(y, d)).collect())
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn is_binary(&self) -> bool {
        self.records.iter().all(|r| r.y == 0.0 || r.y == 1.0)
    }

    /// Records grouped by instrument value; a sample without instrument is one group.
    pub fn groups(&self) -> BTreeMap<String, Vec<&Record>> {
        let mut out: BTreeMap<String, Vec<&Record>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.z.clone().unwrap_or_else(|| "all".into())).or_default().push(r);
        }
        out
    }

    /// Estimated cell laws per instrument value with estimated `P(Z=z)`.
    pub fn instrument_table(&self) -> Result<InstrumentTable> {
        if !self.is_binary() {
            return Err(RoyError::InvalidData("cell tables need a 0/1 outcome".into()));
        }
        let mut points = Vec::new();
        for (label, rs) in self.groups() {
            let mut cells = [0.0; 4];
            let mut w = 0.0;
            for r in &rs {
                cells[2 * (r.y as usize) + r.d as usize] += r.weight;
                w += r.weight;
            }
            let cells = validate_cells(cells.map(|c| c / w))?;
            points.push(InstrumentPoint { label, cells, weight: w / self.total_weight });
        }
        InstrumentTable::new(points)
    }

    /// Subsample with the same instrument value.
    pub fn restrict_z(&self, z: &str) -> Result<Self> {
        Self::new(self.records.iter().filter(|r| r.z.as_deref() == Some(z)).cloned().collect())
    }
}
