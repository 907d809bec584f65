use std::collections::BTreeMap;
use std::path::Path;

use roybounds::probability::InstrumentPoint;
use roybounds::{CellProbs, InstrumentTable, OutcomeSample, Record};
use serde::Deserialize;

use crate::args::Common;
use crate::report::InputDigest;
use crate::CliError;

/// Rows that survived the filters, with any extra columns that were asked for.
pub struct Dataset {
    pub sample: OutcomeSample,
    /// In file order, aligned with `extra`.
    pub records: Vec<Record>,
    pub extra: Vec<Vec<String>>,
    pub digest: InputDigest,
}

struct Filter {
    col: String,
    value: String,
}

fn parse_filters(raw: &[String]) -> Result<Vec<Filter>, CliError> {
    raw.iter()
        .map(|f| match f.split_once('=') {
            Some((c, v)) if !c.trim().is_empty() => Ok(Filter { col: c.trim().into(), value: v.trim().into() }),
            _ => Err(CliError::Input(format!("--filter {f:?}: expected COL=VALUE"))),
        })
        .collect()
}

fn column(headers: &csv::StringRecord, name: &str, flag: &str, path: &Path) -> Result<usize, CliError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| CliError::Input(format!("{}: no column named {name:?} ({flag})", path.display())))
}

pub fn load_csv(path: &Path, c: &Common, extra_cols: &[&str]) -> Result<Dataset, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?.clone();
    let iy = column(&headers, &c.outcome, "--outcome", path)?;
    let id = column(&headers, &c.sector, "--sector", path)?;
    let iz = c.instrument.as_deref().map(|z| column(&headers, z, "--instrument", path)).transpose()?;
    let iw = c.weight.as_deref().map(|w| column(&headers, w, "--weight", path)).transpose()?;
    let ix = extra_cols.iter().map(|x| column(&headers, x, "covariate", path)).collect::<Result<Vec<_>, _>>()?;
    let filters = parse_filters(&c.filters)?;
    let fcols = filters
        .iter()
        .map(|f| column(&headers, &f.col, "--filter", path))
        .collect::<Result<Vec<_>, _>>()?;

    let mut records = Vec::new();
    let mut extra = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| row.get(i).map(str::trim).unwrap_or("");
        if filters.iter().zip(&fcols).any(|(f, &i)| field(i) != f.value) {
            continue;
        }
        let bad = |what: &str| CliError::Input(format!("{} line {line}: {what}", path.display()));
        let y: f64 = match field(iy) {
            "" => return Err(bad(&format!("missing value in column {:?}", c.outcome))),
            v => v.parse().ok().filter(|y: &f64| y.is_finite()).ok_or_else(|| bad(&format!("outcome {v:?} is not a finite number")))?,
        };
        let d = match field(id) {
            "" => return Err(bad(&format!("missing value in column {:?}", c.sector))),
            v => match v.parse::<f64>() {
                Ok(x) if x == 0.0 => 0u8,
                Ok(x) if x == 1.0 => 1u8,
                _ => return Err(bad(&format!("sector {v:?} is not 0/1"))),
            },
        };
        let w = match iw.map(field) {
            None | Some("") => 1.0,
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|w| *w > 0.0 && w.is_finite())
                .ok_or_else(|| bad(&format!("weight {v:?} is not positive")))?,
        };
        let mut rec = Record::weighted(y, d, w);
        if let Some(i) = iz {
            match field(i) {
                "" => return Err(bad("missing instrument value")),
                z => rec = rec.with_z(z),
            }
        }
        records.push(rec);
        extra.push(ix.iter().map(|&i| field(i).to_string()).collect());
    }
    if records.is_empty() {
        return Err(CliError::Input(format!("{}: no rows left after filtering", path.display())));
    }
    let rows = records.len();
    let sample = OutcomeSample::new(records.clone()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let digest = InputDigest {
        source: path.display().to_string(),
        rows,
        weight_total: sample.total_weight(),
        filters: c.filters.clone(),
    };
    Ok(Dataset { sample, records, extra, digest })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CellSpec {
    q00: f64,
    q01: f64,
    q10: f64,
    q11: f64,
    #[serde(default)]
    weight: Option<f64>,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CellsInput {
    One(CellSpec),
    Map(BTreeMap<String, CellSpec>),
    List(Vec<CellSpec>),
}

/// Parse `--cells`: one cell law, a map from instrument label to cells, or a
/// list of cells with optional `label` and `weight`.
pub fn parse_cells(raw: &str) -> Result<(InstrumentTable, InputDigest), CliError> {
    let bad = |m: String| CliError::Input(format!("--cells: {m}"));
    let text = match raw.strip_prefix('@') {
        Some(p) => std::fs::read_to_string(p).map_err(|e| bad(format!("{p}: {e}")))?,
        None => raw.to_string(),
    };
    let parsed: CellsInput = serde_json::from_str(&text)
        .map_err(|_| bad("expected {\"q00\",\"q01\",\"q10\",\"q11\"}, a map of such objects, or a list".into()))?;
    let specs: Vec<(String, CellSpec)> = match parsed {
        CellsInput::One(s) => vec![(s.label.clone().unwrap_or_else(|| "all".into()), s)],
        CellsInput::Map(m) => m.into_iter().collect(),
        CellsInput::List(v) => v
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s.label.clone().unwrap_or_else(|| format!("z{}", i + 1)), s))
            .collect(),
    };
    if specs.is_empty() {
        return Err(bad("no cells given".into()));
    }
    let given = specs.iter().filter(|(_, s)| s.weight.is_some()).count();
    if given != 0 && given != specs.len() {
        return Err(bad("give a weight for every instrument value or for none".into()));
    }
    let uniform = 1.0 / specs.len() as f64;
    let mut points = Vec::new();
    for (label, s) in specs {
        let cells = CellProbs::new(s.q00, s.q01, s.q10, s.q11).map_err(|e| bad(format!("{label}: {e}")))?;
        points.push(InstrumentPoint { label, cells, weight: s.weight.unwrap_or(uniform) });
    }
    let rows = points.len();
    let total: f64 = points.iter().map(|p| p.weight).sum();
    let table = InstrumentTable::new(points).map_err(|e| bad(e.to_string()))?;
    Ok((table, InputDigest { source: "cells".into(), rows, weight_total: total, filters: vec![] }))
}
