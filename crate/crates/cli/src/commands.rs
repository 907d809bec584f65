use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use roybounds::binary::{
    conditional_bounds, manski_bounds, marginal_bounds_with_covariates, outcome_instrument_gap, sharp_bounds,
    sharp_bounds_with_instrument, CovariateGrid,
};
use roybounds::functional::{
    build_subcdf, interval_lower_bound, iqr_bounds, joint_set_bounds, mobility_upper, peterson_bounds,
    peterson_rectangle_upper, proposition1_check, Interval, Rect, RectUnion,
};
use roybounds::generalized::{
    benefit_bounds, bp_marginal_bounds, envelopes, generalized_bounds, marginal_intervals, roy_selection_test,
};
use roybounds::inference::{
    assemble_cis, att0_ci, att1_ci, critical_value, estimate_theta, iqr_ci, ConfidenceInterval, IqrCiOptions,
};
use roybounds::oracle::response::MAX_INSTRUMENT_POINTS;
use roybounds::oracle::{artstein_set, response_type_lp, simulate, SimDesign, Variant};
use roybounds::probability::simplex_grid;
use roybounds::{par, CellProbs, InstrumentTable, IntervalBound, OutcomeSample, RoyError};
use serde_json::json;

use crate::args::*;
use crate::input::{load_csv, parse_cells, Dataset};
use crate::report::{num, Report};
use crate::{designs, CliError, Emit};

fn seed(c: &Common) -> u64 {
    c.seed.unwrap_or(0)
}

fn quantiles(c: &Common) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Input(format!("--quantiles {:?}: expected Q1,Q2 with 0 < Q1 < Q2 < 1", c.quantiles));
    let (a, b) = c.quantiles.split_once(',').ok_or_else(bad)?;
    let q1: f64 = a.trim().parse().map_err(|_| bad())?;
    let q2: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(0.0 < q1 && q1 < q2 && q2 < 1.0) {
        return Err(bad());
    }
    Ok((q1, q2))
}

fn check_level(c: &Common) -> Result<(), CliError> {
    if !(c.level > 0.0 && c.level < 1.0) {
        return Err(CliError::Input(format!("--level {}: must lie in (0, 1)", c.level)));
    }
    Ok(())
}

fn need_data(c: &Common, r: &mut Report, extra: &[&str]) -> Result<Dataset, CliError> {
    let path = c
        .data
        .as_ref()
        .ok_or_else(|| CliError::Input(format!("{} needs --data", r.subcommand)))?;
    let d = load_csv(path, c, extra)?;
    r.input = d.digest.clone();
    Ok(d)
}

/// Cell table from `--cells` or estimated from `--data`.
fn table_source(c: &Common, r: &mut Report) -> Result<(InstrumentTable, Option<Dataset>), CliError> {
    if let Some(raw) = &c.cells {
        let (t, digest) = parse_cells(raw)?;
        r.input = digest;
        return Ok((t, None));
    }
    let d = need_data(c, r, &[])?;
    if !d.sample.is_binary() {
        return Err(CliError::Input(format!("--outcome {}: cell bounds need a 0/1 outcome", c.outcome)));
    }
    let t = d.sample.instrument_table()?;
    Ok((t, Some(d)))
}

fn cells_detail(t: &InstrumentTable) -> BTreeMap<String, serde_json::Value> {
    t.points()
        .iter()
        .map(|p| (p.label.clone(), json!({ "cells": p.cells.as_array(), "weight": p.weight })))
        .collect()
}

pub fn binary(a: &BinaryArgs, r: &mut Report) -> Result<Emit, CliError> {
    if let (Some(x0), Some(x1)) = (&a.x0, &a.x1) {
        return binary_covariates(a, x0, x1, r);
    }
    let (t, data) = table_source(&a.common, r)?;
    r.detail("cells", &cells_detail(&t));
    let b = if t.len() == 1 {
        sharp_bounds(&t.points()[0].cells)
    } else {
        let tau = match (a.y_tolerance, &data) {
            (Some(v), _) => v,
            (None, Some(d)) => 3.0 * estimate_theta(&d.sample)?.se.iter().map(|s| s[0]).fold(0.0, f64::max),
            (None, None) => 0.0,
        };
        r.detail("y_independence", &json!({ "gap": outcome_instrument_gap(&t), "tolerance": tau }));
        sharp_bounds_with_instrument(&t, tau)?
    };
    r.bound("p00", IntervalBound::point(b.p00_value, "P(Y0=0,Y1=0)"));
    r.bound("p10", b.p10_bound);
    r.bound("p01", b.p01_bound);
    r.bound("ey0", b.ey0_bound);
    r.bound("ey1", b.ey1_bound);
    r.bound("ate", b.ate_bound);
    let (m0, m1, ma) = manski_bounds(&t.pooled());
    r.bound("ey0_worst_case", m0);
    r.bound("ey1_worst_case", m1);
    r.bound("ate_worst_case", ma);
    r.detail("vertices", &b.polytope.vertices());
    Ok(Emit::Report)
}

fn binary_covariates(a: &BinaryArgs, x0: &str, x1: &str, r: &mut Report) -> Result<Emit, CliError> {
    if a.common.cells.is_some() {
        return Err(CliError::Input("--x0/--x1 need --data".into()));
    }
    let d = need_data(&a.common, r, &[x0, x1])?;
    if !d.sample.is_binary() {
        return Err(CliError::Input(format!("--outcome {}: cell bounds need a 0/1 outcome", a.common.outcome)));
    }
    let mut acc: BTreeMap<(String, String), [f64; 4]> = BTreeMap::new();
    for (rec, x) in d.records.iter().zip(&d.extra) {
        acc.entry((x[0].clone(), x[1].clone())).or_default()[2 * rec.y as usize + rec.d as usize] += rec.weight;
    }
    let mut grid = CovariateGrid::new();
    for ((v0, v1), c) in &acc {
        let w: f64 = c.iter().sum();
        grid.insert(v0.clone(), v1.clone(), CellProbs::new(c[0] / w, c[1] / w, c[2] / w, c[3] / w)?);
    }
    let points: Vec<(String, String)> = match &a.at {
        Some(at) => {
            let (v0, v1) = at
                .split_once(',')
                .ok_or_else(|| CliError::Input(format!("--at {at:?}: expected X0,X1")))?;
            grid.get(v0.trim(), v1.trim())
                .map_err(|e| CliError::Input(format!("--at {at:?}: {e}")))?;
            vec![(v0.trim().into(), v1.trim().into())]
        }
        None => acc.keys().cloned().collect(),
    };
    for (v0, v1) in &points {
        let tag = format!("[x0={v0},x1={v1}]");
        let m = marginal_bounds_with_covariates(&grid, v0, v1)?;
        if m.crossed {
            r.reject(format!("covariate bounds cross at {tag}"));
        }
        r.bound(&format!("ey0{tag}"), m.ey0);
        r.bound(&format!("ey1{tag}"), m.ey1);
        match conditional_bounds(&grid, v0, v1) {
            Ok(c) => {
                r.bound(&format!("p_y1_given_y0_zero{tag}"), c.p_y1_given_y0_zero);
                r.bound(&format!("p_y0_given_y1_zero{tag}"), c.p_y0_given_y1_zero);
            }
            Err(e) => r.note(format!("{tag}: {e}")),
        }
    }
    r.detail("grid", &grid);
    Ok(Emit::Report)
}

pub fn generalized(a: &GeneralizedArgs, r: &mut Report) -> Result<Emit, CliError> {
    let c = &a.common;
    check_level(c)?;
    let (t, data) = table_source(c, r)?;
    let e = envelopes(&t);
    r.detail("cells", &cells_detail(&t));
    r.detail("envelopes", &e);
    r.detail("selection_test", &roy_selection_test(&t));
    match generalized_bounds(&t) {
        Ok(g) => {
            r.bound("ey0", g.ey0);
            r.bound("ey1", g.ey1);
            r.bound("ate", g.ate);
            r.bound("benefit_strict", g.benefit_strict);
            r.bound("benefit_weak", g.benefit_weak);
            for (name, b) in [("mobility", g.mobility), ("att1", g.att1), ("att0", g.att0)] {
                match b {
                    Some(b) => r.bound(name, b),
                    None => r.note(format!("{name}: conditioning event has zero probability")),
                }
            }
            r.detail("regret_by_z", &g.regret_by_z);
            r.detail("vertices", &g.joint_polytope.vertices());
        }
        Err(err) if err.is_model_rejection() => {
            let m = marginal_intervals(&e);
            r.bound("ey0", m.ey0);
            r.bound("ey1", m.ey1);
            r.bound("ate", m.ate);
            r.reject(err.to_string());
        }
        Err(err) => return Err(err.into()),
    }
    if let (Some(d), true) = (&data, c.bootstrap > 0) {
        binary_cis(&d.sample, c, r)?;
    }
    Ok(Emit::Report)
}

fn ci_bound(ci: &ConfidenceInterval, label: &str, level: f64) -> IntervalBound {
    IntervalBound::new(ci.lo, ci.hi, false, format!("{label}, {}% CI", num(100.0 * level)))
}

/// Intersection-bounds confidence intervals for binary micro-data.
fn binary_cis(s: &OutcomeSample, c: &Common, r: &mut Report) -> Result<(), CliError> {
    if c.bootstrap < 100 {
        return Err(CliError::Input(format!("--bootstrap {}: need at least 100 replications", c.bootstrap)));
    }
    let seed = seed(c);
    let theta = estimate_theta(s)?;
    let cv = critical_value(&theta, c.level, c.bootstrap, seed)?;
    let ci = assemble_cis(&theta, &cv);
    let mut named = vec![
        ("ey0_ci", "E[Y0]", Some(ci.ey0.clone())),
        ("ey1_ci", "E[Y1]", Some(ci.ey1.clone())),
        ("ate_ci", "E[Y1-Y0]", Some(ci.ate)),
        ("benefit_strict_ci", "P(Y1>Y0)", Some(ci.benefit_strict)),
        ("benefit_weak_ci", "P(Y1>=Y0)", Some(ci.benefit_weak)),
        ("mobility_ci", "P(Y1=1|Y0=0)", ci.mobility),
    ];
    let att = [
        ("att1_ci", "E[Y1-Y0|D=1]", att1_ci(&theta, &ci.ey0, c.level, c.bootstrap, seed)),
        ("att0_ci", "E[Y0-Y1|D=0]", att0_ci(&theta, &ci.ey1, c.level, c.bootstrap, seed)),
    ];
    for (name, label, v) in att {
        match v {
            Ok(v) => named.push((name, label, Some(v))),
            Err(RoyError::ZeroSectorProbability { d, z }) => r.note(format!("{name}: P(D={d}|z={z}) is zero")),
            Err(e) => return Err(e.into()),
        }
    }
    for (name, label, v) in named {
        match v {
            Some(v) => {
                if v.empty {
                    r.reject(format!("{name}: confidence interval is empty at level {}", c.level));
                }
                r.bound(name, ci_bound(&v, label, c.level));
            }
            None => r.note(format!("{name}: not defined for these data")),
        }
    }
    r.detail("critical_value", &cv);
    r.detail(
        "theta",
        &json!({ "labels": theta.labels, "weights": theta.weights, "n_eff": theta.n_eff, "theta": theta.theta, "se": theta.se }),
    );
    Ok(())
}

pub fn functional(a: &FunctionalArgs, r: &mut Report) -> Result<Emit, CliError> {
    let d = need_data(&a.common, r, &[])?;
    let c = build_subcdf(&d.sample)?;
    let mut at: Vec<f64> = if a.at.is_empty() {
        (1..10).map(|k| c.inv_f(k as f64 / 10.0)).collect()
    } else {
        a.at.clone()
    };
    if at.iter().any(|y| !y.is_finite()) {
        return Err(CliError::Input("--at: evaluation points must be finite".into()));
    }
    at.sort_by(f64::total_cmp);
    at.dedup();
    let mut intervals = vec![];
    let mut mobility = vec![];
    for sector in 0..=1u8 {
        let mut prev = f64::NEG_INFINITY;
        for &y in &at {
            r.bound(&format!("F{sector}({})", num(y)), peterson_bounds(&c, sector, y));
            intervals.push(json!({ "d": sector, "y1": num(prev), "y2": y, "lower": interval_lower_bound(&c, sector, prev, y)? }));
            prev = y;
        }
    }
    for &y in &at {
        mobility.push(json!({ "y": y, "upper": mobility_upper(&c, y).ok() }));
    }
    r.detail("interval_lower_bounds", &intervals);
    r.detail("mobility_upper", &mobility);
    r.detail("p_d1", &c.p_d(1));
    if let Some(raw) = &a.rect {
        let v: Vec<f64> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| {
            CliError::Input(format!("--rect {raw:?}: expected four numbers Y01,Y02,Y11,Y12"))
        })?;
        if v.len() != 4 || !(v[0] < v[1] && v[2] < v[3]) {
            return Err(CliError::Input(format!("--rect {raw:?}: need Y01 < Y02 and Y11 < Y12")));
        }
        let rect = RectUnion::rect(Rect::new(Interval::left_open(v[0], v[1]), Interval::left_open(v[2], v[3])));
        r.bound("joint_rect", joint_set_bounds(&c, &rect));
        r.detail("peterson_combination", &peterson_rectangle_upper(&c, v[0], v[1], v[2], v[3]));
    }
    Ok(Emit::Report)
}

fn iqr_section(s: &OutcomeSample, c: &Common, only: Option<u8>, lln: f64, with_ci: bool, r: &mut Report) -> Result<(), CliError> {
    let (q1, q2) = quantiles(c)?;
    let cdf = build_subcdf(s)?;
    let sectors: Vec<u8> = match only {
        Some(d) if d > 1 => return Err(CliError::Input(format!("--d {d}: must be 0 or 1"))),
        Some(d) => vec![d],
        None => vec![0, 1],
    };
    for d in sectors {
        if cdf.p_d(d) <= 0.0 {
            if only.is_some() {
                return Err(RoyError::EmptySector { d }.into());
            }
            r.note(format!("sector {d} has no observations; skipped"));
            continue;
        }
        r.bound(&format!("iqr{d}"), iqr_bounds(&cdf, d, q1, q2)?);
        r.detail(&format!("prop1_d{d}"), &proposition1_check(&cdf, d, q1, q2)?);
        if with_ci {
            let opts = IqrCiOptions { lln, ..IqrCiOptions::default() };
            let ci = iqr_ci(s, d, q1, q2, c.level, c.bootstrap, seed(c), opts)?;
            if ci.insufficient_sector_mass {
                r.note(format!("iqr{d}_ci: q1 is below P(D={}), upper endpoint unbounded", 1 - d));
            }
            let mut b = ci.interval.clone();
            b.label = format!("IQR of Y{d}, {}% CI", num(100.0 * c.level));
            r.bound(&format!("iqr{d}_ci"), b);
            r.detail(&format!("iqr{d}_ci"), &ci);
        }
    }
    r.detail("quantiles", &[q1, q2]);
    Ok(())
}

pub fn iqr(a: &IqrArgs, r: &mut Report) -> Result<Emit, CliError> {
    check_level(&a.common)?;
    let d = need_data(&a.common, r, &[])?;
    iqr_section(&d.sample, &a.common, a.sector_value, a.lln, a.common.bootstrap > 0, r)?;
    Ok(Emit::Report)
}

pub fn infer(a: &InferArgs, r: &mut Report) -> Result<Emit, CliError> {
    let c = &a.common;
    check_level(c)?;
    let d = need_data(c, r, &[])?;
    if d.sample.is_binary() {
        let t = d.sample.instrument_table()?;
        let m = marginal_intervals(&envelopes(&t));
        for (name, b) in [("ey0", m.ey0), ("ey1", m.ey1), ("ate", m.ate)] {
            if b.is_empty() {
                r.note(format!("{name}: point estimates cross; see the confidence interval"));
            }
            r.bound(name, b);
        }
        binary_cis(&d.sample, c, r)?;
    } else {
        if c.bootstrap < 2 {
            return Err(CliError::Input(format!("--bootstrap {}: need at least 2 replications", c.bootstrap)));
        }
        iqr_section(&d.sample, c, None, a.lln, true, r)?;
    }
    Ok(Emit::Report)
}

fn load_design(name: &str) -> Result<SimDesign, CliError> {
    let text = if Path::new(name).is_file() {
        std::fs::read_to_string(name).map_err(|e| CliError::Input(format!("--design {name}: {e}")))?
    } else {
        designs::builtin(name).map(str::to_string).ok_or_else(|| {
            CliError::Input(format!(
                "--design {name}: no such file or built-in design (built-ins: {})",
                designs::names().join(", ")
            ))
        })?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("--design {name}: {e}")))
}

pub fn simulate_cmd(a: &SimulateArgs, r: &mut Report) -> Result<Emit, CliError> {
    let mut design = load_design(&a.design)?;
    if let Some(n) = a.n {
        design.n = n;
    }
    if let Some(s) = a.common.seed {
        design.seed = s;
    }
    r.seed = Some(design.seed);
    let sim = simulate(&design).map_err(|e| CliError::Input(format!("--design {}: {e}", a.design)))?;
    let labels = design.labels();
    let mut w = csv::Writer::from_writer(vec![]);
    let with_z = design.instrument.is_some();
    let mut header = vec!["y", "d"];
    if with_z {
        header.push("z");
    }
    let io = |e: csv::Error| CliError::Input(format!("writing CSV: {e}"));
    w.write_record(&header).map_err(io)?;
    for draw in &sim.draws {
        let mut row = vec![draw.y.to_string(), draw.d.to_string()];
        if with_z {
            row.push(labels[draw.z].clone());
        }
        w.write_record(&row).map_err(io)?;
    }
    let csv_text = String::from_utf8(w.into_inner().map_err(|e| CliError::Input(e.to_string()))?)
        .expect("csv output is utf-8");
    let Some(out) = &a.common.out else {
        return Ok(Emit::Text(csv_text));
    };
    let truth_path: PathBuf = a.truth.clone().unwrap_or_else(|| out.with_extension("truth.json"));
    write_file(out, &csv_text)?;
    let mut truth = serde_json::to_string_pretty(&sim.truth).expect("truth serializes");
    truth.push('\n');
    write_file(&truth_path, &truth)?;
    r.input.source = format!("design:{}", design.name);
    r.input.rows = design.n;
    r.input.weight_total = design.n as f64;
    let t = &sim.truth;
    r.bound("ey0", IntervalBound::point(t.ey0, "E[Y0], truth"));
    r.bound("ey1", IntervalBound::point(t.ey1, "E[Y1], truth"));
    r.bound("ate", IntervalBound::point(t.ate, "E[Y1-Y0], truth"));
    r.bound("p_d1", IntervalBound::point(t.p_d1, "P(D=1), truth"));
    r.detail("design", &design);
    r.detail("files", &json!({ "data": out.display().to_string(), "truth": truth_path.display().to_string() }));
    Ok(Emit::ReportToStdout)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("--out {}: {e}", path.display())))
}

fn grid_disagreements(a: &roybounds::SimplexPolytope, b: &roybounds::SimplexPolytope, pts: &[[f64; 4]]) -> usize {
    par::map_slice(pts, |p| a.contains(p) != b.contains(p)).into_iter().filter(|x| *x).count()
}

const LP_TOL: f64 = 1e-8;

pub fn oracle(a: &OracleArgs, r: &mut Report) -> Result<Emit, CliError> {
    if a.grid == 0 {
        return Err(CliError::Input("--grid must be positive".into()));
    }
    let (t, _) = table_source(&a.common, r)?;
    let pts: Vec<[f64; 4]> = simplex_grid(a.grid).collect();
    let mut mismatches = 0;
    let mut per_z = BTreeMap::new();
    for p in t.points() {
        let q = &p.cells;
        let roy = grid_disagreements(&artstein_set(q, Variant::Roy), &sharp_bounds(q).polytope, &pts);
        let single = InstrumentTable::single(*q);
        let gen = grid_disagreements(
            &artstein_set(q, Variant::Generalized),
            &roybounds::generalized::joint_polytope(&single)?,
            &pts,
        );
        mismatches += roy + gen;
        per_z.insert(p.label.clone(), json!({ "roy": roy, "generalized": gen }));
    }
    r.detail("grid_points", &pts.len());
    r.detail("membership_disagreements", &per_z);
    if t.len() > MAX_INSTRUMENT_POINTS {
        r.note(format!("response-type LP skipped: more than {MAX_INSTRUMENT_POINTS} instrument values"));
    } else {
        let e = envelopes(&t);
        let closed = bp_marginal_bounds(&e).ok();
        let benefit = benefit_bounds(&e);
        let mut gaps = BTreeMap::new();
        for (name, coef) in [
            ("ey0", [0.0, 0.0, 1.0, 1.0]),
            ("ey1", [0.0, 1.0, 0.0, 1.0]),
            ("benefit_strict", [0.0, 1.0, 0.0, 0.0]),
            ("benefit_weak", [1.0, 1.0, 0.0, 1.0]),
        ] {
            let lp = response_type_lp(&t, coef)?;
            let cf = match name {
                "ey0" => closed.as_ref().map(|m| m.ey0.clone()),
                "ey1" => closed.as_ref().map(|m| m.ey1.clone()),
                "benefit_strict" => Some(benefit.strict.clone()),
                _ => Some(benefit.weak.clone()),
            };
            let gap = cf.map(|b| (b.lo - lp.lo).abs().max((b.hi - lp.hi).abs()));
            if gap.map_or(true, |g| g > LP_TOL) {
                mismatches += 1;
            }
            gaps.insert(name, gap);
            r.bound(&format!("{name}_lp"), lp);
        }
        r.detail("lp_gaps", &gaps);
    }
    if mismatches > 0 {
        r.status = "mismatch".into();
        r.note(format!("{mismatches} disagreements between closed forms and oracles"));
    }
    Ok(Emit::Report)
}
