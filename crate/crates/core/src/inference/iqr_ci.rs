use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Result, RoyError};
use crate::functional::{build_subcdf, iqr_bounds, iqr_objective, OutcomeSample, SubCdf};
use crate::probability::IntervalBound;
use crate::{par, rng};

use super::theta::order_statistic;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IqrCiOptions {
    /// Multiplier on `sqrt(ln ln n / n)` times the endpoint standard deviation.
    pub lln: f64,
    pub max_grid: usize,
    /// Draws in the Gaussian simulation for the critical value.
    pub draws: usize,
}

impl Default for IqrCiOptions {
    fn default() -> Self {
        IqrCiOptions { lln: 1.0, max_grid: 512, draws: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IqrCi {
    pub interval: IntervalBound,
    /// Point estimate of the sharp bounds.
    pub estimate: IntervalBound,
    pub c_alpha: f64,
    pub grid_size: usize,
    /// The `q1`-quantile is not bounded below, so the upper endpoint is `+inf`.
    pub insufficient_sector_mass: bool,
}

fn resample(s: &OutcomeSample, g: &mut rand_chacha::ChaCha8Rng) -> Result<SubCdf> {
    let recs = s.records();
    let n = recs.len();
    let mut idx: Vec<usize> = (0..n).map(|_| g.gen_range(0..n)).collect();
    idx.sort_unstable();
    SubCdf::from_sorted(idx.into_iter().map(|i| (recs[i].y, recs[i].d, recs[i].weight)))
}

fn sd(v: &[f64]) -> f64 {
    let f: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    if f.len() < 2 {
        return 0.0;
    }
    let m = f.iter().sum::<f64>() / f.len() as f64;
    (f.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (f.len() - 1) as f64).sqrt()
}

/// Confidence interval for the interquantile range of `Y_d`.
pub fn iqr_ci(
    s: &OutcomeSample,
    d: u8,
    q1: f64,
    q2: f64,
    level: f64,
    b: usize,
    seed: u64,
    opts: IqrCiOptions,
) -> Result<IqrCi> {
    if !(level > 0.0 && level < 1.0) || b < 2 {
        return Err(RoyError::InvalidArgument(format!("need level in (0, 1) and at least 2 replications, got {level}, {b}")));
    }
    let c = build_subcdf(s)?;
    let estimate = iqr_bounds(&c, d, q1, q2)?;
    let n = s.len() as f64;
    let rate = if n > std::f64::consts::E { (n.ln().ln().max(0.0) / n).sqrt() } else { 0.0 };

    let lower_stat = |c: &SubCdf| c.inv_upper(d, q2) - c.inv_f(q1);
    let reps: Vec<SubCdf> = par::map_range(b, |rep| {
        let mut g = rng::stream(seed, rng::BOOT_IQR, rep as u64);
        resample(s, &mut g)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    // lower endpoint: basic bootstrap on the difference of quantiles
    let t_hat = lower_stat(&c);
    let lower = if t_hat.is_finite() {
        let mut dev: Vec<f64> = reps
            .iter()
            .map(|r| lower_stat(r) - t_hat)
            .map(|v| if v.is_nan() { f64::INFINITY } else { v })
            .collect();
        (t_hat - order_statistic(&mut dev, level)).max(0.0)
    } else {
        0.0
    };

    let y_left = c.inv_upper(d, q1);
    if y_left == f64::NEG_INFINITY {
        return Ok(IqrCi {
            interval: IntervalBound::new(lower, f64::INFINITY, false, format!("IQR of Y{d}, {level} CI")),
            estimate,
            c_alpha: f64::NAN,
            grid_size: 0,
            insufficient_sector_mass: true,
        });
    }
    let left_sd = sd(&reps.iter().map(|r| r.inv_upper(d, q1)).collect::<Vec<_>>());
    let right_sd = sd(&reps.iter().map(|r| r.inv_f(q2)).collect::<Vec<_>>());
    let lo = y_left - opts.lln * rate * left_sd;
    let hi = c.inv_f(q2) + opts.lln * rate * right_sd;

    let mut grid: Vec<f64> = vec![lo];
    grid.extend(c.jump_points().iter().copied().filter(|&y| y > lo && y <= hi));
    if grid.len() > opts.max_grid {
        let m = grid.len();
        let keep = opts.max_grid;
        grid = (0..keep).map(|i| grid[i * (m - 1) / (keep - 1)]).collect();
        grid.dedup();
    }
    let gn = grid.len();
    let point: Vec<f64> = grid.iter().map(|&y| iqr_objective(&c, d, q1, q2, y)).collect();
    let mut boot = Array2::<f64>::zeros((b, gn));
    for (i, r) in reps.iter().enumerate() {
        for (j, &y) in grid.iter().enumerate() {
            boot[[i, j]] = iqr_objective(r, d, q1, q2, y);
        }
    }
    let mean = boot.mean_axis(ndarray::Axis(0)).expect("nonempty bootstrap");
    let mut sds = vec![0.0; gn];
    for j in 0..gn {
        let v = boot.column(j).iter().map(|x| (x - mean[j]).powi(2)).sum::<f64>() / (b - 1) as f64;
        sds[j] = v.sqrt();
    }
    // standardized deviations; columns with no variation contribute zero
    let mut dev = Array2::<f64>::zeros((b, gn));
    for i in 0..b {
        for j in 0..gn {
            if sds[j] > 0.0 {
                dev[[i, j]] = (boot[[i, j]] - mean[j]) / sds[j];
            }
        }
    }
    let r = opts.draws.max(1);
    let scale = 1.0 / ((b - 1) as f64).sqrt();
    let rows: Vec<Vec<f64>> = par::map_range(r, |k| {
        let mut g = rng::stream(seed, rng::MULTIPLIER, k as u64);
        (0..b).map(|_| g.sample::<f64, _>(StandardNormal) * scale).collect()
    });
    let mult = Array2::from_shape_vec((r, b), rows.into_iter().flatten().collect()).expect("shape");
    let sim = mult.dot(&dev);
    let mut maxima: Vec<f64> = sim
        .rows()
        .into_iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let c_alpha = order_statistic(&mut maxima, level);
    let upper = point
        .iter()
        .zip(&sds)
        .map(|(p, s)| p + c_alpha * s)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(lower);
    Ok(IqrCi {
        interval: IntervalBound::new(lower, upper, false, format!("IQR of Y{d}, {level} CI")),
        estimate,
        c_alpha,
        grid_size: gn,
        insufficient_sector_mass: false,
    })
}
