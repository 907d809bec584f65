use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use roybounds::binary::sharp_bounds;
use roybounds::functional::OutcomeSample;
use roybounds::inference::{critical_value, estimate_theta};
use roybounds::oracle::{artstein_set, simulate, JointLaw, Marginal, SelectionRule, SimDesign, Variant};
use roybounds::probability::simplex_grid;
use roybounds::{par, CellProbs, Record};

fn grid_scan() -> usize {
    let q = CellProbs::new(0.2, 0.1, 0.3, 0.4).unwrap();
    let a = artstein_set(&q, Variant::Roy);
    let b = sharp_bounds(&q).polytope;
    let pts: Vec<[f64; 4]> = simplex_grid(60).collect();
    par::map_slice(&pts, |p| (a.contains(p) != b.contains(p)) as usize).into_iter().sum()
}

fn design() -> SimDesign {
    SimDesign {
        name: "bench".into(),
        joint: JointLaw::GaussianCopula {
            rho: 0.5,
            y0: Marginal::Normal { mean: 0.0, sd: 1.0 },
            y1: Marginal::LogNormal { mu: 0.0, sigma: 0.4 },
            round_to: None,
        },
        tie_break: 0.5,
        instrument: None,
        selection: SelectionRule::Roy,
        n: 200_000,
        seed: 1,
    }
}

fn binary_sample() -> OutcomeSample {
    let recs = (0..5000)
        .map(|i| Record::new(((i * 7) % 10 < 6) as u8 as f64, ((i * 3) % 5 < 2) as u8).with_z(format!("z{}", i % 4)))
        .collect();
    OutcomeSample::new(recs).unwrap()
}

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("parallel_vs_sequential");
    g.sample_size(10);
    let theta = estimate_theta(&binary_sample()).unwrap();
    let d = design();
    for (mode, seq) in [("parallel", false), ("sequential", true)] {
        par::set_sequential(seq);
        g.bench_function(BenchmarkId::new("grid_scan", mode), |b| b.iter(grid_scan));
        g.bench_function(BenchmarkId::new("simulate", mode), |b| b.iter(|| simulate(&d).unwrap().draws.len()));
        g.bench_function(BenchmarkId::new("bootstrap", mode), |b| {
            b.iter(|| critical_value(&theta, 0.95, 499, 3).unwrap().k)
        });
    }
    par::set_sequential(false);
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
