use proptest::prelude::*;

use roybounds::binary::sharp_bounds;
use roybounds::functional::{
    build_subcdf, interval_lower_bound, iqr_bounds, joint_set_bounds, peterson_bounds, upper_lower_sets, Interval, Rect,
    RectUnion,
};
use roybounds::generalized::{benefit_bounds, bp_marginal_bounds, envelopes, joint_polytope, marginal_intervals};
use roybounds::inference::{assemble_cis, critical_value, estimate_theta};
use roybounds::oracle::{artstein_set, random_type_table, response_type_lp, simulate, Variant};
use roybounds::oracle::{JointLaw, Marginal, SelectionRule, SimDesign};
use roybounds::probability::{polytope_extrema, simplex_grid};
use roybounds::{rng, CellProbs, InstrumentTable, OutcomeSample, Record, SimplexPolytope};

const EY0: [f64; 4] = [0.0, 0.0, 1.0, 1.0];
const EY1: [f64; 4] = [0.0, 1.0, 0.0, 1.0];

fn cells() -> impl Strategy<Value = CellProbs> {
    prop::array::uniform4(0.0f64..1.0).prop_filter("nonzero", |v| v.iter().sum::<f64>() > 1e-3).prop_map(|v| {
        let s: f64 = v.iter().sum();
        CellProbs::new(v[0] / s, v[1] / s, v[2] / s, v[3] / s).unwrap()
    })
}

fn fat_cells() -> impl Strategy<Value = CellProbs> {
    prop::array::uniform4(0.05f64..1.0).prop_map(|v| {
        let s: f64 = v.iter().sum();
        CellProbs::new(v[0] / s, v[1] / s, v[2] / s, v[3] / s).unwrap()
    })
}

fn table(k: usize) -> impl Strategy<Value = InstrumentTable> {
    any::<u64>().prop_map(move |seed| random_type_table(&mut rng::stream(seed, rng::DESIGN, 0), k).unwrap().1)
}

fn prefix(t: &InstrumentTable, m: usize) -> InstrumentTable {
    let c: Vec<CellProbs> = t.points()[..m].iter().map(|p| p.cells).collect();
    InstrumentTable::uniform(&c).unwrap()
}

fn value(c: [f64; 4], p: &[f64; 4]) -> f64 {
    c.iter().zip(p).map(|(a, b)| a * b).sum()
}

/// Exact extrema of `c` over the `1/n` grid points inside `poly`.
fn grid_extrema(poly: &SimplexPolytope, c: [f64; 4], n: i64) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let h = 1.0 / n as f64;
    for i in 0..=n {
        for j in 0..=n - i {
            let (p00, p01) = (i as f64 * h, j as f64 * h);
            let rest = n - i - j;
            let (mut kmin, mut kmax) = (0i64, rest);
            for hs in poly.halfspaces() {
                let a = hs.a;
                let coef = a[2] - a[3];
                let rhs = hs.b - a[0] * p00 - a[1] * p01 - a[3] * (1.0 - p00 - p01) + 1e-9;
                if coef.abs() < 1e-15 {
                    if rhs < 0.0 {
                        kmin = 1;
                        kmax = 0;
                    }
                } else if coef > 0.0 {
                    kmax = kmax.min((rhs / coef / h + 1e-6).floor() as i64);
                } else {
                    kmin = kmin.max((rhs / coef / h - 1e-6).ceil() as i64);
                }
            }
            for k in [kmin, kmax] {
                if kmin > kmax {
                    break;
                }
                let p10 = k as f64 * h;
                let p = [p00, p01, p10, 1.0 - p00 - p01 - p10];
                if poly.contains(&p) {
                    lo = lo.min(value(c, &p));
                    hi = hi.max(value(c, &p));
                }
            }
        }
    }
    (lo, hi)
}

fn roy_sample(seed: u64, n: usize, rho: f64) -> (OutcomeSample, Vec<roybounds::oracle::Draw>) {
    let d = SimDesign {
        name: "prop".into(),
        joint: JointLaw::GaussianCopula {
            rho,
            y0: Marginal::Normal { mean: 0.0, sd: 1.0 },
            y1: Marginal::Normal { mean: 0.3, sd: 1.5 },
            round_to: None,
        },
        tie_break: 0.5,
        instrument: None,
        selection: SelectionRule::Roy,
        n,
        seed,
    };
    let s = simulate(&d).unwrap();
    (s.sample, s.draws)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn clamped_intervals_stay_in_unit(q in cells()) {
        let b = sharp_bounds(&q);
        for iv in [&b.p10_bound, &b.p01_bound, &b.ey0_bound, &b.ey1_bound] {
            prop_assert!(iv.lo >= 0.0 && iv.hi <= 1.0 && iv.lo <= iv.hi);
        }
        let c = iv_clamp(q.q11 - 0.5, q.q10 + 0.5);
        prop_assert!(c.0 >= 0.0 && c.1 <= 1.0);
    }

    #[test]
    fn extrema_sit_on_vertices(q in fat_cells(), c in prop::array::uniform4(-1.0f64..1.0)) {
        let poly = joint_polytope(&InstrumentTable::single(q)).unwrap();
        let e = polytope_extrema(&poly, c).unwrap();
        let vals: Vec<f64> = poly.vertices().iter().map(|v| value(c, v)).collect();
        prop_assert!(vals.iter().any(|&v| v == e.lo) && vals.iter().any(|&v| v == e.hi));
        prop_assert!(poly.vertices().iter().all(|v| poly.contains(v)));
        let (glo, ghi) = grid_extrema(&poly, c, 1000);
        prop_assert!((glo - e.lo).abs() <= 2e-3 && (ghi - e.hi).abs() <= 2e-3, "{glo} {ghi} {e:?}");
    }

    #[test]
    fn roy_ate_matches_polytope(q in cells()) {
        let b = sharp_bounds(&q);
        let e = polytope_extrema(&b.polytope, [0.0, 1.0, -1.0, 0.0]).unwrap();
        prop_assert!((b.ate_bound.lo - e.lo).abs() < 1e-9 && (b.ate_bound.hi - e.hi).abs() < 1e-9);
        prop_assert!((b.ate_bound.lo - (b.ey1_bound.lo - b.ey0_bound.hi)).abs() < 1e-9);
    }

    #[test]
    fn roy_polytope_agrees_with_artstein(q in cells()) {
        let a = artstein_set(&q, Variant::Roy);
        let b = sharp_bounds(&q).polytope;
        prop_assert!(simplex_grid(20).all(|p| a.contains(&p) == b.contains(&p)));
    }

    #[test]
    fn generalized_contains_roy(q in cells()) {
        let g = joint_polytope(&InstrumentTable::single(q)).unwrap();
        prop_assert!(sharp_bounds(&q).polytope.vertices().iter().all(|v| g.contains(v)));
    }

    #[test]
    fn marginals_are_polytope_extrema(t in table(3)) {
        let poly = joint_polytope(&t).unwrap();
        let e = envelopes(&t);
        let m = bp_marginal_bounds(&e).unwrap();
        for (c, iv) in [(EY0, &m.ey0), (EY1, &m.ey1)] {
            let x = polytope_extrema(&poly, c).unwrap();
            prop_assert!((x.lo - iv.lo).abs() < 1e-9 && (x.hi - iv.hi).abs() < 1e-9);
        }
        let b = benefit_bounds(&e).strict;
        let x = polytope_extrema(&poly, [0.0, 1.0, 0.0, 0.0]).unwrap();
        prop_assert!((x.lo - b.lo).abs() < 1e-9 && (x.hi - b.hi).abs() < 1e-9, "{x:?} {b:?}");
    }

    #[test]
    fn two_point_tables_match_the_program(t in table(2)) {
        let m = bp_marginal_bounds(&envelopes(&t)).unwrap();
        for (c, iv) in [(EY0, &m.ey0), (EY1, &m.ey1)] {
            let lp = response_type_lp(&t, c).unwrap();
            prop_assert!((lp.lo - iv.lo).abs() < 1e-8 && (lp.hi - iv.hi).abs() < 1e-8);
        }
    }

    #[test]
    fn more_instrument_points_never_widen(t in table(4)) {
        let mut prev = marginal_intervals(&envelopes(&prefix(&t, 1)));
        let mut prev_b = benefit_bounds(&envelopes(&prefix(&t, 1)));
        for m in 2..=4 {
            let e = envelopes(&prefix(&t, m));
            let cur = marginal_intervals(&e);
            let cur_b = benefit_bounds(&e);
            for (a, b) in [(&prev.ey0, &cur.ey0), (&prev.ey1, &cur.ey1), (&prev.ate, &cur.ate), (&prev_b.strict, &cur_b.strict), (&prev_b.weak, &cur_b.weak)] {
                prop_assert!(b.lo >= a.lo - 1e-12 && b.hi <= a.hi + 1e-12);
            }
            prev = cur;
            prev_b = cur_b;
        }
    }

    #[test]
    fn functional_bounds_hold_for_hidden_potentials(seed in any::<u64>(), rho in -0.9f64..0.9) {
        let (s, draws) = roy_sample(seed, 400, rho);
        let c = build_subcdf(&s).unwrap();
        let n = draws.len() as f64;
        let pts: Vec<f64> = (0..10).map(|i| -2.5 + 0.5 * i as f64).collect();
        for d in 0..2u8 {
            let pot = |r: &roybounds::oracle::Draw| if d == 1 { r.y1 } else { r.y0 };
            for &y in &pts {
                let f = draws.iter().filter(|r| pot(r) <= y).count() as f64 / n;
                let b = peterson_bounds(&c, d, y);
                prop_assert!(b.lo <= f + 1e-12 && f <= b.hi + 1e-12);
            }
            for (i, &a) in pts.iter().enumerate() {
                for &b in &pts[i + 1..] {
                    let p = draws.iter().filter(|r| pot(r) > a && pot(r) <= b).count() as f64 / n;
                    prop_assert!(interval_lower_bound(&c, d, a, b).unwrap() <= p + 1e-12);
                }
            }
            let t = iqr_bounds(&c, d, 0.3, 0.7).unwrap();
            prop_assert!(t.lo <= t.hi);
        }
    }

    #[test]
    fn orthants_reproduce_pointwise_joint_bounds(seed in any::<u64>(), y0 in -2.0f64..2.0, y1 in -2.0f64..2.0) {
        let (s, _) = roy_sample(seed, 200, 0.3);
        let c = build_subcdf(&s).unwrap();
        let b = joint_set_bounds(&c, &RectUnion::rect(Rect::new(Interval::up_to(y0), Interval::up_to(y1))));
        prop_assert!((b.lo - c.f(y0.min(y1))).abs() < 1e-12);
        prop_assert!((b.hi - (c.lower(1, y1) + c.lower(0, y0)).min(1.0)).abs() < 1e-12);
    }

    #[test]
    fn lower_sets_are_dual_to_upper_sets(raw in prop::collection::vec((-3i32..3, 0i32..3, -3i32..3, 0i32..3, any::<[bool; 4]>()), 1..4)) {
        let rects: Vec<Rect> = raw
            .iter()
            .map(|&(a, w, b, v, cl)| {
                Rect::new(
                    Interval::new(a as f64, (a + w) as f64, cl[0], cl[1]),
                    Interval::new(b as f64, (b + v) as f64, cl[2], cl[3]),
                )
            })
            .collect();
        let a = RectUnion::from_rects(rects);
        let s = upper_lower_sets(&a);
        let sc = upper_lower_sets(&a.complement());
        let probes: Vec<f64> = (-16..=16).map(|i| i as f64 * 0.25).collect();
        for &y in &probes {
            prop_assert_eq!(s.l1.contains(y), !sc.u1.contains(y));
            prop_assert_eq!(s.l0.contains(y), !sc.u0.contains(y));
            // half-line oracle on the probe grid, plus a point far below
            let below: Vec<f64> = probes.iter().copied().filter(|&x| x <= y).chain([-100.0]).collect();
            prop_assert_eq!(s.u1.contains(y), below.iter().any(|&x| a.contains(x, y)));
            prop_assert_eq!(s.l0.contains(y), below.iter().all(|&x| a.contains(y, x)));
        }
    }

    #[test]
    fn iqr_collapses_without_other_sector(ys in prop::collection::vec(-5.0f64..5.0, 2..40), q1 in 0.05f64..0.45, gap in 0.05f64..0.5) {
        let s = OutcomeSample::new(ys.iter().map(|&y| Record::new(y, 1)).collect()).unwrap();
        let b = iqr_bounds(&build_subcdf(&s).unwrap(), 1, q1, q1 + gap).unwrap();
        prop_assert_eq!(b.lo, b.hi);
    }
}

fn iv_clamp(lo: f64, hi: f64) -> (f64, f64) {
    let b = roybounds::IntervalBound::new(lo, hi, true, "x").clamped(0.0, 1.0);
    (b.lo, b.hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn confidence_intervals_contain_estimates(seed in any::<u64>()) {
        let t = random_type_table(&mut rng::stream(seed, rng::DESIGN, 0), 3).unwrap().1;
        let mut g = rng::stream(seed, rng::DESIGN, 1);
        let recs: Vec<Record> = (0..900)
            .map(|i| {
                let p = &t.points()[i % 3];
                let u: f64 = rand::Rng::gen(&mut g);
                let q = p.cells.as_array();
                let cell = if u < q[0] { 0 } else if u < q[0] + q[1] { 1 } else if u < q[0] + q[1] + q[2] { 2 } else { 3 };
                Record::new((cell / 2) as f64, (cell % 2) as u8).with_z(p.label.clone())
            })
            .collect();
        let s = OutcomeSample::new(recs).unwrap();
        let th = estimate_theta(&s).unwrap();
        let m = marginal_intervals(&envelopes(&th.table().unwrap()));
        let a = assemble_cis(&th, &critical_value(&th, 0.95, 200, seed).unwrap());
        let b = assemble_cis(&th, &critical_value(&th, 0.99, 200, seed).unwrap());
        prop_assert!(a.ey0.lo <= m.ey0.lo.max(0.0) + 1e-12 && a.ey0.hi >= m.ey0.hi.min(1.0) - 1e-12);
        prop_assert!(a.ey1.lo <= m.ey1.lo.max(0.0) + 1e-12 && a.ey1.hi >= m.ey1.hi.min(1.0) - 1e-12);
        prop_assert!(b.ey0.lo <= a.ey0.lo && b.ey0.hi >= a.ey0.hi && b.ey1.lo <= a.ey1.lo && b.ey1.hi >= a.ey1.hi);
        prop_assert_eq!(a, assemble_cis(&th, &critical_value(&th, 0.95, 200, seed).unwrap()));
    }
}
