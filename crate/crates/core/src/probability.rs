//! Probability records and halfspace polytopes on the 3-simplex.
//!
//! Joint laws of `(Y0, Y1)` and observed cell laws of `(Y, D)` are both stored
//! as 4-vectors ordered `(00, 01, 10, 11)`. Identified sets are
//! [`SimplexPolytope`]s: a list of halfspaces `a·p <= b` intersected with the
//! simplex `p >= 0, sum(p) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RoyError};

/// Slack allowed when checking constraints.
pub const CONSTRAINT_TOL: f64 = 1e-9;
/// Slack allowed on total mass.
pub const NORM_TOL: f64 = 1e-12;

/// Observed cell law `q_ij = P(Y=i, D=j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellProbs {
    pub q00: f64,
    pub q01: f64,
    pub q10: f64,
    pub q11: f64,
}

impl CellProbs {
    pub fn new(q00: f64, q01: f64, q10: f64, q11: f64) -> Result<Self> {
        validate_cells([q00, q01, q10, q11])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.q00, self.q01, self.q10, self.q11]
    }

    /// P(Y=1)
    pub fn p_y1(&self) -> f64 {
        self.q10 + self.q11
    }

    /// P(Y=0)
    pub fn p_y0(&self) -> f64 {
        self.q00 + self.q01
    }

    /// P(D=1)
    pub fn p_d1(&self) -> f64 {
        self.q01 + self.q11
    }

    /// P(D=0)
    pub fn p_d0(&self) -> f64 {
        self.q00 + self.q10
    }
}

/// Check and renormalize raw cell masses.
pub fn validate_cells(raw: [f64; 4]) -> Result<CellProbs> {
    let v = validate_mass(raw)?;
    Ok(CellProbs { q00: v[0], q01: v[1], q10: v[2], q11: v[3] })
}

fn validate_mass(raw: [f64; 4]) -> Result<[f64; 4]> {
    for (index, &value) in raw.iter().enumerate() {
        if !value.is_finite() || value < -NORM_TOL {
            return Err(RoyError::NegativeMass { index, value });
        }
    }
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > CONSTRAINT_TOL {
        return Err(RoyError::NotNormalized { sum });
    }
    Ok(raw.map(|x| x.max(0.0) / sum))
}

/// One support point of an instrument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentPoint {
    pub label: String,
    pub cells: CellProbs,
    pub weight: f64,
}

/// Cell laws `q_ij(z)` over a finite instrument support with weights `P(Z=z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentTable {
    points: Vec<InstrumentPoint>,
}

impl InstrumentTable {
    pub fn new(mut points: Vec<InstrumentPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(RoyError::InvalidTable("no instrument points".into()));
        }
        let mut labels: Vec<&str> = points.iter().map(|p| p.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(RoyError::InvalidTable(format!("duplicate label {}", w[0])));
        }
        let mut total = 0.0;
        for p in &points {
            if !(p.weight > 0.0) || !p.weight.is_finite() {
                return Err(RoyError::InvalidTable(format!(
                    "weight of {} must be positive",
                    p.label
                )));
            }
            total += p.weight;
        }
        if (total - 1.0).abs() > CONSTRAINT_TOL {
            return Err(RoyError::InvalidTable(format!("weights sum to {total}")));
        }
        for p in &mut points {
            p.weight /= total;
            p.cells = validate_cells(p.cells.as_array())?;
        }
        Ok(InstrumentTable { points })
    }

    /// Table with a single instrument value.
    pub fn single(cells: CellProbs) -> Self {
        InstrumentTable {
            points: vec![InstrumentPoint { label: "all".into(), cells, weight: 1.0 }],
        }
    }

    /// Equally weighted table from a list of cells, labelled `z1, z2, ...`.
    pub fn uniform(cells: &[CellProbs]) -> Result<Self> {
        let w = 1.0 / cells.len().max(1) as f64;
        Self::new(
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| InstrumentPoint { label: format!("z{}", i + 1), cells: *c, weight: w })
                .collect(),
        )
    }

    pub fn points(&self) -> &[InstrumentPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&InstrumentPoint> {
        self.points.iter().find(|p| p.label == label)
    }

    /// Cells integrated over the instrument law.
    pub fn pooled(&self) -> CellProbs {
        let mut acc = [0.0; 4];
        for p in &self.points {
            for (a, q) in acc.iter_mut().zip(p.cells.as_array()) {
                *a += p.weight * q;
            }
        }
        let s: f64 = acc.iter().sum();
        let v = acc.map(|x| x / s);
        CellProbs { q00: v[0], q01: v[1], q10: v[2], q11: v[3] }
    }
}

/// Joint law `p_ij = P(Y0=i, Y1=j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialJoint {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl PotentialJoint {
    pub fn new(p00: f64, p01: f64, p10: f64, p11: f64) -> Result<Self> {
        Self::from_array([p00, p01, p10, p11])
    }

    pub fn from_array(raw: [f64; 4]) -> Result<Self> {
        let v = validate_mass(raw)?;
        Ok(PotentialJoint { p00: v[0], p01: v[1], p10: v[2], p11: v[3] })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p00, self.p01, self.p10, self.p11]
    }

    pub fn ey0(&self) -> f64 {
        self.p10 + self.p11
    }

    pub fn ey1(&self) -> f64 {
        self.p01 + self.p11
    }
}

/// Closed interval with a sharpness tag and a provenance label.
///
/// Crossed intervals (`lo > hi`) are representable so that model-rejection
/// findings can be reported; see [`IntervalBound::is_empty`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalBound {
    #[serde(with = "crate::extf64")]
    pub lo: f64,
    #[serde(with = "crate::extf64")]
    pub hi: f64,
    pub sharp: bool,
    pub label: String,
}

impl IntervalBound {
    pub fn new(lo: f64, hi: f64, sharp: bool, label: impl Into<String>) -> Self {
        IntervalBound { lo, hi, sharp, label: label.into() }
    }

    pub fn sharp(lo: f64, hi: f64, label: impl Into<String>) -> Self {
        Self::new(lo, hi, true, label)
    }

    pub fn point(v: f64, label: impl Into<String>) -> Self {
        Self::new(v, v, true, label)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi + NORM_TOL
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    /// `other ⊆ self` up to `tol`.
    pub fn covers(&self, other: &IntervalBound, tol: f64) -> bool {
        self.lo <= other.lo + tol && other.hi <= self.hi + tol
    }

    /// Clamp both endpoints into `[min, max]`.
    pub fn clamped(mut self, min: f64, max: f64) -> Self {
        self.lo = self.lo.clamp(min, max);
        self.hi = self.hi.clamp(min, max);
        self
    }
}

/// `a·p <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub a: [f64; 4],
    pub b: f64,
}

impl Halfspace {
    pub fn holds(&self, p: &[f64; 4], tol: f64) -> bool {
        dot(&self.a, p) <= self.b + tol
    }

    /// True when every point of the simplex satisfies the constraint.
    pub fn is_trivial(&self) -> bool {
        self.a.iter().cloned().fold(f64::NEG_INFINITY, f64::max) <= self.b + NORM_TOL
    }
}

/// Halfspace description of a subset of the 3-simplex.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimplexPolytope {
    halfspaces: Vec<Halfspace>,
}

impl SimplexPolytope {
    /// The whole simplex.
    pub fn full() -> Self {
        Self::default()
    }

    pub fn dimension(&self) -> usize {
        3
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// Add `a·p <= b`, dropping it when it cuts nothing off the simplex.
    pub fn at_most(&mut self, a: [f64; 4], b: f64) -> &mut Self {
        let h = Halfspace { a, b };
        if !h.is_trivial() {
            self.halfspaces.push(h);
        }
        self
    }

    /// Add `a·p >= b`.
    pub fn at_least(&mut self, a: [f64; 4], b: f64) -> &mut Self {
        self.at_most(a.map(|x| -x), -b)
    }

    /// Add `a·p = b` as two inequalities.
    pub fn equal_to(&mut self, a: [f64; 4], b: f64) -> &mut Self {
        self.at_most(a, b);
        self.at_least(a, b)
    }

    pub fn intersect(&self, other: &SimplexPolytope) -> SimplexPolytope {
        let mut halfspaces = self.halfspaces.clone();
        halfspaces.extend_from_slice(&other.halfspaces);
        SimplexPolytope { halfspaces }
    }

    /// Membership of an arbitrary point of the simplex.
    pub fn contains(&self, p: &[f64; 4]) -> bool {
        self.halfspaces.iter().all(|h| h.holds(p, CONSTRAINT_TOL))
    }

    /// All vertices, by solving every triple of active facets together with
    /// `sum(p) = 1`.
    pub fn vertices(&self) -> Vec<[f64; 4]> {
        let mut rows: Vec<Halfspace> = self.halfspaces.clone();
        for k in 0..4 {
            let mut a = [0.0; 4];
            a[k] = -1.0;
            rows.push(Halfspace { a, b: 0.0 });
        }
        let m = rows.len();
        let mut out: Vec<[f64; 4]> = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    let mat = [rows[i].a, rows[j].a, rows[k].a, [1.0; 4]];
                    let rhs = [rows[i].b, rows[j].b, rows[k].b, 1.0];
                    let Some(p) = solve4(mat, rhs) else { continue };
                    let feasible = p.iter().all(|&x| x >= -CONSTRAINT_TOL)
                        && rows.iter().all(|h| h.holds(&p, CONSTRAINT_TOL));
                    if feasible && !out.iter().any(|v| dist(v, &p) < CONSTRAINT_TOL) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    pub fn is_feasible(&self) -> bool {
        !self.vertices().is_empty()
    }
}

/// `[min, max]` of `c·p` over the polytope.
pub fn polytope_extrema(poly: &SimplexPolytope, c: [f64; 4]) -> Result<IntervalBound> {
    let vs = poly.vertices();
    if vs.is_empty() {
        return Err(RoyError::Infeasible);
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in &vs {
        let x = dot(&c, v);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok(IntervalBound::sharp(lo, hi, "polytope extrema"))
}

pub fn membership(poly: &SimplexPolytope, p: &PotentialJoint) -> bool {
    poly.contains(&p.as_array())
}

/// Lattice points of the simplex with spacing `1/steps`, as integer
/// compositions of `steps` into four parts.
pub fn simplex_grid(steps: u32) -> impl Iterator<Item = [f64; 4]> {
    let s = steps as f64;
    (0..=steps).flat_map(move |i| {
        (0..=steps - i).flat_map(move |j| {
            (0..=steps - i - j).map(move |k| {
                let l = steps - i - j - k;
                [i as f64 / s, j as f64 / s, k as f64 / s, l as f64 / s]
            })
        })
    })
}

pub(crate) fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

fn dist(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve4(mut m: [[f64; 4]; 4], mut r: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in (col + 1)..4 {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for c in col..4 {
                    m[row][c] -= f * m[col][c];
                }
                r[row] -= f * r[col];
            }
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut s = r[row];
        for c in (row + 1)..4 {
            s -= m[row][c] * x[c];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validate_examples() {
        let q = validate_cells([0.2, 0.1, 0.3, 0.4]).unwrap();
        assert_abs_diff_eq!(q.q10, 0.3, epsilon = 1e-15);
        let u = validate_cells([0.25; 4]).unwrap();
        assert_eq!(u.as_array(), [0.25; 4]);
        assert!(matches!(
            validate_cells([0.5, 0.5, 0.1, 0.0]),
            Err(RoyError::NotNormalized { .. })
        ));
        assert!(matches!(
            validate_cells([0.6, 0.5, -0.1, 0.0]),
            Err(RoyError::NegativeMass { index: 2, .. })
        ));
    }

    #[test]
    fn renormalizes_small_drift() {
        let q = validate_cells([0.2, 0.1, 0.3, 0.4 + 5e-10]).unwrap();
        assert!((q.as_array().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extrema_full_simplex() {
        let b = polytope_extrema(&SimplexPolytope::full(), [0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!((b.lo, b.hi), (0.0, 1.0));
    }

    #[test]
    fn extrema_ey0_direction() {
        let mut p = SimplexPolytope::full();
        p.at_most([0.0, 0.0, 1.0, 0.0], 0.3)
            .at_most([0.0, 1.0, 0.0, 0.0], 0.4)
            .equal_to([1.0, 0.0, 0.0, 0.0], 0.3);
        let b = polytope_extrema(&p, [0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(b.lo, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(b.hi, 0.7, epsilon = 1e-12);
        // dense grid at step 1e-3 restricted to the p00 = 0.3 slice
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=700u32 {
            for j in 0..=(700 - i) {
                let pt = [0.3, i as f64 / 1000.0, j as f64 / 1000.0, (700 - i - j) as f64 / 1000.0];
                if p.contains(&pt) {
                    lo = f64::min(lo, pt[2] + pt[3]);
                    hi = f64::max(hi, pt[2] + pt[3]);
                }
            }
        }
        assert!((lo - b.lo).abs() < 2e-3 && (hi - b.hi).abs() < 2e-3);
    }

    #[test]
    fn contradictory_is_infeasible() {
        let mut p = SimplexPolytope::full();
        p.at_most([1.0, 0.0, 0.0, 0.0], 0.1).at_least([1.0, 0.0, 0.0, 0.0], 0.2);
        assert_eq!(polytope_extrema(&p, [1.0; 4]), Err(RoyError::Infeasible));
        assert!(!p.is_feasible());
    }

    #[test]
    fn membership_examples() {
        let any = PotentialJoint::new(0.1, 0.2, 0.3, 0.4).unwrap();
        assert!(membership(&SimplexPolytope::full(), &any));
        let mut p = SimplexPolytope::full();
        p.at_most([0.0, 0.0, 1.0, 0.0], 0.3);
        assert!(!membership(&p, &PotentialJoint::new(0.3, 0.0, 0.31, 0.39).unwrap()));
        let mut e = SimplexPolytope::full();
        e.equal_to([1.0, 0.0, 0.0, 0.0], 0.3);
        assert_eq!(e.halfspaces().len(), 2);
        assert!(membership(&e, &PotentialJoint::new(0.3, 0.2, 0.1, 0.4).unwrap()));
    }

    #[test]
    fn trivial_halfspaces_are_dropped() {
        let mut p = SimplexPolytope::full();
        p.at_most([1.0, 1.0, 0.0, 0.0], 1.0).at_most([0.0, 0.0, 0.0, 1.0], 1.2);
        assert!(p.halfspaces().is_empty());
    }

    #[test]
    fn grid_size() {
        assert_eq!(simplex_grid(100).count(), 176_851);
        assert!(simplex_grid(10).all(|p| (p.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn pooled_uses_weights() {
        let t = InstrumentTable::new(vec![
            InstrumentPoint {
                label: "a".into(),
                cells: CellProbs::new(0.1, 0.2, 0.3, 0.4).unwrap(),
                weight: 0.25,
            },
            InstrumentPoint {
                label: "b".into(),
                cells: CellProbs::new(0.4, 0.3, 0.2, 0.1).unwrap(),
                weight: 0.75,
            },
        ])
        .unwrap();
        assert_abs_diff_eq!(t.pooled().q00, 0.325, epsilon = 1e-12);
        assert!(InstrumentTable::uniform(&[t.points()[0].cells, t.points()[0].cells]).is_ok());
    }
}
