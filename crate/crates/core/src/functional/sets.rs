//! Interval unions on the line, rectangle unions in the `(y0, y1)` plane, and
//! the upper and lower sets of a rectangle union.
//!
//! The finite endpoints of a rectangle union cut the line into atoms: the
//! endpoints themselves and the open gaps between them. The union is a union
//! of atom products, and the half-lines `(-inf, y] x {y}` and `{y} x (-inf, y]`
//! meet or sit inside it depending only on the atom holding `y`. Upper and lower
//! sets are therefore computed exactly on atoms.

use serde::{Deserialize, Serialize};

/// Interval over the extended reals. Infinite endpoints are always open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "crate::extf64")]
    pub lo: f64,
    #[serde(with = "crate::extf64")]
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, true)
    }

    /// `(lo, hi]`
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, false, true)
    }

    /// `(-inf, hi]`
    pub fn up_to(hi: f64) -> Self {
        Self::new(f64::NEG_INFINITY, hi, false, true)
    }

    pub fn real_line() -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY, false, false)
    }

    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }
}

/// Sorted, disjoint, non-adjacent intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    parts: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.parts.iter().any(|i| i.contains(x))
    }
}

/// Axis-aligned rectangle `y0-range x y1-range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub y0: Interval,
    pub y1: Interval,
}

impl Rect {
    pub fn new(y0: Interval, y1: Interval) -> Self {
        Rect { y0, y1 }
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        self.y0.contains(a) && self.y1.contains(b)
    }

    pub fn is_empty(&self) -> bool {
        self.y0.is_empty() || self.y1.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RectUnion {
    rects: Vec<Rect>,
}

impl RectUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn plane() -> Self {
        Self::from_rects(vec![Rect::new(Interval::real_line(), Interval::real_line())])
    }

    /// Drops empty rectangles and exact duplicates.
    pub fn from_rects(rects: Vec<Rect>) -> Self {
        let mut out: Vec<Rect> = Vec::new();
        for r in rects {
            if !r.is_empty() && !out.contains(&r) {
                out.push(r);
            }
        }
        RectUnion { rects: out }
    }

    pub fn rect(r: Rect) -> Self {
        Self::from_rects(vec![r])
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        self.rects.iter().any(|r| r.contains(a, b))
    }

    /// Complement in the plane, as a union of atom products.
    pub fn complement(&self) -> RectUnion {
        let atoms = Atoms::of(self);
        let cover = atoms.cover(self);
        let n = atoms.len();
        let mut rects = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if !cover[i][j] {
                    rects.push(Rect::new(atoms.interval(i, i), atoms.interval(j, j)));
                }
            }
        }
        RectUnion::from_rects(rects)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperLowerSets {
    pub u0: IntervalUnion,
    pub u1: IntervalUnion,
    pub l0: IntervalUnion,
    pub l1: IntervalUnion,
}

/// Elementary pieces of the line cut at the finite breakpoints: atom `2k` is
/// the open gap below breakpoint `k`, atom `2k+1` is breakpoint `k` itself.
struct Atoms {
    cuts: Vec<f64>,
}

impl Atoms {
    fn of(a: &RectUnion) -> Self {
        let mut cuts: Vec<f64> = a
            .rects
            .iter()
            .flat_map(|r| [r.y0.lo, r.y0.hi, r.y1.lo, r.y1.hi])
            .filter(|x| x.is_finite())
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        Atoms { cuts }
    }

    fn len(&self) -> usize {
        2 * self.cuts.len() + 1
    }

    fn bounds(&self, atom: usize) -> (f64, f64) {
        let m = self.cuts.len();
        if atom % 2 == 1 {
            let c = self.cuts[atom / 2];
            (c, c)
        } else {
            let k = atom / 2;
            let lo = if k == 0 { f64::NEG_INFINITY } else { self.cuts[k - 1] };
            let hi = if k == m { f64::INFINITY } else { self.cuts[k] };
            (lo, hi)
        }
    }

    /// A point inside the atom.
    fn rep(&self, atom: usize) -> f64 {
        match self.bounds(atom) {
            (a, b) if a == b => a,
            (a, b) if a.is_finite() && b.is_finite() => 0.5 * (a + b),
            (a, _) if a.is_finite() => a + 1.0,
            (_, b) if b.is_finite() => b - 1.0,
            _ => 0.0,
        }
    }

    /// Interval spanning atoms `first..=last`.
    fn interval(&self, first: usize, last: usize) -> Interval {
        let (lo, _) = self.bounds(first);
        let (_, hi) = self.bounds(last);
        Interval::new(lo, hi, first % 2 == 1, last % 2 == 1)
    }

    fn cover(&self, a: &RectUnion) -> Vec<Vec<bool>> {
        let reps: Vec<f64> = (0..self.len()).map(|i| self.rep(i)).collect();
        reps.iter()
            .map(|&x| reps.iter().map(|&y| a.contains(x, y)).collect())
            .collect()
    }

    fn union(&self, member: &[bool]) -> IntervalUnion {
        let mut parts = Vec::new();
        let mut start: Option<usize> = None;
        for (i, &m) in member.iter().chain(std::iter::once(&false)).enumerate() {
            match (m, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    parts.push(self.interval(s, i - 1));
                    start = None;
                }
                _ => {}
            }
        }
        IntervalUnion { parts }
    }
}

/// `U_{A,1} = {y : ((-inf, y] x {y}) ∩ A ≠ ∅}`, `L_{A,1} = {y : (-inf, y] x {y} ⊆ A}`
/// and the mirrored sets for sector 0.
pub fn upper_lower_sets(a: &RectUnion) -> UpperLowerSets {
    let atoms = Atoms::of(a);
    let cover = atoms.cover(a);
    let n = atoms.len();
    let u1: Vec<bool> = (0..n).map(|j| (0..=j).any(|i| cover[i][j])).collect();
    let l1: Vec<bool> = (0..n).map(|j| (0..=j).all(|i| cover[i][j])).collect();
    let u0: Vec<bool> = (0..n).map(|i| (0..=i).any(|j| cover[i][j])).collect();
    let l0: Vec<bool> = (0..n).map(|i| (0..=i).all(|j| cover[i][j])).collect();
    UpperLowerSets {
        u0: atoms.union(&u0),
        u1: atoms.union(&u1),
        l0: atoms.union(&l0),
        l1: atoms.union(&l1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NEG: f64 = f64::NEG_INFINITY;

    #[test]
    fn lower_orthant() {
        let a = RectUnion::rect(Rect::new(Interval::up_to(2.0), Interval::up_to(3.0)));
        let s = upper_lower_sets(&a);
        assert_eq!(s.u1.parts(), &[Interval::up_to(3.0)]);
        assert_eq!(s.u0.parts(), &[Interval::up_to(2.0)]);
        assert_eq!(s.l1.parts(), &[Interval::up_to(2.0)]);
        assert_eq!(s.l0.parts(), &[Interval::up_to(2.0)]);
    }

    #[test]
    fn plane() {
        let s = upper_lower_sets(&RectUnion::plane());
        for u in [&s.u0, &s.u1, &s.l0, &s.l1] {
            assert_eq!(u.parts(), &[Interval::real_line()]);
        }
    }

    #[test]
    fn staggered_rectangle() {
        let a = RectUnion::rect(Rect::new(Interval::left_open(0.0, 2.0), Interval::left_open(1.0, 3.0)));
        let s = upper_lower_sets(&a);
        assert_eq!(s.u1.parts(), &[Interval::left_open(1.0, 3.0)]);
        assert_eq!(s.u0.parts(), &[Interval::left_open(1.0, 2.0)]);
        assert!(s.l0.is_empty() && s.l1.is_empty());
    }

    #[test]
    fn stacked_rectangles_cover_half_lines() {
        let a = RectUnion::from_rects(vec![
            Rect::new(Interval::up_to(0.0), Interval::real_line()),
            Rect::new(Interval::left_open(0.0, 5.0), Interval::real_line()),
        ]);
        let s = upper_lower_sets(&a);
        assert_eq!(s.l1.parts(), &[Interval::up_to(5.0)]);
        assert_eq!(s.l0.parts(), &[Interval::up_to(5.0)]);
    }

    #[test]
    fn open_endpoints_propagate() {
        let a = RectUnion::rect(Rect::new(
            Interval::new(NEG, 1.0, false, false),
            Interval::closed(0.0, 4.0),
        ));
        let s = upper_lower_sets(&a);
        assert_eq!(s.l1.parts(), &[Interval::new(0.0, 1.0, true, false)]);
        assert!(s.l1.contains(0.5) && !s.l1.contains(1.0));
    }

    #[test]
    fn complement_roundtrip() {
        let a = RectUnion::from_rects(vec![
            Rect::new(Interval::closed(0.0, 2.0), Interval::left_open(1.0, 3.0)),
            Rect::new(Interval::up_to(-1.0), Interval::up_to(0.5)),
        ]);
        let c = a.complement();
        for x in [-3.0, -1.0, -0.5, 0.0, 1.0, 2.0, 2.5] {
            for y in [-1.0, 0.5, 0.7, 1.0, 2.0, 3.0, 4.0] {
                assert_ne!(a.contains(x, y), c.contains(x, y), "({x},{y})");
            }
        }
    }
}
