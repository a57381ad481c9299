//! Orientation-preserving piecewise-linear homeomorphisms of `[0, 1]` with
//! rational breakpoints.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intervals::{Interval, IntervalSet};
use crate::num::Rational;
use crate::words::{Acts, GroupElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlError {
    #[error("breakpoints must start at (0,0) and end at (1,1)")]
    EndpointViolation,
    #[error("breakpoints must be strictly increasing in both coordinates (at index {0})")]
    NonMonotone(usize),
    #[error("{0} lies outside [0, 1]")]
    Domain(Rational),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// An element of PL(I), stored as its canonical breakpoint list: `(0,0)`
/// first, `(1,1)` last, both coordinates strictly increasing and no interior
/// breakpoint collinear with its neighbours. Structural equality is therefore
/// equality of maps.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PlRepr", into = "PlRepr")]
pub struct PlMap {
    points: Vec<(Rational, Rational)>,
}

#[derive(Serialize, Deserialize)]
struct PlRepr {
    breakpoints: Vec<(Rational, Rational)>,
}

impl TryFrom<PlRepr> for PlMap {
    type Error = PlError;
    fn try_from(r: PlRepr) -> Result<Self, PlError> {
        PlMap::new(r.breakpoints)
    }
}

impl From<PlMap> for PlRepr {
    fn from(m: PlMap) -> Self {
        PlRepr { breakpoints: m.points }
    }
}

fn collinear(p: &(Rational, Rational), q: &(Rational, Rational), r: &(Rational, Rational)) -> bool {
    (&q.1 - &p.1) * (&r.0 - &q.0) == (&r.1 - &q.1) * (&q.0 - &p.0)
}

fn prune_collinear(points: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(points.len());
    for p in points {
        while out.len() >= 2 && collinear(&out[out.len() - 2], &out[out.len() - 1], &p) {
            out.pop();
        }
        out.push(p);
    }
    out
}

/// Linear interpolation through `(x0, y0)` and `(x1, y1)` at `x`.
fn lerp(p0: &(Rational, Rational), p1: &(Rational, Rational), x: &Rational) -> Rational {
    if x == &p0.0 {
        return p0.1.clone();
    }
    &p0.1 + (&p1.1 - &p0.1) * (x - &p0.0) / (&p1.0 - &p0.0)
}

impl PlMap {
    /// Validates and canonicalizes a breakpoint list.
    pub fn new(pairs: Vec<(Rational, Rational)>) -> Result<Self, PlError> {
        let (first, last) = match (pairs.first(), pairs.last()) {
            (Some(f), Some(l)) if pairs.len() >= 2 => (f, l),
            _ => return Err(PlError::EndpointViolation),
        };
        if !first.0.is_zero() || !first.1.is_zero() || !last.0.is_one() || !last.1.is_one() {
            return Err(PlError::EndpointViolation);
        }
        for (i, w) in pairs.windows(2).enumerate() {
            if w[0].0 >= w[1].0 || w[0].1 >= w[1].1 {
                return Err(PlError::NonMonotone(i + 1));
            }
        }
        Ok(PlMap { points: prune_collinear(pairs) })
    }

    pub fn identity() -> Self {
        PlMap { points: vec![(Rational::zero(), Rational::zero()), (Rational::one(), Rational::one())] }
    }

    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    pub fn is_identity(&self) -> bool {
        self.points.len() == 2
    }

    fn check_domain(x: &Rational) -> Result<(), PlError> {
        if x.is_negative() || x > &Rational::one() {
            return Err(PlError::Domain(x.clone()));
        }
        Ok(())
    }

    /// Index `i` of the segment `[x_i, x_{i+1}]` containing `x` (the left one
    /// at a breakpoint, except at 0).
    fn segment_by_x(&self, x: &Rational) -> usize {
        let i = self.points.partition_point(|p| &p.0 < x);
        i.saturating_sub(1).min(self.points.len() - 2)
    }

    fn segment_by_y(&self, y: &Rational) -> usize {
        let i = self.points.partition_point(|p| &p.1 < y);
        i.saturating_sub(1).min(self.points.len() - 2)
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational, PlError> {
        Self::check_domain(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &Rational) -> Rational {
        let i = self.segment_by_x(x);
        lerp(&self.points[i], &self.points[i + 1], x)
    }

    /// `f⁻¹(y)` without building the inverse.
    pub fn eval_inverse(&self, y: &Rational) -> Result<Rational, PlError> {
        Self::check_domain(y)?;
        Ok(self.eval_inverse_unchecked(y))
    }

    fn eval_inverse_unchecked(&self, y: &Rational) -> Rational {
        let i = self.segment_by_y(y);
        let (p, q) = (&self.points[i], &self.points[i + 1]);
        lerp(&(p.1.clone(), p.0.clone()), &(q.1.clone(), q.0.clone()), y)
    }

    /// `x ↦ self(rhs(x))`.
    pub fn compose(&self, rhs: &PlMap) -> PlMap {
        let pulled: Vec<Rational> =
            self.points.iter().map(|(x, _)| rhs.eval_inverse_unchecked(x)).collect();
        let mut xs: Vec<Rational> = Vec::with_capacity(pulled.len() + rhs.points.len());
        let (mut i, mut j) = (0, 0);
        while i < rhs.points.len() || j < pulled.len() {
            let next = match (rhs.points.get(i), pulled.get(j)) {
                (Some(a), Some(b)) => match a.0.cmp(b) {
                    Ordering::Less => {
                        i += 1;
                        a.0.clone()
                    }
                    Ordering::Greater => {
                        j += 1;
                        b.clone()
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        a.0.clone()
                    }
                },
                (Some(a), None) => {
                    i += 1;
                    a.0.clone()
                }
                (None, Some(b)) => {
                    j += 1;
                    b.clone()
                }
                (None, None) => unreachable!(),
            };
            xs.push(next);
        }
        let points = xs
            .into_iter()
            .map(|x| {
                let y = self.eval_unchecked(&rhs.eval_unchecked(&x));
                (x, y)
            })
            .collect();
        PlMap { points: prune_collinear(points) }
    }

    pub fn inverse(&self) -> PlMap {
        PlMap { points: self.points.iter().map(|(x, y)| (y.clone(), x.clone())).collect() }
    }

    /// `f g f⁻¹ g⁻¹`.
    pub fn commutator(&self, g: &PlMap) -> PlMap {
        self.compose(g).compose(&self.inverse()).compose(&g.inverse())
    }

    /// Support (closure of the moved set) and fixed set. Isolated fixed points
    /// appear in `fixed` as degenerate intervals and are absorbed into the
    /// support's closure.
    pub fn support_fix(&self) -> SupportFix {
        let mut support = Vec::new();
        let mut fixed = Vec::new();
        for w in self.points.windows(2) {
            let (p, q) = (&w[0], &w[1]);
            let dp = &p.1 - &p.0;
            let dq = &q.1 - &q.0;
            match (dp.is_zero(), dq.is_zero()) {
                (true, true) => fixed.push(Interval::new(p.0.clone(), q.0.clone())),
                (true, false) => {
                    fixed.push(Interval::point(p.0.clone()));
                    support.push(Interval::new(p.0.clone(), q.0.clone()));
                }
                (false, true) => {
                    fixed.push(Interval::point(q.0.clone()));
                    support.push(Interval::new(p.0.clone(), q.0.clone()));
                }
                (false, false) => {
                    if dp.signum() != dq.signum() {
                        // the graph crosses the diagonal inside the segment
                        let t = &dp / (&dp - &dq);
                        let x = &p.0 + t * (&q.0 - &p.0);
                        fixed.push(Interval::point(x));
                    }
                    support.push(Interval::new(p.0.clone(), q.0.clone()));
                }
            }
        }
        SupportFix {
            support: IntervalSet::from_intervals(support),
            fixed: IntervalSet::from_intervals(fixed),
        }
    }

    pub fn support(&self) -> IntervalSet {
        self.support_fix().support
    }

    /// One-sided slopes at `x`; `None` on the side that leaves `[0, 1]`.
    pub fn slopes_at(&self, x: &Rational) -> Result<(Option<Rational>, Option<Rational>), PlError> {
        Self::check_domain(x)?;
        let slope = |i: usize| {
            let (p, q) = (&self.points[i], &self.points[i + 1]);
            (&q.1 - &p.1) / (&q.0 - &p.0)
        };
        let n = self.points.len();
        let right_idx = self.points.partition_point(|p| &p.0 <= x);
        // segment starting at or before x with end after x
        let left = if x.is_zero() {
            None
        } else {
            let i = self.points.partition_point(|p| &p.0 < x);
            Some(slope(i - 1))
        };
        let right = if x.is_one() { None } else { Some(slope(right_idx.min(n - 1) - 1)) };
        Ok((left, right))
    }

    /// Whether `f(closure U) ⊆ closure V`.
    pub fn maps_closure_into(&self, u: &Interval, v: &Interval) -> bool {
        let lo = self.eval_unchecked(&u.lo);
        let hi = self.eval_unchecked(&u.hi);
        v.lo <= lo && hi <= v.hi
    }

    pub fn max_bits(&self) -> u64 {
        self.points.iter().map(|(x, y)| x.bits().max(y.bits())).max().unwrap_or(0)
    }
}

impl std::fmt::Debug for PlMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PlMap[")?;
        for (i, (x, y)) in self.points.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({x}, {y})")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportFix {
    pub support: IntervalSet,
    pub fixed: IntervalSet,
}

/// A map equal to the identity outside `[a, b]` sending `y` to `y + t`.
pub fn bump_pl(a: &Rational, b: &Rational, y: &Rational, t: &Rational) -> Result<PlMap, PlError> {
    let moved = y + t;
    let lo = y.min_of(&moved);
    let hi = y.max_of(&moved);
    if t.is_zero() || a.is_negative() || a >= lo || hi >= b || b > &Rational::one() {
        return Err(PlError::Precondition(format!(
            "bump needs 0 <= a < min(y, y+t), max(y, y+t) < b <= 1 and t != 0; got a={a}, b={b}, y={y}, t={t}"
        )));
    }
    let mut pts = vec![(Rational::zero(), Rational::zero())];
    if !a.is_zero() {
        pts.push((a.clone(), a.clone()));
    }
    pts.push((y.clone(), moved));
    if !b.is_one() {
        pts.push((b.clone(), b.clone()));
    }
    pts.push((Rational::one(), Rational::one()));
    PlMap::new(pts)
}

fn random_unit_rationals(rng: &mut ChaCha8Rng, count: usize, denom_bound: i64) -> Vec<Rational> {
    let set: BTreeSet<Rational> = (0..count)
        .map(|_| {
            let d = rng.gen_range(2..=denom_bound);
            let n = rng.gen_range(1..d);
            Rational::frac(n, d)
        })
        .collect();
    set.into_iter().collect()
}

/// A seeded random element with at most `n_breaks` interior breakpoints whose
/// coordinates have denominators at most `denom_bound`.
pub fn random_pl(seed: u64, n_breaks: usize, denom_bound: i64) -> Result<PlMap, PlError> {
    if denom_bound < 2 {
        return Err(PlError::Precondition(format!("denom_bound must be >= 2, got {denom_bound}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = random_unit_rationals(&mut rng, n_breaks, denom_bound);
    let ys = random_unit_rationals(&mut rng, n_breaks, denom_bound);
    let k = xs.len().min(ys.len());
    let mut pts = vec![(Rational::zero(), Rational::zero())];
    pts.extend(xs.into_iter().take(k).zip(ys.into_iter().take(k)));
    pts.push((Rational::one(), Rational::one()));
    PlMap::new(pts)
}

impl GroupElement for PlMap {
    fn identity_like(&self) -> Self {
        PlMap::identity()
    }
    fn compose(&self, rhs: &Self) -> Self {
        PlMap::compose(self, rhs)
    }
    fn inverse(&self) -> Self {
        PlMap::inverse(self)
    }
    fn is_identity(&self) -> bool {
        PlMap::is_identity(self)
    }
    fn group_eq(&self, other: &Self) -> bool {
        self == other
    }
}

impl Acts<Rational> for PlMap {
    fn act(&self, x: &Rational) -> Rational {
        self.eval_unchecked(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;

    fn pl(pts: &[(Rational, Rational)]) -> PlMap {
        PlMap::new(pts.to_vec()).unwrap()
    }

    fn f0() -> PlMap {
        pl(&[(q(0, 1), q(0, 1)), (q(1, 2), q(1, 4)), (q(1, 1), q(1, 1))])
    }

    #[test]
    fn construction_and_canonical_form() {
        assert!(pl(&[(q(0, 1), q(0, 1)), (q(1, 1), q(1, 1))]).is_identity());
        assert!(pl(&[(q(0, 1), q(0, 1)), (q(1, 2), q(1, 2)), (q(1, 1), q(1, 1))]).is_identity());
        assert_eq!(f0().breakpoints().len(), 3);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(PlMap::new(vec![]), Err(PlError::EndpointViolation));
        assert_eq!(
            PlMap::new(vec![(q(0, 1), q(1, 4)), (q(1, 1), q(1, 1))]),
            Err(PlError::EndpointViolation)
        );
        assert_eq!(
            PlMap::new(vec![(q(0, 1), q(0, 1)), (q(1, 2), q(3, 4)), (q(1, 3), q(4, 5)), (q(1, 1), q(1, 1))]),
            Err(PlError::NonMonotone(2))
        );
        // orientation reversing data is non-monotone in y
        assert!(PlMap::new(vec![(q(0, 1), q(0, 1)), (q(1, 2), q(0, 1)), (q(1, 1), q(1, 1))]).is_err());
    }

    #[test]
    fn evaluation() {
        assert_eq!(f0().eval(&q(1, 4)).unwrap(), q(1, 8));
        assert_eq!(PlMap::identity().eval(&q(3, 7)).unwrap(), q(3, 7));
        assert_eq!(f0().eval(&q(2, 3)).unwrap(), q(1, 2));
        assert_eq!(f0().eval(&q(3, 2)), Err(PlError::Domain(q(3, 2))));
        assert_eq!(f0().eval_inverse(&q(1, 4)).unwrap(), q(1, 2));
    }

    #[test]
    fn composition_examples() {
        let f = f0();
        assert!(f.compose(&f.inverse()).is_identity());
        assert_eq!(PlMap::identity().compose(&f), f);
        let ff = f.compose(&f);
        assert_eq!(
            ff.breakpoints(),
            &[(q(0, 1), q(0, 1)), (q(1, 2), q(1, 8)), (q(2, 3), q(1, 4)), (q(1, 1), q(1, 1))]
        );
        // dense sampling oracle
        for k in 0..=100 {
            let x = q(k, 100);
            assert_eq!(ff.eval(&x).unwrap(), f.eval(&f.eval(&x).unwrap()).unwrap());
        }
    }

    #[test]
    fn inversion() {
        assert!(PlMap::identity().inverse().is_identity());
        assert_eq!(
            f0().inverse().breakpoints(),
            &[(q(0, 1), q(0, 1)), (q(1, 4), q(1, 2)), (q(1, 1), q(1, 1))]
        );
        assert_eq!(f0().inverse().inverse(), f0());
    }

    #[test]
    fn supports() {
        let sf = PlMap::identity().support_fix();
        assert!(sf.support.is_empty());
        assert_eq!(sf.fixed.components(), &[Interval::unit()]);
        assert_eq!(f0().support().components(), &[Interval::unit()]);
        let b = bump_pl(&q(1, 4), &q(1, 2), &q(3, 8), &q(1, 16)).unwrap();
        assert_eq!(b.support().components(), &[Interval::new(q(1, 4), q(1, 2))]);
    }

    #[test]
    fn diagonal_crossing_is_absorbed_into_support() {
        // below the diagonal on (0, 1/2), above on (1/2, 1)
        let f = pl(&[(q(0, 1), q(0, 1)), (q(1, 4), q(1, 8)), (q(3, 4), q(7, 8)), (q(1, 1), q(1, 1))]);
        let sf = f.support_fix();
        assert_eq!(sf.support.components(), &[Interval::unit()]);
        assert!(sf.fixed.contains(&q(1, 2)));
        assert!(sf.fixed.contains(&q(0, 1)));
        assert_eq!(f.eval(&q(1, 2)).unwrap(), q(1, 2));
    }

    #[test]
    fn slopes() {
        assert_eq!(PlMap::identity().slopes_at(&q(1, 3)).unwrap(), (Some(q(1, 1)), Some(q(1, 1))));
        assert_eq!(f0().slopes_at(&q(1, 2)).unwrap(), (Some(q(1, 2)), Some(q(3, 2))));
        assert_eq!(f0().slopes_at(&q(0, 1)).unwrap(), (None, Some(q(1, 2))));
        assert_eq!(f0().slopes_at(&q(1, 1)).unwrap(), (Some(q(3, 2)), None));
        assert_eq!(f0().slopes_at(&q(1, 4)).unwrap(), (Some(q(1, 2)), Some(q(1, 2))));
    }

    #[test]
    fn bumps() {
        let b = bump_pl(&q(1, 4), &q(1, 2), &q(3, 8), &q(1, 16)).unwrap();
        assert_eq!(b.eval(&q(3, 8)).unwrap(), q(7, 16));
        assert_eq!(b.eval(&q(1, 5)).unwrap(), q(1, 5));
        assert_eq!(b.eval(&q(3, 5)).unwrap(), q(3, 5));
        let neg = bump_pl(&q(1, 4), &q(1, 2), &q(3, 8), &q(-1, 16)).unwrap();
        assert_eq!(neg.eval(&q(3, 8)).unwrap(), q(5, 16));
        let images: BTreeSet<Rational> = (1..10)
            .map(|k| bump_pl(&q(0, 1), &q(1, 1), &q(1, 2), &q(k, 20)).unwrap().eval(&q(1, 2)).unwrap())
            .collect();
        assert_eq!(images.len(), 9);
        assert!(bump_pl(&q(1, 4), &q(1, 2), &q(3, 8), &q(0, 1)).is_err());
        assert!(bump_pl(&q(1, 4), &q(1, 2), &q(3, 8), &q(1, 8)).is_err());
    }

    #[test]
    fn closure_containment() {
        let u = Interval::new(q(0, 1), q(1, 2));
        assert!(PlMap::identity().maps_closure_into(&u, &u));
        assert!(f0().maps_closure_into(&u, &Interval::new(q(0, 1), q(1, 4))));
        assert!(!f0().maps_closure_into(&u, &Interval::new(q(0, 1), q(1, 8))));
    }

    #[test]
    fn random_maps() {
        assert!(random_pl(7, 0, 10).unwrap().is_identity());
        assert_eq!(random_pl(3, 4, 12).unwrap(), random_pl(3, 4, 12).unwrap());
        let f = random_pl(1, 3, 10).unwrap();
        assert!(f.breakpoints().len() <= 5);
        assert_eq!(PlMap::new(f.breakpoints().to_vec()).unwrap(), f);
        assert!(random_pl(1, 3, 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let j = serde_json::to_string(&f0()).unwrap();
        assert_eq!(j, r#"{"breakpoints":[["0","0"],["1/2","1/4"],["1","1"]]}"#);
        let back: PlMap = serde_json::from_str(&j).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), j);
        assert!(serde_json::from_str::<PlMap>(r#"{"breakpoints":[["0","0"],["1","1/2"]]}"#).is_err());
    }
}
