//! Piecewise-projective homeomorphisms of the circle `ℝP¹` with rational
//! breakpoints and rational matrices, and the witness search for pairs that
//! fix an arc pointwise.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{Certificate, Claim, Subject};
use crate::intervals::{Interval, IntervalSet};
use crate::linearcert::{ProjArc, ProjPoint};
use crate::num::{Mat2, QuadSurd, Rational};
use crate::structure1d::{verify_zk_words, zk_search, LineMap, ZkSearch};
use crate::words::{Acts, Generators, GroupElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjError {
    #[error("malformed map: {0}")]
    Shape(String),
    #[error("pieces disagree at breakpoint {0}")]
    ContinuityViolation(ProjPoint),
    #[error("piece {0} does not preserve orientation")]
    OrientationViolation(usize),
    #[error("the pieces do not fit together into a bijection of the circle")]
    NotBijective,
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Serialize, Deserialize)]
struct ProjRepr {
    breakpoints: Vec<ProjPoint>,
    pieces: Vec<Mat2>,
}

/// Piece `i` acts on the open arc from `breakpoints[i]` to the next
/// breakpoint, cyclically; with no breakpoints the single piece is global.
/// Breakpoints are sorted with the reals first and `∞` last, matrices are
/// projectively normalized, and neighbouring pieces are distinct.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ProjRepr", into = "ProjRepr")]
pub struct ProjCircleMap {
    breakpoints: Vec<ProjPoint>,
    pieces: Vec<Mat2>,
}

impl TryFrom<ProjRepr> for ProjCircleMap {
    type Error = ProjError;
    fn try_from(r: ProjRepr) -> Result<Self, ProjError> {
        ProjCircleMap::new(r.breakpoints, r.pieces)
    }
}

impl From<ProjCircleMap> for ProjRepr {
    fn from(m: ProjCircleMap) -> Self {
        ProjRepr { breakpoints: m.breakpoints, pieces: m.pieces }
    }
}

impl fmt::Debug for ProjCircleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.breakpoints.is_empty() {
            return write!(f, "Möbius{:?}", self.pieces[0]);
        }
        write!(f, "{{")?;
        for (i, (b, m)) in self.breakpoints.iter().zip(&self.pieces).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}: {m:?}")?;
        }
        write!(f, "}}")
    }
}

fn mobius(m: &Mat2, z: &ProjPoint) -> ProjPoint {
    z.apply(m)
}

impl ProjCircleMap {
    /// Validates and canonicalizes.
    pub fn new(breakpoints: Vec<ProjPoint>, pieces: Vec<Mat2>) -> Result<Self, ProjError> {
        for (i, m) in pieces.iter().enumerate() {
            if !m.det().is_positive() {
                return Err(ProjError::OrientationViolation(i));
            }
        }
        if breakpoints.len() <= 1 {
            if pieces.len() != 1 {
                return Err(ProjError::Shape(format!(
                    "{} breakpoints need exactly one piece, got {}",
                    breakpoints.len(),
                    pieces.len()
                )));
            }
            return Ok(ProjCircleMap::mobius(&pieces[0]));
        }
        if pieces.len() != breakpoints.len() {
            return Err(ProjError::Shape(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len(),
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ProjError::Shape("breakpoints must be strictly increasing with inf last".into()));
        }
        let n = breakpoints.len();
        for i in 0..n {
            let prev = &pieces[(i + n - 1) % n];
            if mobius(prev, &breakpoints[i]) != mobius(&pieces[i], &breakpoints[i]) {
                return Err(ProjError::ContinuityViolation(breakpoints[i].clone()));
            }
        }
        // images of the breakpoints must go around the circle once, in order
        let images: Vec<ProjPoint> = breakpoints.iter().zip(&pieces).map(|(b, m)| mobius(m, b)).collect();
        let keys: Vec<_> = images.iter().map(|y| y.cyclic_key(&images[0])).collect();
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ProjError::NotBijective);
        }
        Ok(ProjCircleMap::build(breakpoints.into_iter().zip(pieces).collect()))
    }

    /// Canonical form of already-consistent `(arc start, matrix)` pairs.
    fn build(mut pairs: Vec<(ProjPoint, Mat2)>) -> ProjCircleMap {
        for (_, m) in pairs.iter_mut() {
            *m = m.projective_normal();
        }
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        loop {
            let n = pairs.len();
            if n <= 1 {
                break;
            }
            match (0..n).find(|&i| pairs[i].1 == pairs[(i + n - 1) % n].1) {
                Some(i) => {
                    pairs.remove(i);
                }
                None => break,
            }
        }
        if pairs.len() <= 1 {
            return ProjCircleMap { breakpoints: Vec::new(), pieces: vec![pairs[0].1.clone()] };
        }
        let (breakpoints, pieces) = pairs.into_iter().unzip();
        ProjCircleMap { breakpoints, pieces }
    }

    /// The global Möbius map of `m` (det > 0 assumed).
    pub fn mobius(m: &Mat2) -> ProjCircleMap {
        ProjCircleMap { breakpoints: Vec::new(), pieces: vec![m.projective_normal()] }
    }

    pub fn identity() -> ProjCircleMap {
        ProjCircleMap::mobius(&Mat2::identity())
    }

    pub fn breakpoints(&self) -> &[ProjPoint] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Mat2] {
        &self.pieces
    }

    pub fn is_identity(&self) -> bool {
        self.breakpoints.is_empty() && self.pieces[0].is_scalar()
    }

    /// Arc of piece `i`, or `None` for a global map.
    pub fn piece_arc(&self, i: usize) -> Option<ProjArc> {
        let n = self.breakpoints.len();
        (n > 0).then(|| {
            ProjArc::new(self.breakpoints[i].clone(), self.breakpoints[(i + 1) % n].clone())
                .expect("breakpoints are distinct")
        })
    }

    /// Index of the piece whose half-open arc `[b_i, b_{i+1})` holds `z`.
    fn piece_index(&self, z: &ProjPoint) -> usize {
        let n = self.breakpoints.len();
        if n == 0 {
            return 0;
        }
        if let Some(i) = self.breakpoints.iter().position(|b| b == z) {
            return i;
        }
        (0..n)
            .find(|&i| self.piece_arc(i).expect("n > 0").contains(z))
            .expect("the arcs and breakpoints cover the circle")
    }

    pub fn piece_at(&self, z: &ProjPoint) -> &Mat2 {
        &self.pieces[self.piece_index(z)]
    }

    pub fn eval(&self, z: &ProjPoint) -> ProjPoint {
        mobius(self.piece_at(z), z)
    }

    pub fn inverse(&self) -> ProjCircleMap {
        let pairs = self
            .breakpoints
            .iter()
            .zip(&self.pieces)
            .map(|(b, m)| (mobius(m, b), m.inv().expect("det > 0")))
            .collect::<Vec<_>>();
        if pairs.is_empty() {
            return ProjCircleMap::mobius(&self.pieces[0].inv().expect("det > 0"));
        }
        ProjCircleMap::build(pairs)
    }

    /// `self ∘ inner`. The breakpoints of the result are those of `inner`
    /// together with the preimages of the breakpoints of `self`.
    pub fn compose(&self, inner: &ProjCircleMap) -> ProjCircleMap {
        let back = inner.inverse();
        let mut cuts: Vec<ProjPoint> = inner.breakpoints.clone();
        cuts.extend(self.breakpoints.iter().map(|b| back.eval(b)));
        cuts.sort();
        cuts.dedup();
        if cuts.len() <= 1 {
            let z = match cuts.first() {
                Some(ProjPoint::Finite(x)) => ProjPoint::Finite(x + &Rational::one()),
                _ => ProjPoint::Finite(Rational::zero()),
            };
            let m = self.piece_at(&inner.eval(&z)).mul(inner.piece_at(&z));
            return ProjCircleMap::mobius(&m);
        }
        let n = cuts.len();
        let pairs = (0..n)
            .map(|i| {
                let arc = ProjArc::new(cuts[i].clone(), cuts[(i + 1) % n].clone()).expect("distinct cuts");
                let z = arc.sample();
                let m = self.piece_at(&inner.eval(&z)).mul(inner.piece_at(&z));
                (cuts[i].clone(), m)
            })
            .collect();
        ProjCircleMap::build(pairs)
    }

    pub fn commutator(&self, other: &ProjCircleMap) -> ProjCircleMap {
        self.compose(other).compose(&self.inverse()).compose(&other.inverse())
    }

    /// Whether the map is the identity on every point of the open arc.
    pub fn fixes_arc(&self, arc: &ProjArc) -> bool {
        if self.breakpoints.is_empty() {
            return self.pieces[0].is_scalar();
        }
        (0..self.pieces.len())
            .all(|i| self.pieces[i].is_scalar() || !self.piece_arc(i).expect("n > 0").overlaps(arc))
    }

    /// Conjugate `t ∘ self ∘ t⁻¹`.
    pub fn conjugate_by(&self, t: &Mat2) -> ProjCircleMap {
        let tm = ProjCircleMap::mobius(t);
        tm.compose(self).compose(&tm.inverse())
    }

    pub fn max_bits(&self) -> u64 {
        let pts = self.breakpoints.iter().filter_map(|b| b.as_finite()).map(Rational::bits);
        let mats = self.pieces.iter().flat_map(|m| m.0.iter().flatten().map(Rational::bits).collect::<Vec<_>>());
        pts.chain(mats).max().unwrap_or(0)
    }
}

impl GroupElement for ProjCircleMap {
    fn identity_like(&self) -> Self {
        ProjCircleMap::identity()
    }
    fn compose(&self, rhs: &Self) -> Self {
        ProjCircleMap::compose(self, rhs)
    }
    fn inverse(&self) -> Self {
        ProjCircleMap::inverse(self)
    }
    fn is_identity(&self) -> bool {
        ProjCircleMap::is_identity(self)
    }
    fn group_eq(&self, other: &Self) -> bool {
        self == other
    }
}

impl Acts<ProjPoint> for ProjCircleMap {
    fn act(&self, p: &ProjPoint) -> ProjPoint {
        self.eval(p)
    }
}

/// The Möbius map with fixed points `a` and `b`, multiplier `lambda` at `a`
/// in homogeneous coordinates, applied on the arc `(a → b)` and the identity
/// elsewhere.
pub fn proj_bump(a: &ProjPoint, b: &ProjPoint, lambda: &Rational) -> Result<ProjCircleMap, ProjError> {
    if a == b {
        return Err(ProjError::Precondition("bump endpoints must differ".into()));
    }
    if !lambda.is_positive() {
        return Err(ProjError::Precondition("multiplier must be positive".into()));
    }
    let ((a0, a1), (b0, b1)) = (a.homogeneous(), b.homogeneous());
    let s = Mat2::new(a0, b0, a1, b1);
    let d = Mat2::new(lambda.clone(), Rational::zero(), Rational::zero(), Rational::one());
    let m = s.mul(&d).mul(&s.inv().expect("distinct points are independent"));
    let mut pairs = vec![(a.clone(), m), (b.clone(), Mat2::identity())];
    pairs.sort_by(|x, y| x.0.cmp(&y.0));
    let (bps, pieces): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    ProjCircleMap::new(bps, pieces)
}

fn small_projective_point(rng: &mut ChaCha8Rng) -> ProjPoint {
    if rng.gen_ratio(1, 8) {
        ProjPoint::Infinity
    } else {
        ProjPoint::Finite(Rational::frac(rng.gen_range(-12..=12), rng.gen_range(1..=6)))
    }
}

/// A seeded map: a global element of `PSL(2, ℤ)` composed with two bumps on
/// random arcs.
pub fn random_proj(seed: u64) -> ProjCircleMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = [Mat2::from_ints(1, 1, 0, 1), Mat2::from_ints(1, 0, 1, 1), Mat2::from_ints(1, -1, 0, 1), Mat2::from_ints(1, 0, -1, 1)];
    let mut g = Mat2::identity();
    for _ in 0..rng.gen_range(0..4) {
        g = g.mul(&gens[rng.gen_range(0..4)]);
    }
    let mut out = ProjCircleMap::mobius(&g);
    for _ in 0..2 {
        let a = small_projective_point(&mut rng);
        let mut b = small_projective_point(&mut rng);
        while b == a {
            b = small_projective_point(&mut rng);
        }
        let lambda = Rational::frac(rng.gen_range(1..=4), rng.gen_range(1..=4));
        out = out.compose(&proj_bump(&a, &b, &lambda).expect("distinct endpoints"));
    }
    out
}

// ---------------------------------------------------------------------------
// fixed points

/// A point of the circle with a coordinate in a real quadratic field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurdPoint {
    Finite(QuadSurd),
    Infinity,
}

impl fmt::Display for SurdPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurdPoint::Finite(x) => write!(f, "{x}"),
            SurdPoint::Infinity => write!(f, "inf"),
        }
    }
}

impl From<&ProjPoint> for SurdPoint {
    fn from(p: &ProjPoint) -> Self {
        match p {
            ProjPoint::Finite(x) => SurdPoint::Finite(QuadSurd::rational(x.clone())),
            ProjPoint::Infinity => SurdPoint::Infinity,
        }
    }
}

/// Symbolic Möbius action on a quadratic point.
pub fn mobius_surd(m: &Mat2, z: &SurdPoint) -> SurdPoint {
    match z {
        SurdPoint::Infinity if m.c().is_zero() => SurdPoint::Infinity,
        SurdPoint::Infinity => SurdPoint::Finite(QuadSurd::rational(m.a() / m.c())),
        SurdPoint::Finite(x) => {
            let num = x.scale(m.a()).add_rational(m.b());
            let den = x.scale(m.c()).add_rational(m.d());
            if den.is_zero() {
                SurdPoint::Infinity
            } else {
                SurdPoint::Finite(num.div(&den).expect("same radicand, nonzero denominator"))
            }
        }
    }
}

/// Membership in the closed arc from `from` to `to`; a global piece (no
/// arc) contains everything.
fn closed_arc_contains(arc: Option<&ProjArc>, z: &SurdPoint) -> bool {
    let Some(arc) = arc else { return true };
    let q = |p: &ProjPoint| p.as_finite().map(|x| QuadSurd::rational(x.clone()));
    match (q(arc.from()), q(arc.to()), z) {
        (Some(f), Some(t), SurdPoint::Finite(x)) if f < t => f <= *x && *x <= t,
        (Some(_), Some(_), SurdPoint::Infinity) => arc.from() > arc.to(),
        (Some(f), Some(t), SurdPoint::Finite(x)) => *x >= f || *x <= t,
        (Some(f), None, SurdPoint::Finite(x)) => *x >= f,
        (None, Some(t), SurdPoint::Finite(x)) => *x <= t,
        (_, _, SurdPoint::Infinity) => true,
        (None, None, _) => unreachable!("arc endpoints are distinct"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PieceFixedPoints {
    /// `None` for a global map.
    pub arc: Option<ProjArc>,
    pub matrix: Mat2,
    /// The piece is the identity, so every point of its arc is fixed.
    pub identity: bool,
    pub points: Vec<SurdPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedPointRecord {
    pub pieces: Vec<PieceFixedPoints>,
}

impl FixedPointRecord {
    /// Re-checks `M ξ = ξ` for every recorded point with its own piece.
    pub fn verify(&self) -> bool {
        self.pieces.iter().all(|p| p.points.iter().all(|x| mobius_surd(&p.matrix, x) == *x))
    }
}

/// Fixed points of a single Möbius map on the whole circle. Empty for
/// scalar matrices, whose fixed set is everything.
fn mobius_fixed_points(m: &Mat2) -> Vec<SurdPoint> {
    if m.is_scalar() {
        return Vec::new();
    }
    let (a, b, c, d) = (m.a(), m.b(), m.c(), m.d());
    let mut out = Vec::new();
    if c.is_zero() {
        out.push(SurdPoint::Infinity);
        if a != d {
            out.push(SurdPoint::Finite(QuadSurd::rational(b / &(d - a))));
        }
        return out;
    }
    // c x² + (d − a) x − b = 0
    let p = d - a;
    let disc = p.square() + Rational::from(4) * b * c;
    if disc.is_negative() {
        return out;
    }
    let root = QuadSurd::sqrt_of(&disc).expect("nonnegative discriminant");
    let two_c = Rational::from(2) * c;
    let centre = -&p / &two_c;
    let spread = root.scale(&two_c.recip().expect("c != 0"));
    let mut roots = vec![spread.add_rational(&centre), spread.neg().add_rational(&centre)];
    roots.sort();
    roots.dedup();
    out.extend(roots.into_iter().map(SurdPoint::Finite));
    out
}

pub fn fixed_points_proj(f: &ProjCircleMap) -> FixedPointRecord {
    let pieces = (0..f.pieces.len())
        .map(|i| {
            let arc = f.piece_arc(i);
            let m = &f.pieces[i];
            let points = mobius_fixed_points(m)
                .into_iter()
                .filter(|z| closed_arc_contains(arc.as_ref(), z))
                .collect();
            PieceFixedPoints { arc, matrix: m.clone(), identity: m.is_scalar(), points }
        })
        .collect();
    FixedPointRecord { pieces }
}

// ---------------------------------------------------------------------------
// pairs fixing an arc

/// A Möbius map sending the closed complement of `arc` onto `[0, 1]`, with
/// the end of `arc` going to 0 and its start to 1.
pub fn straightening(arc: &ProjArc) -> Mat2 {
    let (p, q, r) = (arc.from().homogeneous(), arc.to().homogeneous(), arc.sample().homogeneous());
    // columns r, q send ∞ ↦ r, 0 ↦ q; scale them so 1 ↦ p
    let base = Mat2::new(r.0.clone(), q.0.clone(), r.1.clone(), q.1.clone());
    let inv = base.inv().expect("distinct points");
    let (lam, mu) = inv.apply(&p.0, &p.1);
    let m = Mat2::new(&lam * &r.0, &mu * &q.0, &lam * &r.1, &mu * &q.1);
    m.inv().expect("three distinct points determine a Möbius map")
}

/// A circle map fixing the arc `(1 → 0)` through `∞`, viewed as a map of
/// `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OnInterval(pub ProjCircleMap);

impl GroupElement for OnInterval {
    fn identity_like(&self) -> Self {
        OnInterval(ProjCircleMap::identity())
    }
    fn compose(&self, rhs: &Self) -> Self {
        OnInterval(self.0.compose(&rhs.0))
    }
    fn inverse(&self) -> Self {
        OnInterval(self.0.inverse())
    }
    fn is_identity(&self) -> bool {
        self.0.is_identity()
    }
    fn group_eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl Acts<Rational> for OnInterval {
    fn act(&self, x: &Rational) -> Rational {
        match self.0.eval(&ProjPoint::Finite(x.clone())) {
            ProjPoint::Finite(y) => y,
            ProjPoint::Infinity => panic!("a map of [0, 1] sent {x} to infinity"),
        }
    }
}

impl LineMap for OnInterval {
    /// A nonidentity Möbius piece has isolated fixed points, so the support
    /// is the union of the closed arcs of the nonidentity pieces. These lie in
    /// `[0, 1]` because the map is the identity on the rest of the circle.
    fn support_cover(&self) -> IntervalSet {
        let m = &self.0;
        let parts = (0..m.pieces.len())
            .filter(|&i| !m.pieces[i].is_scalar())
            .filter_map(|i| {
                let arc = m.piece_arc(i)?;
                Some(Interval::new(arc.from().as_finite()?.clone(), arc.to().as_finite()?.clone()))
            })
            .collect();
        IntervalSet::from_intervals(parts)
    }
}

fn straightened_generators(f: &ProjCircleMap, g: &ProjCircleMap, arc: &ProjArc) -> Result<Generators<OnInterval>, String> {
    for (name, m) in [("F", f), ("G", g)] {
        if !m.fixes_arc(arc) {
            return Err(format!("{name} is not the identity on {arc:?}"));
        }
    }
    let t = straightening(arc);
    Ok(Generators::new(&OnInterval(f.conjugate_by(&t)), &OnInterval(g.conjugate_by(&t))))
}

/// Exact check of a witness list for a pair fixing `arc`.
pub fn verify_h_witnesses(f: &ProjCircleMap, g: &ProjCircleMap, arc: &ProjArc, words: &[crate::words::Word]) -> Result<Vec<String>, String> {
    let gens = straightened_generators(f, g, arc)?;
    let mut log = vec![format!("F and G are the identity on {arc:?}")];
    log.push("conjugated onto [0, 1] by a Möbius map; commutation and disjointness are conjugation invariant".into());
    log.extend(verify_zk_words(&gens, words)?);
    Ok(log)
}

/// Abelian certificate, or `k = 3` disjointly supported commuting
/// conjugates, for a pair that is the identity on `arc`.
pub fn classify_h_pair(f: &ProjCircleMap, g: &ProjCircleMap, arc: &ProjArc, depth: usize) -> Result<Certificate, ProjError> {
    let gens = straightened_generators(f, g, arc).map_err(ProjError::Precondition)?;
    let subject = Subject::ProjectivePair { f: f.clone(), g: g.clone(), arc: arc.clone() };
    let claim = match zk_search(&gens, 3, depth, |hull| hull.lo.is_positive() && hull.hi < Rational::one()) {
        ZkSearch::Abelian => Claim::Abelian,
        ZkSearch::Found(words) => Claim::ZkWitness { words },
        ZkSearch::Exhausted(reason) => Claim::Inconclusive { reason, abelian_hint: false },
    };
    Ok(Certificate::issue(subject, claim).expect("search results are verified before issue"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;

    fn fin(n: i64, d: i64) -> ProjPoint {
        ProjPoint::Finite(q(n, d))
    }

    #[test]
    fn identity_piece() {
        let m = ProjCircleMap::new(vec![], vec![Mat2::from_ints(3, 0, 0, 3)]).unwrap();
        assert!(m.is_identity());
    }

    #[test]
    fn discontinuous_pieces_rejected() {
        let r = ProjCircleMap::new(vec![fin(0, 1), fin(1, 1)], vec![Mat2::from_ints(2, 0, 0, 1), Mat2::identity()]);
        assert_eq!(r.unwrap_err(), ProjError::ContinuityViolation(fin(1, 1)));
    }

    #[test]
    fn global_mobius() {
        let m = Mat2::from_ints(2, 1, 1, 1);
        let f = ProjCircleMap::new(vec![], vec![m.clone()]).unwrap();
        assert_eq!(f.eval(&fin(1, 1)), fin(3, 2));
        assert_eq!(f.eval(&ProjPoint::Infinity), fin(2, 1));
        let g = ProjCircleMap::mobius(&Mat2::from_ints(1, 1, 0, 1));
        assert_eq!(f.compose(&g), ProjCircleMap::mobius(&m.mul(&Mat2::from_ints(1, 1, 0, 1))));
        assert!(f.compose(&f.inverse()).is_identity());
    }

    #[test]
    fn three_piece_map_matches_formula() {
        // 2z/(z + 1) on (0, 1), 2z − 1 on (1, ∞), identity on (∞, 0)
        let pieces = vec![Mat2::from_ints(2, 0, 1, 1), Mat2::from_ints(2, -1, 0, 1), Mat2::identity()];
        let f = ProjCircleMap::new(vec![fin(0, 1), fin(1, 1), ProjPoint::Infinity], pieces).unwrap();
        assert_eq!(f.breakpoints().len(), 3);
        assert_eq!(f.eval(&fin(1, 2)), fin(2, 3));
        assert_eq!(f.eval(&fin(3, 1)), fin(5, 1));
        assert_eq!(f.eval(&fin(-2, 1)), fin(-2, 1));
        let broken = vec![Mat2::from_ints(2, 0, 1, 1), Mat2::from_ints(3, -2, 0, 1), Mat2::from_ints(1, 1, 0, 1)];
        assert!(ProjCircleMap::new(vec![fin(0, 1), fin(1, 1), ProjPoint::Infinity], broken).is_err());
        let g = f.compose(&f);
        assert_eq!(g.eval(&fin(1, 2)), fin(4, 5));
    }

    #[test]
    fn bump_inverse_and_json() {
        let f = proj_bump(&fin(2, 1), &fin(-1, 1), &q(5, 2)).unwrap();
        assert_eq!(f.breakpoints(), &[fin(-1, 1), fin(2, 1)]);
        assert_eq!(f.eval(&fin(0, 1)), fin(0, 1));
        assert_ne!(f.eval(&ProjPoint::Infinity), ProjPoint::Infinity);
        let j = serde_json::to_string(&f).unwrap();
        let back: ProjCircleMap = serde_json::from_str(&j).unwrap();
        assert_eq!(back, f);
        assert_eq!(f.inverse().inverse(), f);
    }

    #[test]
    fn fixed_points_of_standard_maps() {
        let rec = fixed_points_proj(&ProjCircleMap::identity());
        assert!(rec.pieces[0].identity);
        let shift = fixed_points_proj(&ProjCircleMap::mobius(&Mat2::from_ints(1, 1, 0, 1)));
        assert_eq!(shift.pieces[0].points, vec![SurdPoint::Infinity]);
        let dil = fixed_points_proj(&ProjCircleMap::mobius(&Mat2::from_ints(2, 0, 0, 1)));
        assert_eq!(dil.pieces[0].points, vec![SurdPoint::Infinity, SurdPoint::Finite(QuadSurd::rational(q(0, 1)))]);
        // z ↦ (2z + 1)/(z + 1) fixes (1 ± √5)/2
        let golden = fixed_points_proj(&ProjCircleMap::mobius(&Mat2::from_ints(2, 1, 1, 1)));
        assert_eq!(golden.pieces[0].points.len(), 2);
        assert!(golden.verify());
    }

    #[test]
    fn straightening_sends_arc_ends() {
        let arc = ProjArc::new(fin(1, 1), fin(-1, 1)).unwrap();
        let t = straightening(&arc);
        assert!(t.det().is_positive());
        assert_eq!(fin(-1, 1).apply(&t), fin(0, 1));
        assert_eq!(fin(1, 1).apply(&t), fin(1, 1));
        assert_eq!(arc.sample().apply(&t), ProjPoint::Infinity);
    }

    fn h_pair() -> (ProjCircleMap, ProjCircleMap, ProjArc) {
        let f = proj_bump(&fin(-1, 1), &fin(1, 1), &q(1, 9)).unwrap();
        let g = proj_bump(&fin(-1, 2), &fin(0, 1), &q(3, 1)).unwrap();
        (f, g, ProjArc::new(fin(1, 1), fin(-1, 1)).unwrap())
    }

    #[test]
    fn h_pair_contraction() {
        let (f, _, _) = h_pair();
        // (5z + 4)/(4z + 5) up to scaling
        assert_eq!(f.piece_at(&fin(0, 1)).projective_normal(), Mat2::from_ints(5, 4, 4, 5).projective_normal());
    }

    #[test]
    fn classify_h_pairs() {
        let (f, g, arc) = h_pair();
        let cert = classify_h_pair(&f, &g, &arc, 8).unwrap();
        assert_eq!(cert.claim().kind(), "ZkWitnessCert");
        assert!(Certificate::replay(&cert.to_json()).is_ok());
        let ab = classify_h_pair(&f, &f.compose(&f), &arc, 4).unwrap();
        assert_eq!(ab.claim(), &Claim::Abelian);
        let none = classify_h_pair(&f, &g, &arc, 0).unwrap();
        assert!(none.claim().is_inconclusive());
        let outside = proj_bump(&fin(2, 1), &fin(3, 1), &q(2, 1)).unwrap();
        assert!(classify_h_pair(&f, &outside, &arc, 4).is_err());
    }
}
