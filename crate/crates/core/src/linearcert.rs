//! Relation search and ping-pong freeness checks for pairs of rational 2×2
//! matrices acting on the projective line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::certificate::{Certificate, Claim, Subject};
use crate::num::{Mat2, NumError, Rational};
use crate::words::{Generators, Letter, Word};

/// A point of the rational projective line.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjPoint {
    Finite(Rational),
    Infinity,
}

impl ProjPoint {
    pub fn finite(x: Rational) -> Self {
        ProjPoint::Finite(x)
    }

    /// `[p : q]`, canonicalized.
    pub fn from_homogeneous(p: &Rational, q: &Rational) -> Result<Self, NumError> {
        match (p.is_zero(), q.is_zero()) {
            (true, true) => Err(NumError::DivisionByZero),
            (_, true) => Ok(ProjPoint::Infinity),
            _ => Ok(ProjPoint::Finite(p / q)),
        }
    }

    pub fn homogeneous(&self) -> (Rational, Rational) {
        match self {
            ProjPoint::Finite(x) => (x.clone(), Rational::one()),
            ProjPoint::Infinity => (Rational::one(), Rational::zero()),
        }
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ProjPoint::Finite(x) => Some(x),
            ProjPoint::Infinity => None,
        }
    }

    /// Möbius action `z ↦ (az + b)/(cz + d)`.
    pub fn apply(&self, m: &Mat2) -> ProjPoint {
        let (p, q) = self.homogeneous();
        let (np, nq) = m.apply(&p, &q);
        ProjPoint::from_homogeneous(&np, &nq).expect("invertible matrices act on the projective line")
    }

    /// Position when walking the circle in the positive direction from
    /// `base`; `base` itself is first.
    pub fn cyclic_key(&self, base: &ProjPoint) -> (u8, Option<Rational>) {
        if self == base {
            return (0, None);
        }
        match (base, self) {
            (ProjPoint::Infinity, ProjPoint::Finite(z)) => (1, Some(z.clone())),
            (ProjPoint::Finite(b), ProjPoint::Finite(z)) if z > b => (1, Some(z.clone())),
            (ProjPoint::Finite(_), ProjPoint::Infinity) => (2, None),
            (_, ProjPoint::Finite(z)) => (3, Some(z.clone())),
            (ProjPoint::Infinity, ProjPoint::Infinity) => unreachable!(),
        }
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjPoint::Finite(x) => write!(f, "{x}"),
            ProjPoint::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ProjPoint {
    type Err = NumError;
    fn from_str(s: &str) -> Result<Self, NumError> {
        match s.trim() {
            "inf" | "∞" => Ok(ProjPoint::Infinity),
            t => Ok(ProjPoint::Finite(t.parse()?)),
        }
    }
}

impl Serialize for ProjPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProjPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArcError {
    #[error("arc endpoints must be distinct, got {0} twice")]
    Degenerate(ProjPoint),
}

/// The open arc running from `from` to `to` in the positive direction.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(ProjPoint, ProjPoint)", into = "(ProjPoint, ProjPoint)")]
pub struct ProjArc {
    from: ProjPoint,
    to: ProjPoint,
}

impl TryFrom<(ProjPoint, ProjPoint)> for ProjArc {
    type Error = ArcError;
    fn try_from((from, to): (ProjPoint, ProjPoint)) -> Result<Self, ArcError> {
        ProjArc::new(from, to)
    }
}

impl From<ProjArc> for (ProjPoint, ProjPoint) {
    fn from(a: ProjArc) -> Self {
        (a.from, a.to)
    }
}

impl fmt::Debug for ProjArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} → {})", self.from, self.to)
    }
}

impl ProjArc {
    pub fn new(from: ProjPoint, to: ProjPoint) -> Result<Self, ArcError> {
        if from == to {
            return Err(ArcError::Degenerate(from));
        }
        Ok(ProjArc { from, to })
    }

    pub fn from(&self) -> &ProjPoint {
        &self.from
    }

    pub fn to(&self) -> &ProjPoint {
        &self.to
    }

    pub fn contains(&self, z: &ProjPoint) -> bool {
        let k = z.cyclic_key(&self.from);
        k.0 != 0 && k < self.to.cyclic_key(&self.from)
    }

    /// Closure membership.
    pub fn closure_contains(&self, z: &ProjPoint) -> bool {
        z == &self.from || z == &self.to || self.contains(z)
    }

    /// Whether `other ⊆ self`.
    pub fn contains_arc(&self, other: &ProjArc) -> bool {
        if other.to == self.from {
            return false;
        }
        let kf = other.from.cyclic_key(&self.from);
        let kt = other.to.cyclic_key(&self.from);
        kf < kt && kt <= self.to.cyclic_key(&self.from)
    }

    /// Whether the two open arcs meet.
    pub fn overlaps(&self, other: &ProjArc) -> bool {
        self.contains(&other.from) || other.contains(&self.from) || self.from == other.from
    }

    /// A rational point of the arc.
    pub fn sample(&self) -> ProjPoint {
        let one = Rational::one();
        ProjPoint::Finite(match (&self.from, &self.to) {
            (ProjPoint::Finite(f), ProjPoint::Finite(t)) if f < t => f.midpoint(t),
            (ProjPoint::Finite(f), _) => f + &one,
            (ProjPoint::Infinity, ProjPoint::Finite(t)) => t - &one,
            (ProjPoint::Infinity, ProjPoint::Infinity) => unreachable!(),
        })
    }
}

/// Image of an open arc under a Möbius map; the orientation is decided by
/// the image of a sample point.
pub fn mobius_arc_image(m: &Mat2, arc: &ProjArc) -> ProjArc {
    let (a, b) = (arc.from.apply(m), arc.to.apply(m));
    let s = arc.sample().apply(m);
    let forward = ProjArc { from: a.clone(), to: b.clone() };
    if forward.contains(&s) {
        forward
    } else {
        ProjArc { from: b, to: a }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PingPongData {
    pub r_a: ProjArc,
    pub l_a: ProjArc,
    pub r_b: ProjArc,
    pub l_b: ProjArc,
}

impl PingPongData {
    /// The trap arcs for `[[1, m], [0, 1]]`, `[[1, 0], [m, 1]]` with `m ≥ 2`.
    pub fn sanov() -> Self {
        let p = |n: i64| ProjPoint::Finite(Rational::from_int(n));
        let arc = |a, b| ProjArc::new(a, b).expect("distinct endpoints");
        PingPongData {
            r_a: arc(p(1), ProjPoint::Infinity),
            l_a: arc(ProjPoint::Infinity, p(-1)),
            r_b: arc(p(0), p(1)),
            l_b: arc(p(-1), p(0)),
        }
    }

    fn named(&self) -> [(&'static str, &ProjArc); 4] {
        [("R_A", &self.r_a), ("L_A", &self.l_a), ("R_B", &self.r_b), ("L_B", &self.l_b)]
    }
}

/// The eight trap inclusions; returns the log or the first violation.
pub fn verify_pingpong(a: &Mat2, b: &Mat2, data: &PingPongData) -> Result<Vec<String>, String> {
    let mut log = Vec::new();
    if !a.det().is_positive() || !b.det().is_positive() {
        return Err("both matrices need positive determinant".into());
    }
    let named = data.named();
    for i in 0..4 {
        for j in i + 1..4 {
            if named[i].1.overlaps(named[j].1) {
                return Err(format!("arcs {} and {} are not disjoint", named[i].0, named[j].0));
            }
        }
    }
    log.push("the four arcs are pairwise disjoint".into());
    let a_inv = a.inv().map_err(|e| e.to_string())?;
    let b_inv = b.inv().map_err(|e| e.to_string())?;
    type Named<'a> = (&'a str, &'a ProjArc);
    let checks: [(&str, &Mat2, &[Named], Named); 8] = [
        ("A", a, &[("R_B", &data.r_b), ("L_B", &data.l_b)], ("R_A", &data.r_a)),
        ("A", a, &[("R_A", &data.r_a)], ("R_A", &data.r_a)),
        ("A⁻¹", &a_inv, &[("R_B", &data.r_b), ("L_B", &data.l_b)], ("L_A", &data.l_a)),
        ("A⁻¹", &a_inv, &[("L_A", &data.l_a)], ("L_A", &data.l_a)),
        ("B", b, &[("R_A", &data.r_a), ("L_A", &data.l_a)], ("R_B", &data.r_b)),
        ("B", b, &[("R_B", &data.r_b)], ("R_B", &data.r_b)),
        ("B⁻¹", &b_inv, &[("R_A", &data.r_a), ("L_A", &data.l_a)], ("L_B", &data.l_b)),
        ("B⁻¹", &b_inv, &[("L_B", &data.l_b)], ("L_B", &data.l_b)),
    ];
    for (mname, m, sources, (tname, target)) in checks {
        for (sname, src) in sources {
            let img = mobius_arc_image(m, src);
            if !target.contains_arc(&img) {
                return Err(format!("{mname}({sname}) = {img:?} is not inside {tname} = {target:?}"));
            }
            log.push(format!("{mname}({sname}) = {img:?} ⊆ {tname}"));
        }
    }
    Ok(log)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ping-pong check failed: {0}")]
pub struct PingPongFailure(pub String);

pub fn pingpong_check(a: &Mat2, b: &Mat2, data: &PingPongData) -> Result<Certificate, PingPongFailure> {
    let subject = Subject::MatrixPair { a: a.clone(), b: b.clone(), projective: true };
    Certificate::issue(subject, Claim::Free { arcs: data.clone() }).map_err(|e| PingPongFailure(e.to_string()))
}

pub fn is_relation(m: &Mat2, projective: bool) -> bool {
    if projective {
        m.is_scalar()
    } else {
        m.is_identity()
    }
}

type IMat = [i128; 4];

fn imul(x: &IMat, y: &IMat) -> Option<IMat> {
    let e = |p: i128, q: i128, r: i128, s: i128| p.checked_mul(q)?.checked_add(r.checked_mul(s)?);
    Some([
        e(x[0], y[0], x[1], y[2])?,
        e(x[0], y[1], x[1], y[3])?,
        e(x[2], y[0], x[3], y[2])?,
        e(x[2], y[1], x[3], y[3])?,
    ])
}

fn to_imat(m: &Mat2) -> Option<IMat> {
    let cell = |r: &Rational| -> Option<i128> {
        if !r.is_integer() {
            return None;
        }
        i128::try_from(r.numer()).ok()
    };
    Some([cell(m.a())?, cell(m.b())?, cell(m.c())?, cell(m.d())?])
}

enum Scan {
    Found(Vec<Letter>),
    None,
    Overflow,
}

trait SearchScalar: Sized + Clone {
    fn mul(&self, rhs: &Self) -> Option<Self>;
    fn is_relation(&self, projective: bool) -> bool;
}

impl SearchScalar for IMat {
    fn mul(&self, rhs: &Self) -> Option<Self> {
        imul(self, rhs)
    }
    fn is_relation(&self, projective: bool) -> bool {
        self[1] == 0 && self[2] == 0 && self[0] == self[3] && (projective || self[0] == 1)
    }
}

impl SearchScalar for Mat2 {
    fn mul(&self, rhs: &Self) -> Option<Self> {
        Some(Mat2::mul(self, rhs))
    }
    fn is_relation(&self, projective: bool) -> bool {
        is_relation(self, projective)
    }
}

/// Depth-first scan of all reduced words of exactly `len` letters with the
/// given first letter, in enumeration order.
fn scan_exact<M: SearchScalar>(gens: &[M; 4], first: Letter, len: usize, projective: bool) -> Scan {
    fn rec<M: SearchScalar>(
        gens: &[M; 4],
        prefix: &M,
        letters: &mut Vec<Letter>,
        remaining: usize,
        projective: bool,
    ) -> Scan {
        if remaining == 0 {
            return if prefix.is_relation(projective) { Scan::Found(letters.clone()) } else { Scan::None };
        }
        let last = *letters.last().expect("prefix is nonempty");
        for l in Letter::ALL {
            if l == last.inv() {
                continue;
            }
            let Some(next) = prefix.mul(&gens[l.index()]) else { return Scan::Overflow };
            letters.push(l);
            match rec(gens, &next, letters, remaining - 1, projective) {
                Scan::None => {}
                other => return other,
            }
            letters.pop();
        }
        Scan::None
    }
    let mut letters = vec![first];
    rec(gens, &gens[first.index()], &mut letters, len - 1, projective)
}

fn search_all<M: SearchScalar + Send + Sync>(gens: &[M; 4], max_len: usize, projective: bool, jobs: usize) -> Scan {
    for len in 1..=max_len {
        let results: Vec<Scan> = if jobs > 1 {
            std::thread::scope(|s| {
                let handles: Vec<_> = Letter::ALL
                    .iter()
                    .map(|&l| s.spawn(move || scan_exact(gens, l, len, projective)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("search thread panicked")).collect()
            })
        } else {
            let mut v = Vec::with_capacity(4);
            for l in Letter::ALL {
                let r = scan_exact(gens, l, len, projective);
                let stop = !matches!(r, Scan::None);
                v.push(r);
                if stop {
                    break;
                }
            }
            v
        };
        // first letter order decides among parallel results
        for r in results {
            match r {
                Scan::None => {}
                other => return other,
            }
        }
    }
    Scan::None
}

/// Shortest relation of length at most `max_len` in enumeration order, as
/// a certificate. `jobs > 1` scans the four first letters in parallel; the
/// result does not depend on it.
pub fn matrix_relation_search(a: &Mat2, b: &Mat2, max_len: usize, projective: bool, jobs: usize) -> Certificate {
    let subject = Subject::MatrixPair { a: a.clone(), b: b.clone(), projective };
    let inconclusive = |reason: String| {
        Certificate::issue(subject.clone(), Claim::Inconclusive { reason, abelian_hint: false })
            .expect("inconclusive claims always issue")
    };
    let (Ok(ai), Ok(bi)) = (a.inv(), b.inv()) else {
        return inconclusive("both matrices must be invertible".into());
    };
    let rational = [a.clone(), ai, b.clone(), bi];
    let integral: Option<[IMat; 4]> = rational
        .iter()
        .map(to_imat)
        .collect::<Option<Vec<_>>>()
        .map(|v| [v[0], v[1], v[2], v[3]]);
    let mut scan = match &integral {
        Some(gens) => search_all(gens, max_len, projective, jobs),
        None => Scan::Overflow,
    };
    if matches!(scan, Scan::Overflow) {
        scan = search_all(&rational, max_len, projective, jobs);
    }
    match scan {
        Scan::Found(letters) => {
            let word = Word::from_reduced(letters).expect("search only builds reduced words");
            Certificate::issue(subject.clone(), Claim::Relation { word })
                .unwrap_or_else(|e| inconclusive(format!("search result failed re-verification: {e}")))
        }
        _ => inconclusive(format!(
            "no {} relation of length <= {max_len}",
            if projective { "projective" } else { "linear" }
        )),
    }
}

/// Checks a relation claim on a matrix pair.
pub fn verify_matrix_relation(a: &Mat2, b: &Mat2, word: &Word, projective: bool) -> Result<Vec<String>, String> {
    if a.det().is_zero() || b.det().is_zero() {
        return Err("matrices must be invertible".into());
    }
    let m = Generators::new(a, b).evaluate(word);
    if is_relation(&m, projective) {
        Ok(vec![format!(
            "{word}(A, B) = {m:?} is {} the identity",
            if projective { "a scalar multiple of" } else { "exactly" }
        )])
    } else {
        Err(format!("{word}(A, B) = {m:?} is not a relation"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;

    fn pt(n: i64, d: i64) -> ProjPoint {
        ProjPoint::Finite(q(n, d))
    }

    fn arc(a: ProjPoint, b: ProjPoint) -> ProjArc {
        ProjArc::new(a, b).unwrap()
    }

    #[test]
    fn points_and_arcs() {
        assert_eq!(ProjPoint::from_homogeneous(&q(2, 1), &q(4, 1)).unwrap(), pt(1, 2));
        assert_eq!(ProjPoint::from_homogeneous(&q(3, 1), &q(0, 1)).unwrap(), ProjPoint::Infinity);
        assert!(ProjPoint::from_homogeneous(&q(0, 1), &q(0, 1)).is_err());
        let through_inf = arc(pt(1, 1), pt(-1, 1));
        assert!(through_inf.contains(&ProjPoint::Infinity));
        assert!(through_inf.contains(&pt(5, 1)));
        assert!(!through_inf.contains(&pt(0, 1)));
        assert!(!through_inf.contains(&pt(1, 1)));
        assert!(through_inf.contains_arc(&arc(pt(2, 1), pt(-3, 1))));
        assert!(!through_inf.contains_arc(&arc(pt(-3, 1), pt(2, 1))));
        assert!(arc(pt(0, 1), pt(1, 1)).contains_arc(&arc(pt(0, 1), pt(1, 1))));
        assert_eq!(serde_json::to_string(&through_inf).unwrap(), r#"["1","-1"]"#);
        assert_eq!(serde_json::from_str::<ProjPoint>("\"inf\"").unwrap(), ProjPoint::Infinity);
    }

    #[test]
    fn arc_images() {
        let a = arc(pt(-1, 1), pt(1, 1));
        assert_eq!(mobius_arc_image(&Mat2::identity(), &a), a);
        let shift = Mat2::from_ints(1, 2, 0, 1);
        assert_eq!(mobius_arc_image(&shift, &a), arc(pt(1, 1), pt(3, 1)));
        let m = Mat2::from_ints(1, 0, 2, 1);
        let img = mobius_arc_image(&m, &arc(pt(1, 1), pt(-1, 1)));
        assert_eq!(img, arc(pt(1, 3), pt(1, 1)));
        assert!(img.contains(&pt(1, 2)));
    }

    #[test]
    fn sanov_pair_is_free() {
        let (a, b) = (Mat2::from_ints(1, 2, 0, 1), Mat2::from_ints(1, 0, 2, 1));
        let cert = pingpong_check(&a, &b, &PingPongData::sanov()).unwrap();
        assert_eq!(cert.claim().kind(), "FreeCert");
        assert!(cert.verification_log().len() >= 13);
        assert!(pingpong_check(&Mat2::identity(), &Mat2::identity(), &PingPongData::sanov()).is_err());
        let mut bad = PingPongData::sanov();
        bad.r_b = arc(pt(-1, 2), pt(1, 1));
        assert!(pingpong_check(&a, &b, &bad).unwrap_err().0.contains("disjoint"));
    }

    #[test]
    fn relation_search() {
        let id = Mat2::identity();
        let c = matrix_relation_search(&id, &id, 3, false, 1);
        assert_eq!(c.claim(), &Claim::Relation { word: "a".parse().unwrap() });

        let (a, b) = (Mat2::from_ints(1, 1, 0, 1), Mat2::from_ints(1, 0, 1, 1));
        let proj = matrix_relation_search(&a, &b, 12, true, 1);
        assert_eq!(proj.claim(), &Claim::Relation { word: "aaBaaB".parse().unwrap() });
        let lin = matrix_relation_search(&a, &b, 12, false, 4);
        assert_eq!(lin.claim(), &Claim::Relation { word: "abAbaB".parse().unwrap() });
        assert!(matrix_relation_search(&a, &b, 5, true, 1).claim().is_inconclusive());
        let long: Word = "aBa".parse::<Word>().unwrap().pow(4);
        assert_eq!(long.len(), 12);
        assert!(verify_matrix_relation(&a, &b, &long, true).is_ok());
        assert!(verify_matrix_relation(&a, &b, &long, false).is_ok());
        assert!(verify_matrix_relation(&a, &b, &"aBa".parse().unwrap(), true).is_err());

        let (sa, sb) = (Mat2::from_ints(1, 2, 0, 1), Mat2::from_ints(1, 0, 2, 1));
        assert!(matrix_relation_search(&sa, &sb, 8, true, 2).claim().is_inconclusive());
    }

    #[test]
    fn rational_fallback() {
        let a = Mat2::new(q(2, 1), q(0, 1), q(0, 1), q(1, 2));
        let c = matrix_relation_search(&a, &a, 2, false, 1);
        assert_eq!(c.claim(), &Claim::Relation { word: "aB".parse().unwrap() });
    }
}
