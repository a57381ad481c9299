use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{NumError, Rational};

/// An element `a + b·√d` of a real quadratic field, `d` a positive square-free
/// integer. Rational values are normalized to `b = 0, d = 1`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "SurdRepr", into = "SurdRepr")]
pub struct QuadSurd {
    a: Rational,
    b: Rational,
    d: BigInt,
}

#[derive(Serialize, Deserialize)]
struct SurdRepr {
    a: Rational,
    b: Rational,
    d: Radicand,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Radicand {
    Small(u64),
    Big(String),
}

impl TryFrom<SurdRepr> for QuadSurd {
    type Error = NumError;
    fn try_from(r: SurdRepr) -> Result<Self, NumError> {
        let d = match r.d {
            Radicand::Small(n) => BigInt::from(n),
            Radicand::Big(s) => s.parse().map_err(|_| NumError::Parse(s))?,
        };
        QuadSurd::new(r.a, r.b, d)
    }
}

impl From<QuadSurd> for SurdRepr {
    fn from(s: QuadSurd) -> Self {
        let d = match s.d.to_u64() {
            Some(n) => Radicand::Small(n),
            None => Radicand::Big(s.d.to_string()),
        };
        SurdRepr { a: s.a, b: s.b, d }
    }
}

/// Splits `n > 0` as `k² · s`, `s` square-free. Trial division up to a fixed
/// bound; a leftover cofactor with no small prime factors is square-free unless
/// it is itself a perfect square or carries a square of a prime beyond the
/// bound, the first of which is checked.
fn square_free_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.clone();
    let mut k = BigInt::one();
    let mut s = BigInt::one();
    let mut p: u64 = 2;
    while p <= 100_000 {
        let pb = BigInt::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut count = 0u32;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            count += 1;
        }
        if count > 0 {
            k *= pb.pow(count / 2);
            if count % 2 == 1 {
                s *= &pb;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let r = rest.sqrt();
    if &r * &r == rest {
        k *= r;
    } else {
        s *= rest;
    }
    (k, s)
}

/// Sign of `a + b√d` for `d` not a perfect square.
fn sign_single(a: &Rational, b: &Rational, d: &BigInt) -> i32 {
    let sa = a.signum();
    let sb = b.signum();
    if sb == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    let lhs = a.square();
    let rhs = b.square() * Rational::from_int(d.clone());
    match lhs.cmp(&rhs) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => 0,
    }
}

impl QuadSurd {
    pub fn new(a: Rational, b: Rational, d: impl Into<BigInt>) -> Result<Self, NumError> {
        let d = d.into();
        if !d.is_positive() {
            return Err(NumError::NonPositiveRadicand(d.to_string()));
        }
        if b.is_zero() {
            return Ok(Self::rational(a));
        }
        let (k, s) = square_free_split(&d);
        let b = b * Rational::from_int(k);
        if s.is_one() {
            return Ok(Self::rational(a + b));
        }
        Ok(QuadSurd { a, b, d: s })
    }

    pub fn rational(a: Rational) -> Self {
        QuadSurd { a, b: Rational::zero(), d: BigInt::one() }
    }

    /// `√n` for a non-negative rational `n`.
    pub fn sqrt_of(n: &Rational) -> Result<Self, NumError> {
        if n.is_negative() {
            return Err(NumError::NonPositiveRadicand(n.to_string()));
        }
        if n.is_zero() {
            return Ok(Self::rational(Rational::zero()));
        }
        // √(p/q) = √(p q) / q
        let pq = n.numer() * n.denom();
        let inv_q = Rational::new(BigInt::one(), n.denom().clone())?;
        QuadSurd::new(Rational::zero(), inv_q, pq)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.a)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn common_radicand(&self, other: &QuadSurd) -> Result<BigInt, NumError> {
        if self.is_rational() {
            Ok(other.d.clone())
        } else if other.is_rational() || self.d == other.d {
            Ok(self.d.clone())
        } else {
            Err(NumError::IncompatibleRadicands(self.d.to_string(), other.d.to_string()))
        }
    }

    pub fn add(&self, other: &QuadSurd) -> Result<QuadSurd, NumError> {
        let d = self.common_radicand(other)?;
        QuadSurd::new(&self.a + &other.a, &self.b + &other.b, d)
    }

    pub fn sub(&self, other: &QuadSurd) -> Result<QuadSurd, NumError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> QuadSurd {
        QuadSurd { a: -&self.a, b: -&self.b, d: self.d.clone() }
    }

    pub fn mul(&self, other: &QuadSurd) -> Result<QuadSurd, NumError> {
        let d = self.common_radicand(other)?;
        let dq = Rational::from_int(d.clone());
        let a = &self.a * &other.a + &self.b * &other.b * &dq;
        let b = &self.a * &other.b + &self.b * &other.a;
        QuadSurd::new(a, b, d)
    }

    pub fn scale(&self, k: &Rational) -> QuadSurd {
        if k.is_zero() {
            return QuadSurd::rational(Rational::zero());
        }
        QuadSurd { a: &self.a * k, b: &self.b * k, d: self.d.clone() }
    }

    pub fn add_rational(&self, k: &Rational) -> QuadSurd {
        QuadSurd { a: &self.a + k, b: self.b.clone(), d: self.d.clone() }
    }

    /// `1 / (a + b√d) = (a − b√d) / (a² − d b²)`.
    pub fn inv(&self) -> Result<QuadSurd, NumError> {
        if self.is_zero() {
            return Err(NumError::DivisionByZero);
        }
        let norm = self.a.square() - self.b.square() * Rational::from_int(self.d.clone());
        let a = self.a.checked_div(&norm)?;
        let b = (-&self.b).checked_div(&norm)?;
        QuadSurd::new(a, b, self.d.clone())
    }

    pub fn div(&self, other: &QuadSurd) -> Result<QuadSurd, NumError> {
        self.mul(&other.inv()?)
    }

    pub fn signum(&self) -> i32 {
        sign_single(&self.a, &self.b, &self.d)
    }

    /// Exact comparison, valid across different radicands.
    pub fn cmp_exact(&self, other: &QuadSurd) -> Ordering {
        if self.is_rational() || other.is_rational() || self.d == other.d {
            let d = self.common_radicand(other).expect("radicands compatible");
            return sign_single(&(&self.a - &other.a), &(&self.b - &other.b), &d).cmp(&0);
        }
        // sign of r + s√d1 + t√d2 with s, t nonzero
        let r = &self.a - &other.a;
        let s = self.b.clone();
        let t = -&other.b;
        let su = sign_single(&r, &s, &self.d);
        let sv = t.signum();
        let sign = if su == 0 {
            sv
        } else if su == sv {
            su
        } else {
            // compare (r + s√d1)² against t² d2
            let d1 = Rational::from_int(self.d.clone());
            let d2 = Rational::from_int(other.d.clone());
            let alpha = r.square() + s.square() * &d1 - t.square() * &d2;
            let beta = Rational::from_int(2) * &r * &s;
            match sign_single(&alpha, &beta, &self.d) {
                1 => su,
                -1 => sv,
                _ => 0,
            }
        };
        sign.cmp(&0)
    }

    pub fn cmp_rational(&self, other: &Rational) -> Ordering {
        sign_single(&(&self.a - other), &self.b, &self.d).cmp(&0)
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * self.d.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

impl PartialEq for QuadSurd {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_exact(other) == Ordering::Equal
    }
}

impl Eq for QuadSurd {}

impl PartialOrd for QuadSurd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadSurd {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_exact(other)
    }
}

impl From<Rational> for QuadSurd {
    fn from(r: Rational) -> Self {
        QuadSurd::rational(r)
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} + ({})√{}", self.a, self.b, self.d)
        }
    }
}

impl fmt::Debug for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
