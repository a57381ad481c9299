use std::fmt;

use serde::{Deserialize, Serialize};

use super::{NumError, Rational};

/// A 2×2 rational matrix, row major.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat2(pub [[Rational; 2]; 2]);

impl Mat2 {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Mat2::from_ints(1, 0, 0, 1)
    }

    pub fn a(&self) -> &Rational {
        &self.0[0][0]
    }
    pub fn b(&self) -> &Rational {
        &self.0[0][1]
    }
    pub fn c(&self) -> &Rational {
        &self.0[1][0]
    }
    pub fn d(&self) -> &Rational {
        &self.0[1][1]
    }

    pub fn det(&self) -> Rational {
        self.a() * self.d() - self.b() * self.c()
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let m = &self.0;
        let n = &rhs.0;
        Mat2::new(
            &m[0][0] * &n[0][0] + &m[0][1] * &n[1][0],
            &m[0][0] * &n[0][1] + &m[0][1] * &n[1][1],
            &m[1][0] * &n[0][0] + &m[1][1] * &n[1][0],
            &m[1][0] * &n[0][1] + &m[1][1] * &n[1][1],
        )
    }

    pub fn inv(&self) -> Result<Mat2, NumError> {
        let det = self.det();
        if det.is_zero() {
            return Err(NumError::SingularMatrix);
        }
        let k = det.recip()?;
        Ok(Mat2::new(
            self.d() * &k,
            -(self.b() * &k),
            -(self.c() * &k),
            self.a() * &k,
        ))
    }

    pub fn scale(&self, k: &Rational) -> Mat2 {
        Mat2::new(self.a() * k, self.b() * k, self.c() * k, self.d() * k)
    }

    /// `M · (x, y)ᵀ`.
    pub fn apply(&self, x: &Rational, y: &Rational) -> (Rational, Rational) {
        (self.a() * x + self.b() * y, self.c() * x + self.d() * y)
    }

    pub fn is_identity(&self) -> bool {
        self.b().is_zero() && self.c().is_zero() && self.a().is_one() && self.d().is_one()
    }

    /// True when the matrix is a nonzero scalar multiple of the identity.
    pub fn is_scalar(&self) -> bool {
        self.b().is_zero() && self.c().is_zero() && self.a() == self.d() && !self.a().is_zero()
    }

    /// Representative of the projective class with the first nonzero entry
    /// equal to one.
    pub fn projective_normal(&self) -> Mat2 {
        let lead = self
            .0
            .iter()
            .flatten()
            .find(|x| !x.is_zero())
            .cloned()
            .unwrap_or_else(Rational::one);
        self.scale(&lead.recip().expect("nonzero lead"))
    }

    pub fn projectively_eq(&self, other: &Mat2) -> bool {
        self.projective_normal() == other.projective_normal()
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().flatten().all(Rational::is_integer)
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a(), self.b(), self.c(), self.d())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;

    #[test]
    fn inverse_round_trip() {
        let a = Mat2::new(q(3, 2), q(-1, 1), q(2, 5), q(7, 3));
        assert!(a.mul(&a.inv().unwrap()).is_identity());
        assert!(a.inv().unwrap().mul(&a).is_identity());
    }

    #[test]
    fn triangular_det() {
        assert_eq!(Mat2::from_ints(1, 2, 0, 1).det(), q(1, 1));
    }

    #[test]
    fn hand_product() {
        let p = Mat2::from_ints(1, 2, 0, 1).mul(&Mat2::from_ints(1, 0, 2, 1));
        assert_eq!(p, Mat2::from_ints(5, 2, 2, 1));
    }

    #[test]
    fn singular_inverse_fails() {
        assert_eq!(Mat2::from_ints(1, 2, 2, 4).inv(), Err(NumError::SingularMatrix));
    }

    #[test]
    fn projective_classes() {
        let m = Mat2::from_ints(2, 4, 6, 8);
        assert!(m.projectively_eq(&Mat2::new(q(1, 2), q(1, 1), q(3, 2), q(2, 1))));
        assert!(Mat2::from_ints(-1, 0, 0, -1).is_scalar());
        assert!(!Mat2::from_ints(-1, 0, 0, 1).is_scalar());
    }

    #[test]
    fn serde_shape() {
        let j = serde_json::to_string(&Mat2::new(q(1, 2), q(0, 1), q(-3, 1), q(1, 1))).unwrap();
        assert_eq!(j, r#"[["1/2","0"],["-3","1"]]"#);
    }
}
