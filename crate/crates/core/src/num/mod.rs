//! Exact scalars: arbitrary-precision rationals, real quadratic surds and
//! rational 2×2 matrices.

mod mat2;
mod rational;
mod surd;

pub use mat2::Mat2;
pub use rational::{q, Rational};
pub use surd::QuadSurd;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("singular matrix has no inverse")]
    SingularMatrix,
    #[error("radicands {0} and {1} do not share a quadratic field")]
    IncompatibleRadicands(String, String),
    #[error("radicand must be positive, got {0}")]
    NonPositiveRadicand(String),
    #[error("cannot parse {0:?} as a rational")]
    Parse(String),
}
