//! Exact arithmetic: integer polynomials, Sturm sequences, real number fields
//! and the [`Scalar`] type every geometric routine computes with.

mod field;
mod poly;
mod scalar;
mod sturm;
mod text;

pub use field::NumberField;
pub use poly::{IntPolynomial, RatPoly};
pub use scalar::Scalar;
pub use sturm::{count_real_roots, count_roots_in, isolate_roots, sturm_sequence};
pub use text::{parse_field, parse_rational, parse_scalar, ScalarParser};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("invalid number field: {0}")]
    InvalidField(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different number fields")]
    FieldMismatch,
    #[error("parse error: {0}")]
    Parse(String),
}
