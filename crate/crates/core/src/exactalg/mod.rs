//! Exact rational arithmetic, polynomials, rational functions, truncated
//! series and the big-float complex backend.

pub mod bigfloat;
pub mod field;
pub mod integrate;
pub mod mpoly;
pub mod poly;
pub mod ratfunc;
pub mod scalar;
pub mod series;

use thiserror::Error;

pub use bigfloat::{BigComplex, PrecisionGuard};
pub use field::Field;
pub use integrate::{hermite_antiderivative, Antiderivative};
pub use mpoly::{MPoly, MultiSeries};
pub use poly::Polynomial;
pub use ratfunc::RationalFunction;
pub use scalar::{parse_scalar, q, qf, Scalar};
pub use series::{BasePoint, TruncatedSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgError {
    #[error("cannot parse rational number {0:?}")]
    Parse(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("expansion order {order} is below the pole order {pole}")]
    OrderBelowPole { order: i64, pole: i64 },
    #[error("logarithmic part of {0} needs irrational coefficients")]
    NonRationalLog(String),
}

/// Residue of `f dz` at a rational point.
pub fn residue(f: &RationalFunction, point: &Scalar) -> Scalar {
    f.residue(point)
}

/// Laurent expansion of `f` at a rational point or at infinity.
pub fn laurent_expand(f: &RationalFunction, point: &BasePoint<Scalar>, order: i64) -> Result<TruncatedSeries<Scalar>, AlgError> {
    f.laurent_expand(point, order)
}
