//! The coefficient-field abstraction shared by the exact and big-float series code.

use std::fmt::Debug;

use num_traits::{One, Signed, Zero};

use super::bigfloat::BigComplex;
use super::scalar::{to_f64, Scalar};

/// Arithmetic needed by truncated series and sparse polynomials.
///
/// Method names carry an `f` prefix so they never collide with the std
/// operator traits on `BigRational`.
pub trait Field: Clone + Debug {
    fn fzero() -> Self;
    fn fone() -> Self;
    fn from_scalar(q: &Scalar) -> Self;
    fn fis_zero(&self) -> bool;
    fn fadd(&self, o: &Self) -> Self;
    fn fsub(&self, o: &Self) -> Self;
    fn fmul(&self, o: &Self) -> Self;
    fn fdiv(&self, o: &Self) -> Self;
    fn fneg(&self) -> Self;
    /// Rough magnitude, used only for diagnostics and pivoting.
    fn magnitude(&self) -> f64;

    fn from_i64(v: i64) -> Self {
        Self::from_scalar(&Scalar::from_integer(v.into()))
    }

    fn fpowi(&self, n: u32) -> Self {
        (0..n).fold(Self::fone(), |acc, _| acc.fmul(self))
    }
}

impl Field for Scalar {
    fn fzero() -> Self {
        Zero::zero()
    }
    fn fone() -> Self {
        One::one()
    }
    fn from_scalar(q: &Scalar) -> Self {
        q.clone()
    }
    fn fis_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn fadd(&self, o: &Self) -> Self {
        self + o
    }
    fn fsub(&self, o: &Self) -> Self {
        self - o
    }
    fn fmul(&self, o: &Self) -> Self {
        self * o
    }
    fn fdiv(&self, o: &Self) -> Self {
        self / o
    }
    fn fneg(&self) -> Self {
        -self
    }
    fn magnitude(&self) -> f64 {
        to_f64(&self.abs())
    }
}

impl Field for BigComplex {
    fn fzero() -> Self {
        BigComplex::zero()
    }
    fn fone() -> Self {
        BigComplex::one()
    }
    fn from_scalar(q: &Scalar) -> Self {
        BigComplex::from_scalar(q)
    }
    fn fis_zero(&self) -> bool {
        BigComplex::is_zero(self)
    }
    fn fadd(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn fsub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn fmul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn fdiv(&self, o: &Self) -> Self {
        self.div(o)
    }
    fn fneg(&self) -> Self {
        self.neg()
    }
    fn magnitude(&self) -> f64 {
        self.abs_f64()
    }
}
