//! Reduced univariate rational functions with a monic denominator.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde_json::json;

use super::bigfloat::BigComplex;
use super::field::Field;
use super::poly::Polynomial;
use super::scalar::{q, Scalar};
use super::series::{BasePoint, TruncatedSeries};
use super::AlgError;

/// `num / den` with `gcd(num, den) = 1` and `den` monic, so equality is structural.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, AlgError> {
        if den.is_zero() {
            return Err(AlgError::ZeroDenominator);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = Polynomial::gcd(&num, &den);
        let (mut n, mut d) = if g.deg() > 0 { (num.exact_div(&g), den.exact_div(&g)) } else { (num, den) };
        let l = d.lc();
        if !l.is_one() {
            let inv = l.recip();
            n = n.scale(&inv);
            d = d.scale(&inv);
        }
        RationalFunction { num: n, den: d }
    }

    pub fn zero() -> Self {
        RationalFunction { num: Polynomial::zero(), den: Polynomial::one() }
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        RationalFunction { num: Polynomial::constant(c), den: Polynomial::one() }
    }

    pub fn from_i64(c: i64) -> Self {
        Self::constant(q(c))
    }

    pub fn z() -> Self {
        Self::from_poly(Polynomial::z())
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction { num: p, den: Polynomial::one() }
    }

    /// `1 / (z - a)^k`.
    pub fn pole(a: &Scalar, k: u32) -> Self {
        Self::reduce(Polynomial::one(), Polynomial::linear_root(a).pow(k))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.deg() == 0
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunction { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Self, AlgError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, n: i32) -> Self {
        if n < 0 {
            return self.recip().expect("power of zero rational function").pow(-n);
        }
        // Powers of coprime polynomials stay coprime.
        let (num, den) = (self.num.pow(n as u32), self.den.pow(n as u32));
        RationalFunction { num, den }
    }

    pub fn derivative(&self) -> Self {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::reduce(n, &self.den * &self.den)
    }

    /// Value at a point, `None` at a pole.
    pub fn eval(&self, x: &Scalar) -> Option<Scalar> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    pub fn eval_field<T: Field>(&self, x: &T) -> T {
        self.num.eval_field(x).fdiv(&self.den.eval_field(x))
    }

    /// `self(r(z))`.
    pub fn compose(&self, r: &Self) -> Self {
        let n = horner_rf(&self.num, r);
        let d = horner_rf(&self.den, r);
        &n / &d
    }

    /// `self(-z)`.
    pub fn reflect(&self) -> Self {
        Self::reduce(self.num.reflect(), self.den.reflect())
    }

    /// `deg num - deg den`; the order of growth at infinity.
    pub fn degree(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.num.deg() - self.den.deg()
        }
    }

    /// Limit at infinity, `None` when the function grows.
    pub fn limit_at_infinity(&self) -> Option<Scalar> {
        match self.degree() {
            d if d > 0 => None,
            0 => Some(self.num.lc() / self.den.lc()),
            _ => Some(Scalar::zero()),
        }
    }

    /// Order of vanishing at `a` (negative for poles).
    pub fn order_at(&self, a: &Scalar) -> i64 {
        if self.is_zero() {
            return i64::MAX;
        }
        (self.num.shift(a).valuation() as i64) - (self.den.shift(a).valuation() as i64)
    }

    /// Laurent expansion at a rational point or at infinity (variable `1/z`),
    /// with coefficients through `t^order`.
    pub fn laurent_expand(&self, point: &BasePoint<Scalar>, order: i64) -> Result<TruncatedSeries<Scalar>, AlgError> {
        let (n, d) = match point {
            BasePoint::At(a) => (self.num.shift(a), self.den.shift(a)),
            BasePoint::Infinity => {
                let m = self.num.deg().max(self.den.deg()).max(0) as usize;
                (self.num.reverse(m), self.den.reverse(m))
            }
        };
        if self.is_zero() {
            return Ok(TruncatedSeries::zero_at(point.clone(), order));
        }
        let vn = n.valuation() as i64;
        let vd = d.valuation() as i64;
        let min = vn - vd;
        if order < min {
            return Err(AlgError::OrderBelowPole { order, pole: min });
        }
        let rel = order - min;
        let nn = TruncatedSeries::new(point.clone(), 0, n.coeffs()[vn as usize..].to_vec(), rel);
        let dd = TruncatedSeries::new(point.clone(), 0, d.coeffs()[vd as usize..].to_vec(), rel);
        let s = nn.mul(&dd.inv().expect("nonzero denominator"));
        Ok(TruncatedSeries::new(point.clone(), min, s.coeffs().to_vec(), order))
    }

    /// Taylor expansion at a complex point that is not a pole.
    pub fn expand_at_complex(&self, point: &BigComplex, order: i64) -> TruncatedSeries<BigComplex> {
        let n = taylor_complex(&self.num, point, order.max(0) as usize);
        let d = taylor_complex(&self.den, point, order.max(0) as usize);
        let base = BasePoint::At(point.clone());
        let ns = TruncatedSeries::new(base.clone(), 0, n, order);
        let ds = TruncatedSeries::new(base, 0, d, order);
        ns.mul(&ds.inv().expect("expansion point is a pole"))
    }

    /// Coefficient of `(z - point)^{-1}`.
    pub fn residue(&self, point: &Scalar) -> Scalar {
        let ord = self.order_at(point);
        if ord >= 0 {
            return Scalar::zero();
        }
        self.laurent_expand(&BasePoint::At(point.clone()), -1)
            .map(|s| s.coeff(-1))
            .unwrap_or_else(|_| Scalar::zero())
    }

    /// Residue of `f dz` at infinity, `-[t^1]` of `f(1/t)`.
    pub fn residue_at_infinity(&self) -> Scalar {
        if self.is_zero() || self.degree() < -1 {
            return Scalar::zero();
        }
        let s = self.laurent_expand(&BasePoint::Infinity, 1).expect("order above pole");
        -s.coeff(1)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({"num": self.num.to_json(), "den": self.den.to_json()})
    }
}

/// Coefficients of `p(point + t)` through `t^order`, by repeated synthetic division.
pub fn taylor_complex(p: &Polynomial, point: &BigComplex, order: usize) -> Vec<BigComplex> {
    let mut work: Vec<BigComplex> = p.coeffs().iter().map(BigComplex::from_scalar).collect();
    let mut out = Vec::new();
    while !work.is_empty() && out.len() <= order {
        // Divide by (z - point): remainder is the next Taylor coefficient.
        let n = work.len();
        let mut quot = vec![BigComplex::zero(); n - 1];
        let mut acc = work[n - 1].clone();
        for k in (0..n - 1).rev() {
            quot[k] = acc.clone();
            acc = acc.mul(point).add(&work[k]);
        }
        out.push(acc);
        work = quot;
    }
    out
}

fn horner_rf(p: &Polynomial, r: &RationalFunction) -> RationalFunction {
    p.coeffs()
        .iter()
        .rev()
        .fold(RationalFunction::zero(), |acc, c| &(&acc * r) + &RationalFunction::constant(c.clone()))
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "[{}] / [{}]", self.num, self.den)
        }
    }
}

impl From<Polynomial> for RationalFunction {
    fn from(p: Polynomial) -> Self {
        Self::from_poly(p)
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, o: &RationalFunction) -> RationalFunction {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return RationalFunction::reduce(&self.num + &o.num, self.den.clone());
        }
        let g = Polynomial::gcd(&self.den, &o.den);
        let a = self.den.exact_div(&g);
        let b = o.den.exact_div(&g);
        let n = &(&self.num * &b) + &(&o.num * &a);
        RationalFunction::reduce(n, &(&a * &b) * &g)
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, o: &RationalFunction) -> RationalFunction {
        self + &(-o)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, o: &RationalFunction) -> RationalFunction {
        if self.is_zero() || o.is_zero() {
            return RationalFunction::zero();
        }
        // Cross-cancel first to keep the gcd in `reduce` small.
        let g1 = Polynomial::gcd(&self.num, &o.den);
        let g2 = Polynomial::gcd(&o.num, &self.den);
        let n = &self.num.exact_div(&g1) * &o.num.exact_div(&g2);
        let d = &self.den.exact_div(&g2) * &o.den.exact_div(&g1);
        RationalFunction::reduce(n, d)
    }
}

impl Div for &RationalFunction {
    type Output = RationalFunction;
    fn div(self, o: &RationalFunction) -> RationalFunction {
        self * &o.recip().expect("division by the zero rational function")
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RationalFunction {
            type Output = RationalFunction;
            fn $m(self, o: RationalFunction) -> RationalFunction {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::scalar::qf;

    fn rf(n: &[i64], d: &[i64]) -> RationalFunction {
        RationalFunction::new(Polynomial::from_i64(n), Polynomial::from_i64(d)).unwrap()
    }

    #[test]
    fn canonical_form() {
        let a = rf(&[-2, 0, 2], &[2, 2]);
        assert_eq!(a, rf(&[-1, 1], &[1]));
        assert_eq!(rf(&[3], &[0, 6]).den(), &Polynomial::z());
    }

    #[test]
    fn residues_of_simple_examples() {
        assert_eq!(rf(&[1], &[0, 1]).residue(&q(0)), q(1));
        assert_eq!(rf(&[1], &[0, 0, 1]).residue(&q(0)), q(0));
        assert_eq!(rf(&[1], &[-1, 0, 1]).residue(&q(1)), qf(1, 2));
        assert_eq!(rf(&[1], &[0, 1]).residue_at_infinity(), q(-1));
    }

    #[test]
    fn laurent_examples() {
        let f = rf(&[1], &[-1, 0, 1]);
        let s = f.laurent_expand(&BasePoint::At(q(0)), 2).unwrap();
        assert_eq!(s.coeffs(), &[q(-1), q(0), q(-1)]);
        let s = RationalFunction::z().laurent_expand(&BasePoint::Infinity, 0).unwrap();
        assert_eq!(s.min_exp(), -1);
        assert_eq!(s.coeff(-1), q(1));
        let f = rf(&[-1, 0, 3], &[0, 0, 0, 48]);
        let s = f.laurent_expand(&BasePoint::At(q(0)), -1).unwrap();
        assert_eq!(s.min_exp(), -3);
        assert_eq!(s.coeffs(), &[qf(-1, 48), q(0), qf(3, 48)]);
        assert!(f.laurent_expand(&BasePoint::At(q(0)), -4).is_err());
    }

    #[test]
    fn compose_and_derivative() {
        let f = rf(&[0, 1], &[1, 1]);
        let g = rf(&[0, 0, 1], &[1]);
        let h = f.compose(&g);
        assert_eq!(h, rf(&[0, 0, 1], &[1, 0, 1]));
        assert_eq!(f.derivative(), rf(&[1], &[1, 2, 1]));
    }
}
