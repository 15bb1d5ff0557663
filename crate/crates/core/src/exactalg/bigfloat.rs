//! Arbitrary-precision real and complex floating values.
//!
//! The working precision is thread-local and defaults to 166 bits, or to the
//! value of `GKZ_PRECISION_BITS` when that is set. Every operation rounds to the
//! current working precision, so raising it with [`PrecisionGuard`] before a
//! computation is all a caller has to do.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use super::scalar::Scalar;

pub const DEFAULT_PRECISION_BITS: usize = 166;
pub const PRECISION_ENV: &str = "GKZ_PRECISION_BITS";
const RM: RoundingMode = RoundingMode::ToEven;

fn default_precision_bits() -> usize {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .map(|b| b.max(64))
        .unwrap_or(DEFAULT_PRECISION_BITS)
}

thread_local! {
    static PRECISION: Cell<usize> = Cell::new(default_precision_bits());
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache allocation"));
}

pub fn precision() -> usize {
    PRECISION.with(|p| p.get())
}

/// Sets the working precision for the current thread until dropped.
pub struct PrecisionGuard {
    saved: usize,
}

impl PrecisionGuard {
    pub fn new(bits: usize) -> Self {
        let saved = precision();
        PRECISION.with(|p| p.set(bits.max(64)));
        PrecisionGuard { saved }
    }
}

impl Drop for PrecisionGuard {
    fn drop(&mut self) {
        let saved = self.saved;
        PRECISION.with(|p| p.set(saved));
    }
}

fn with_cc<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Real helpers over `BigFloat`, all at the working precision.
pub mod real {
    use super::*;

    pub fn from_f64(v: f64) -> BigFloat {
        BigFloat::from_f64(v, precision())
    }

    pub fn from_i64(v: i64) -> BigFloat {
        BigFloat::from_i64(v, precision())
    }

    pub fn parse_dec(s: &str) -> BigFloat {
        with_cc(|cc| BigFloat::parse(s, Radix::Dec, precision(), RM, cc))
    }

    pub fn from_scalar(x: &Scalar) -> BigFloat {
        let p = precision() + 64;
        let n = with_cc(|cc| BigFloat::parse(&x.numer().to_string(), Radix::Dec, p, RM, cc));
        let d = with_cc(|cc| BigFloat::parse(&x.denom().to_string(), Radix::Dec, p, RM, cc));
        n.div(&d, precision(), RM)
    }

    pub fn to_f64(x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        if x.is_nan() {
            return f64::NAN;
        }
        if x.is_inf_pos() {
            return f64::INFINITY;
        }
        if x.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let mut y = x.clone();
        y.set_precision(64, RM).ok();
        let s = format!("{}", y);
        s.parse::<f64>().unwrap_or(f64::NAN)
    }

    pub fn to_string_digits(x: &BigFloat, digits: usize) -> String {
        let bits = ((digits as f64) * 3.33).ceil() as usize + 4;
        let mut y = x.clone();
        y.set_precision(bits.max(64), RM).ok();
        format!("{}", y)
    }

    pub fn add(a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, precision(), RM)
    }
    pub fn sub(a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, precision(), RM)
    }
    pub fn mul(a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, precision(), RM)
    }
    pub fn div(a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, precision(), RM)
    }
    pub fn sqrt(a: &BigFloat) -> BigFloat {
        a.sqrt(precision(), RM)
    }
    pub fn exp(a: &BigFloat) -> BigFloat {
        with_cc(|cc| a.exp(precision(), RM, cc))
    }
    pub fn ln(a: &BigFloat) -> BigFloat {
        with_cc(|cc| a.ln(precision(), RM, cc))
    }
    pub fn sin(a: &BigFloat) -> BigFloat {
        with_cc(|cc| a.sin(precision(), RM, cc))
    }
    pub fn cos(a: &BigFloat) -> BigFloat {
        with_cc(|cc| a.cos(precision(), RM, cc))
    }
    pub fn pi() -> BigFloat {
        with_cc(|cc| cc.pi(precision(), RM))
    }

    pub fn cmp(a: &BigFloat, b: &BigFloat) -> Ordering {
        match a.cmp(b) {
            Some(c) if c < 0 => Ordering::Less,
            Some(c) if c > 0 => Ordering::Greater,
            _ => Ordering::Equal,
        }
    }

    /// Four-quadrant arctangent of `y/x`.
    pub fn atan2(y: &BigFloat, x: &BigFloat) -> BigFloat {
        let p = precision();
        if x.is_zero() {
            if y.is_zero() {
                return from_i64(0);
            }
            let half = div(&pi(), &from_i64(2));
            return if y.is_negative() { half.neg() } else { half };
        }
        let ay = y.abs();
        let ax = x.abs();
        // Keep the atan argument at most 1 in magnitude.
        let base = if cmp(&ay, &ax) != Ordering::Greater {
            with_cc(|cc| div(&ay, &ax).atan(p, RM, cc))
        } else {
            let t = with_cc(|cc| div(&ax, &ay).atan(p, RM, cc));
            sub(&div(&pi(), &from_i64(2)), &t)
        };
        let ang = if x.is_negative() { sub(&pi(), &base) } else { base };
        if y.is_negative() {
            ang.neg()
        } else {
            ang
        }
    }
}

/// A complex number with arbitrary-precision parts.
#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: BigFloat,
    pub im: BigFloat,
    precision_bits: usize,
}

impl BigComplex {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        BigComplex { re, im, precision_bits: precision() }
    }

    pub fn precision_bits(&self) -> usize {
        self.precision_bits
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        Self::new(real::from_f64(re), real::from_f64(im))
    }

    pub fn from_scalar(x: &Scalar) -> Self {
        Self::new(real::from_scalar(x), real::from_i64(0))
    }

    pub fn from_scalars(re: &Scalar, im: &Scalar) -> Self {
        Self::new(real::from_scalar(re), real::from_scalar(im))
    }

    pub fn from_real(re: BigFloat) -> Self {
        Self::new(re, real::from_i64(0))
    }

    pub fn from_i64(v: i64) -> Self {
        Self::new(real::from_i64(v), real::from_i64(0))
    }

    pub fn zero() -> Self {
        Self::from_i64(0)
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn i() -> Self {
        Self::new(real::from_i64(0), real::from_i64(1))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (real::to_f64(&self.re), real::to_f64(&self.im))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(real::add(&self.re, &o.re), real::add(&self.im, &o.im))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(real::sub(&self.re, &o.re), real::sub(&self.im, &o.im))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = real::sub(&real::mul(&self.re, &o.re), &real::mul(&self.im, &o.im));
        let im = real::add(&real::mul(&self.re, &o.im), &real::mul(&self.im, &o.re));
        Self::new(re, im)
    }

    pub fn norm_sqr(&self) -> BigFloat {
        real::add(&real::mul(&self.re, &self.re), &real::mul(&self.im, &self.im))
    }

    pub fn abs(&self) -> BigFloat {
        real::sqrt(&self.norm_sqr())
    }

    pub fn abs_f64(&self) -> f64 {
        real::to_f64(&self.abs())
    }

    pub fn div(&self, o: &Self) -> Self {
        let d = o.norm_sqr();
        let re = real::add(&real::mul(&self.re, &o.re), &real::mul(&self.im, &o.im));
        let im = real::sub(&real::mul(&self.im, &o.re), &real::mul(&self.re, &o.im));
        Self::new(real::div(&re, &d), real::div(&im, &d))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), self.im.neg())
    }

    pub fn scale(&self, s: &BigFloat) -> Self {
        Self::new(real::mul(&self.re, s), real::mul(&self.im, s))
    }

    pub fn recip(&self) -> Self {
        Self::one().div(self)
    }

    pub fn powi(&self, n: i64) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Principal square root, branch cut on the negative real axis.
    pub fn sqrt(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let r = self.abs();
        let two = real::from_i64(2);
        if !self.re.is_negative() {
            let t = real::sqrt(&real::div(&real::add(&r, &self.re), &two));
            let im = real::div(&self.im, &real::mul(&two, &t));
            Self::new(t, im)
        } else {
            let t = real::sqrt(&real::div(&real::sub(&r, &self.re), &two));
            let re = real::div(&self.im.abs(), &real::mul(&two, &t));
            let im = if self.im.is_negative() { t.neg() } else { t };
            Self::new(re, im)
        }
    }

    pub fn arg(&self) -> BigFloat {
        real::atan2(&self.im, &self.re)
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        let re = real::div(&real::ln(&self.norm_sqr()), &real::from_i64(2));
        Self::new(re, self.arg())
    }

    pub fn exp(&self) -> Self {
        let m = real::exp(&self.re);
        Self::new(real::mul(&m, &real::cos(&self.im)), real::mul(&m, &real::sin(&self.im)))
    }

    /// Principal power `self^e` for a rational exponent.
    pub fn pow_scalar(&self, e: &Scalar) -> Self {
        if e.is_integer() {
            use num_traits::ToPrimitive;
            if let Some(n) = e.numer().to_i64() {
                return self.powi(n);
            }
        }
        self.ln().mul(&Self::from_scalar(e)).exp()
    }

    pub fn pi() -> Self {
        Self::from_real(real::pi())
    }

    pub fn dist(&self, o: &Self) -> f64 {
        self.sub(o).abs_f64()
    }
}

impl PartialEq for BigComplex {
    fn eq(&self, o: &Self) -> bool {
        real::cmp(&self.re, &o.re) == Ordering::Equal && real::cmp(&self.im, &o.im) == Ordering::Equal
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_f64();
        write!(f, "{:.17e}{:+.17e}i", re, im)
    }
}

/// Roots of a complex polynomial (coefficients indexed by degree) by the
/// Aberth–Ehrlich iteration at the working precision.
pub fn poly_roots(coeffs: &[BigComplex]) -> Vec<BigComplex> {
    let mut c: Vec<BigComplex> = coeffs.to_vec();
    while c.last().map(|x| x.is_zero()).unwrap_or(false) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n].clone();
    let c: Vec<BigComplex> = c.iter().map(|x| x.div(&lead)).collect();
    // Starting radius from the Cauchy bound.
    let bound = 1.0 + c[..n].iter().map(|x| x.abs_f64()).fold(0.0, f64::max);
    let mut z: Vec<BigComplex> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            let r = 0.5 * bound;
            BigComplex::from_f64(r * ang.cos(), r * ang.sin())
        })
        .collect();
    let eval = |x: &BigComplex| {
        let mut p = c[n].clone();
        let mut dp = BigComplex::zero();
        for k in (0..n).rev() {
            dp = dp.mul(x).add(&p);
            p = p.mul(x).add(&c[k]);
        }
        (p, dp)
    };
    let tol = 2f64.powi(-(precision() as i32) + 8);
    for _ in 0..(60 + 4 * precision()) {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = eval(&z[i]);
            if p.is_zero() {
                continue;
            }
            let ratio = p.div(&dp);
            let mut s = BigComplex::zero();
            for j in 0..n {
                if j != i {
                    s = s.add(&z[i].sub(&z[j]).recip());
                }
            }
            let denom = BigComplex::one().sub(&ratio.mul(&s));
            let step = ratio.div(&denom);
            let scale = z[i].abs_f64().max(1.0);
            max_step = max_step.max(step.abs_f64() / scale);
            z[i] = z[i].sub(&step);
        }
        if max_step < tol {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::scalar::qf;

    #[test]
    fn conversions_round_trip() {
        let x = BigComplex::from_scalar(&qf(-3, 8));
        assert_eq!(x.to_f64(), (-0.375, 0.0));
        assert!((real::to_f64(&real::pi()) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn elementary_functions_agree_with_f64() {
        let z = BigComplex::from_f64(0.3, -1.7);
        let (er, ei) = z.exp().to_f64();
        let w = num_complex_exp(0.3, -1.7);
        assert!((er - w.0).abs() < 1e-14 && (ei - w.1).abs() < 1e-14);
        let back = z.exp().ln();
        assert!(back.dist(&z) < 1e-40);
        let s = BigComplex::from_f64(-4.0, 0.0).sqrt();
        assert!(s.dist(&BigComplex::from_f64(0.0, 2.0)) < 1e-45);
        let s = BigComplex::from_f64(-4.0, -0.0).sqrt();
        assert!(s.mul(&s).dist(&BigComplex::from_f64(-4.0, 0.0)) < 1e-45);
    }

    fn num_complex_exp(a: f64, b: f64) -> (f64, f64) {
        (a.exp() * b.cos(), a.exp() * b.sin())
    }

    #[test]
    fn third_roots_of_unity() {
        let c = vec![BigComplex::from_i64(-1), BigComplex::zero(), BigComplex::zero(), BigComplex::one()];
        let r = poly_roots(&c);
        assert_eq!(r.len(), 3);
        for z in r {
            assert!(z.powi(3).dist(&BigComplex::one()) < 1e-45);
        }
    }

    #[test]
    fn guard_restores_precision() {
        let before = precision();
        {
            let _g = PrecisionGuard::new(300);
            assert_eq!(precision(), 300);
        }
        assert_eq!(precision(), before);
    }
}
