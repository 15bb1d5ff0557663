//! Dense univariate polynomials over the rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::bigfloat::{poly_roots, BigComplex, PrecisionGuard};
use super::field::Field;
use super::scalar::{fmt_scalar, lcm_of_denoms, q, Scalar};

/// Coefficients indexed by degree; the highest stored coefficient is nonzero.
#[derive(Clone, PartialEq, Eq, Debug, Default, Hash)]
pub struct Polynomial {
    coeffs: Vec<Scalar>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| q(v)).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `z`.
    pub fn z() -> Self {
        Self::monomial(Scalar::one(), 1)
    }

    pub fn monomial(c: Scalar, k: usize) -> Self {
        let mut v = vec![Scalar::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// `z - a`.
    pub fn linear_root(a: &Scalar) -> Self {
        Self::new(vec![-a.clone(), Scalar::one()])
    }

    pub fn from_roots(roots: &[Scalar]) -> Self {
        roots.iter().fold(Self::one(), |acc, r| &acc * &Self::linear_root(r))
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        self.coeffs.get(k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn deg(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn lc(&self) -> Scalar {
        self.coeffs.last().cloned().unwrap_or_else(Scalar::zero)
    }

    /// Lowest power of `z` with a nonzero coefficient (0 for the zero polynomial).
    pub fn valuation(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lc().recip();
        self.scale(&l)
    }

    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![Scalar::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        Self::new(v)
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut r = self.coeffs.clone();
        let dd = d.coeffs.len() - 1;
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let inv = d.lc().recip();
        let mut qv = vec![Scalar::zero(); r.len() - dd];
        for k in (0..qv.len()).rev() {
            let c = &r[k + dd] * &inv;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    let t = &c * dc;
                    r[k + j] -= t;
                }
            }
            qv[k] = c;
        }
        r.truncate(dd);
        (Self::new(qv), Self::new(r))
    }

    /// Division that is known to be exact.
    pub fn exact_div(&self, d: &Self) -> Self {
        let (qt, r) = self.div_rem(d);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        qt
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let r = x.rem(&y);
            x = y;
            y = r.monic();
        }
        x.monic()
    }

    /// Returns `(g, s, t)` with `s a + t b = g`, `g` the monic gcd.
    pub fn ext_gcd(a: &Self, b: &Self) -> (Self, Self, Self) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (Self::one(), Self::zero());
        let (mut t0, mut t1) = (Self::zero(), Self::one());
        while !r1.is_zero() {
            let (qt, r) = r0.div_rem(&r1);
            let s = &s0 - &(&qt * &s1);
            let t = &t0 - &(&qt * &t1);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let l = r0.lc().recip();
        (r0.scale(&l), s0.scale(&l), t0.scale(&l))
    }

    /// Solves `s a + t b = c` with `deg s < deg b`, for coprime `a`, `b`.
    pub fn solve_bezout(a: &Self, b: &Self, c: &Self) -> (Self, Self) {
        let (g, s0, _) = Self::ext_gcd(a, b);
        debug_assert!(g.is_one(), "Bezout solve needs coprime inputs");
        let s = (&s0 * c).rem(b);
        let t = (c - &(&s * a)).exact_div(b);
        (s, t)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Scalar::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Self {
        let mut v = vec![Scalar::zero()];
        for (k, c) in self.coeffs.iter().enumerate() {
            v.push(c / Scalar::from_integer(BigInt::from(k + 1)));
        }
        Self::new(v)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs.iter().rev().fold(Scalar::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_field<T: Field>(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::fzero(), |acc, c| acc.fmul(x).fadd(&T::from_scalar(c)))
    }

    /// `self(other(z))`.
    pub fn compose(&self, other: &Self) -> Self {
        self.coeffs.iter().rev().fold(Self::zero(), |acc, c| &(&acc * other) + &Self::constant(c.clone()))
    }

    /// `self(z + a)`.
    pub fn shift(&self, a: &Scalar) -> Self {
        self.compose(&Self::new(vec![a.clone(), Scalar::one()]))
    }

    /// `self(-z)`.
    pub fn reflect(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c.clone() } else { c.clone() })
                .collect(),
        )
    }

    /// `z^d self(1/z)` for `d >= deg`.
    pub fn reverse(&self, d: usize) -> Self {
        let mut v = vec![Scalar::zero(); d + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            v[d - k] = c.clone();
        }
        Self::new(v)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Integer coefficients of a rational multiple of `self` with unit content.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        let l = lcm_of_denoms(self.coeffs.iter());
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * Scalar::from_integer(l.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if g.is_zero() {
            return ints;
        }
        ints.into_iter().map(|c| c / &g).collect()
    }

    /// Yun's square-free decomposition of the monic part: entry `i` holds the
    /// product of the factors of multiplicity `i + 1`.
    pub fn squarefree_decomposition(&self) -> Vec<Self> {
        let f = self.monic();
        if f.deg() <= 0 {
            return Vec::new();
        }
        let fp = f.derivative();
        let a0 = Self::gcd(&f, &fp);
        let mut b = f.exact_div(&a0);
        let mut c = fp.exact_div(&a0);
        let mut d = &c - &b.derivative();
        let mut out = Vec::new();
        loop {
            let a = Self::gcd(&b, &d);
            out.push(a.clone());
            b = b.exact_div(&a);
            if b.deg() <= 0 {
                break;
            }
            c = d.exact_div(&a);
            d = &c - &b.derivative();
        }
        while out.last().map(|p| p.deg() <= 0).unwrap_or(false) {
            out.pop();
        }
        out
    }

    pub fn squarefree_part(&self) -> Self {
        if self.deg() <= 0 {
            return Self::one();
        }
        self.monic().exact_div(&Self::gcd(self, &self.derivative()))
    }

    pub fn resultant(a: &Self, b: &Self) -> Scalar {
        if a.is_zero() || b.is_zero() {
            return Scalar::zero();
        }
        let (da, db) = (a.deg(), b.deg());
        if db == 0 {
            return num_traits::pow(b.lc(), da as usize);
        }
        if da == 0 {
            return num_traits::pow(a.lc(), db as usize);
        }
        let r = a.rem(b);
        if r.is_zero() {
            return Scalar::zero();
        }
        let dr = r.deg();
        let sign = if (da * db) % 2 == 1 { -Scalar::one() } else { Scalar::one() };
        sign * num_traits::pow(b.lc(), (da - dr) as usize) * Self::resultant(b, &r)
    }

    /// All rational roots, each listed once.
    ///
    /// Roots are located numerically, snapped to the lattice `Z / lc` that must
    /// contain every rational root of the primitive integer polynomial, and then
    /// verified exactly.
    pub fn rational_roots(&self) -> Vec<Scalar> {
        let mut f = self.squarefree_part();
        let mut roots = Vec::new();
        if f.deg() <= 0 {
            return roots;
        }
        if f.coeff(0).is_zero() {
            roots.push(Scalar::zero());
            f = f.exact_div(&Self::z());
        }
        if f.deg() <= 0 {
            return roots;
        }
        let ints = f.primitive_integer();
        let lead = ints.last().unwrap().abs();
        let size_bits = ints.iter().map(|c| c.bits()).max().unwrap_or(1) as usize;
        let bits = 128 + 2 * size_bits + 2 * lead.bits() as usize;
        let _g = PrecisionGuard::new(bits);
        let cs: Vec<BigComplex> = f.coeffs.iter().map(BigComplex::from_scalar).collect();
        let lead_f = BigComplex::from_scalar(&Scalar::from_integer(lead.clone()));
        for r in poly_roots(&cs) {
            let (re, im) = r.to_f64();
            if im.abs() > 1e-6 * (1.0 + re.abs()) {
                continue;
            }
            // Round re * lead to the nearest integer in big-float arithmetic.
            let scaled = r.mul(&lead_f);
            let s = super::bigfloat::real::to_string_digits(&scaled.re, bits / 3);
            let Ok(approx) = super::scalar::parse_scalar(&sci_to_plain(&s)) else {
                continue;
            };
            let n = approx.round().to_integer();
            let cand = Scalar::new(n, lead.clone());
            if f.eval(&cand).is_zero() && !roots.contains(&cand) {
                roots.push(cand);
            }
        }
        roots.sort();
        roots
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.coeffs.iter().map(|c| serde_json::Value::String(fmt_scalar(c))).collect())
    }
}

/// Turns `1.25e+3`-style output into a plain decimal string.
pub(crate) fn sci_to_plain(s: &str) -> String {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (s, 0),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches(['-', '+']);
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    let mut digits: String = format!("{}{}", ip, fp);
    let mut point = ip.len() as i64 + exp;
    if point <= 0 {
        digits = "0".repeat((1 - point) as usize) + &digits;
        point = 1;
    }
    if point as usize > digits.len() {
        digits += &"0".repeat(point as usize - digits.len());
    }
    let (a, b) = digits.split_at(point as usize);
    let body = if b.is_empty() { a.to_string() } else { format!("{}.{}", a, b) };
    if neg {
        format!("-{}", body)
    } else {
        body
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({})", c)?,
                1 => write!(f, "({})*z", c)?,
                _ => write!(f, "({})*z^{}", c, k)?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        if self.is_zero() || o.is_zero() {
            return Polynomial::zero();
        }
        let mut v = vec![Scalar::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Polynomial::new(v)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, o: Polynomial) -> Polynomial {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::scalar::qf;

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_i64(c)
    }

    #[test]
    fn division_and_gcd() {
        let a = &p(&[-1, 0, 1]) * &p(&[2, 1]);
        let b = &p(&[-1, 1]) * &p(&[5, 0, 1]);
        assert_eq!(Polynomial::gcd(&a, &b), p(&[-1, 1]));
        let (qt, r) = a.div_rem(&b);
        assert_eq!(&(&qt * &b) + &r, a);
        let (g, s, t) = Polynomial::ext_gcd(&a, &b);
        assert_eq!(&(&s * &a) + &(&t * &b), g);
    }

    #[test]
    fn squarefree_pieces() {
        let f = &p(&[1, 1]).pow(3) * &(&p(&[-2, 1]) * &p(&[0, 1]).pow(2));
        let sq = f.squarefree_decomposition();
        assert_eq!(sq, vec![p(&[-2, 1]), p(&[0, 1]), p(&[1, 1])]);
    }

    #[test]
    fn resultant_matches_root_product() {
        // res(z^2 - 1, z - 3) = (1-3)(-1-3)
        assert_eq!(Polynomial::resultant(&p(&[-1, 0, 1]), &p(&[-3, 1])), q(8));
        assert_eq!(Polynomial::resultant(&p(&[-1, 1]), &p(&[-1, 0, 1])), q(0));
    }

    #[test]
    fn rational_roots_found_exactly() {
        let f = Polynomial::from_roots(&[qf(-3, 4), qf(5, 7), q(0), q(12)]);
        let f = &f * &p(&[2, 0, 1]);
        assert_eq!(f.rational_roots(), vec![qf(-3, 4), q(0), qf(5, 7), q(12)]);
    }

    #[test]
    fn compose_and_shift() {
        let f = p(&[1, 2, 3]);
        assert_eq!(f.shift(&q(1)).eval(&q(0)), f.eval(&q(1)));
        assert_eq!(f.reflect().eval(&q(2)), f.eval(&q(-2)));
        assert_eq!(f.reverse(2), p(&[3, 2, 1]));
    }

    #[test]
    fn plain_decimal_conversion() {
        assert_eq!(sci_to_plain("1.25e+3"), "1250");
        assert_eq!(sci_to_plain("-1.25e-2"), "-0.0125");
    }
}
