//! Sparse multivariate Laurent polynomials, truncated multivariate series and
//! division-free elimination.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::json;

use super::field::Field;
use super::poly::Polynomial;
use super::ratfunc::RationalFunction;
use super::scalar::{fmt_scalar, Scalar};

/// `sum c_e x^e` with integer (possibly negative) exponent vectors `e`.
#[derive(Clone, Debug)]
pub struct MPoly<T> {
    nvars: usize,
    terms: BTreeMap<Vec<i32>, T>,
}

impl<T: Field> MPoly<T> {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, T::fone())
    }

    pub fn monomial(nvars: usize, exps: Vec<i32>, c: T) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = Self::zero(nvars);
        p.add_term(exps, c);
        p
    }

    /// The coordinate `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, T::fone())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i32>, T> {
        &self.terms
    }

    pub fn coeff(&self, e: &[i32]) -> T {
        self.terms.get(e).cloned().unwrap_or_else(T::fzero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c x^e`, removing the term when it cancels.
    pub fn add_term(&mut self, e: Vec<i32>, c: T) {
        if c.fis_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let s = v.fadd(&c);
                if s.fis_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.fneg())
    }

    pub fn scale(&self, s: &T) -> Self {
        if s.fis_zero() {
            return Self::zero(self.nvars);
        }
        self.map(|c| c.fmul(s))
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> MPoly<U> {
        let mut r = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), f(c));
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<i32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1.fmul(c2));
            }
        }
        r
    }

    /// Product keeping only terms of total degree at most `cap`.
    pub fn mul_truncated(&self, o: &Self, cap: i32) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            let d1: i32 = e1.iter().sum();
            for (e2, c2) in &o.terms {
                if d1 + e2.iter().sum::<i32>() > cap {
                    continue;
                }
                let e: Vec<i32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1.fmul(c2));
            }
        }
        r
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(self.nvars), |acc, _| acc.mul(self))
    }

    /// Multiplies by the monomial `x^e`.
    pub fn shift(&self, e: &[i32]) -> Self {
        let mut r = Self::zero(self.nvars);
        for (k, c) in &self.terms {
            r.terms.insert(k.iter().zip(e).map(|(a, b)| a + b).collect(), c.clone());
        }
        r
    }

    pub fn total_degree(&self) -> i32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(i32::MIN)
    }

    pub fn max_degree_in(&self, i: usize) -> i32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(i32::MIN)
    }

    pub fn min_degree_in(&self, i: usize) -> i32 {
        self.terms.keys().map(|e| e[i]).min().unwrap_or(i32::MAX)
    }

    /// Renames variables: old variable `i` becomes new variable `perm[i]`.
    pub fn permute(&self, perm: &[usize], new_nvars: usize) -> Self {
        let mut r = Self::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut ne = vec![0; new_nvars];
            for (i, &k) in e.iter().enumerate() {
                ne[perm[i]] += k;
            }
            r.add_term(ne, c.clone());
        }
        r
    }

    /// Coefficients of powers of `x_i` (exponents `0..=max`; negatives rejected).
    pub fn coefficients_in(&self, i: usize) -> Vec<Self> {
        let top = self.max_degree_in(i).max(0) as usize;
        let mut out = vec![Self::zero(self.nvars); top + 1];
        for (e, c) in &self.terms {
            assert!(e[i] >= 0, "negative exponent in elimination variable");
            let mut ne = e.clone();
            let k = ne[i] as usize;
            ne[i] = 0;
            out[k].add_term(ne, c.clone());
        }
        out
    }

    /// Substitutes `x_i = v`, keeping the variable slot (now absent).
    pub fn substitute(&self, i: usize, v: &T) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne[i];
            ne[i] = 0;
            let f = if k >= 0 { v.fpowi(k as u32) } else { T::fone().fdiv(&v.fpowi((-k) as u32)) };
            r.add_term(ne, c.fmul(&f));
        }
        r
    }

    pub fn eval(&self, vals: &[T]) -> T {
        let mut acc = T::fzero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (k, v) in e.iter().zip(vals) {
                t = if *k >= 0 { t.fmul(&v.fpowi(*k as u32)) } else { t.fdiv(&v.fpowi((-*k) as u32)) };
            }
            acc = acc.fadd(&t);
        }
        acc
    }
}

impl<T: Field + PartialEq> PartialEq for MPoly<T> {
    fn eq(&self, o: &Self) -> bool {
        self.nvars == o.nvars && self.terms == o.terms
    }
}

impl MPoly<Scalar> {
    /// Substitutes a rational function of one variable for every coordinate.
    pub fn eval_rf(&self, vals: &[RationalFunction]) -> RationalFunction {
        let mut acc = RationalFunction::zero();
        for (e, c) in &self.terms {
            let mut t = RationalFunction::constant(c.clone());
            for (k, v) in e.iter().zip(vals) {
                if *k != 0 {
                    t = &t * &v.pow(*k);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Univariate polynomial in `x_i` (all other exponents must be zero).
    pub fn to_univariate(&self, i: usize) -> Polynomial {
        let mut v = vec![Scalar::zero(); self.max_degree_in(i).max(0) as usize + 1];
        for (e, c) in &self.terms {
            v[e[i] as usize] += c;
        }
        Polynomial::new(v)
    }

    pub fn from_univariate(p: &Polynomial, nvars: usize, i: usize) -> Self {
        let mut r = Self::zero(nvars);
        for (k, c) in p.coeffs().iter().enumerate() {
            let mut e = vec![0; nvars];
            e[i] = k as i32;
            r.add_term(e, c.clone());
        }
        r
    }

    /// Divides by the gcd of the coefficients and fixes the sign of the leading term.
    pub fn content_normalized(&self) -> Self {
        use num_integer::Integer;
        if self.is_zero() {
            return self.clone();
        }
        let l = super::scalar::lcm_of_denoms(self.terms.values());
        let ints: Vec<num_bigint::BigInt> =
            self.terms.values().map(|c| (c * Scalar::from_integer(l.clone())).to_integer()).collect();
        let g = ints.iter().fold(num_bigint::BigInt::zero(), |a, b| a.gcd(b));
        let lead_neg = self.terms.iter().next_back().map(|(_, c)| c < &Scalar::zero()).unwrap_or(false);
        let mut s = Scalar::new(l, g);
        if lead_neg {
            s = -s;
        }
        self.scale(&s)
    }

    /// Terms as `[[e_1, ..., e_n, "p/q"], ...]`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(e, c)| {
                    let mut v: Vec<serde_json::Value> = e.iter().map(|k| json!(k)).collect();
                    v.push(json!(fmt_scalar(c)));
                    serde_json::Value::Array(v)
                })
                .collect(),
        )
    }
}

/// Determinant by Berkowitz's division-free algorithm.
pub fn berkowitz_det<T: Field>(m: &[Vec<MPoly<T>>], nvars: usize) -> MPoly<T> {
    let n = m.len();
    if n == 0 {
        return MPoly::one(nvars);
    }
    let mut v = vec![MPoly::one(nvars), m[0][0].neg()];
    for r in 1..n {
        // Leading r x r block, column s = m[0..r][r], row = m[r][0..r].
        let a = m[r][r].clone();
        let mut col: Vec<MPoly<T>> = (0..r).map(|i| m[i][r].clone()).collect();
        let mut c = vec![MPoly::one(nvars), a.neg()];
        for _ in 0..r {
            let rs = (0..r).fold(MPoly::zero(nvars), |acc, j| acc.add(&m[r][j].mul(&col[j])));
            c.push(rs.neg());
            col = (0..r)
                .map(|i| (0..r).fold(MPoly::zero(nvars), |acc, j| acc.add(&m[i][j].mul(&col[j]))))
                .collect();
        }
        // new_v = Toeplitz(c) * v, length r + 2.
        let nv: Vec<MPoly<T>> = (0..r + 2)
            .map(|i| {
                (0..=i.min(r)).fold(MPoly::zero(nvars), |acc, j| {
                    if i - j < c.len() {
                        acc.add(&c[i - j].mul(&v[j]))
                    } else {
                        acc
                    }
                })
            })
            .collect();
        v = nv;
    }
    if n % 2 == 1 {
        v[n].neg()
    } else {
        v[n].clone()
    }
}

/// Resultant of `a` and `b` with respect to `x_var`, via the Sylvester matrix.
pub fn resultant<T: Field>(a: &MPoly<T>, b: &MPoly<T>, var: usize) -> MPoly<T> {
    let nv = a.nvars();
    let ca = a.coefficients_in(var);
    let cb = b.coefficients_in(var);
    let (da, db) = (ca.len() - 1, cb.len() - 1);
    let n = da + db;
    if n == 0 {
        return MPoly::one(nv);
    }
    let mut m = vec![vec![MPoly::zero(nv); n]; n];
    for i in 0..db {
        for (k, c) in ca.iter().enumerate() {
            m[i][i + da - k] = c.clone();
        }
    }
    for i in 0..da {
        for (k, c) in cb.iter().enumerate() {
            m[db + i][i + db - k] = c.clone();
        }
    }
    berkowitz_det(&m, nv)
}

/// Multivariate series truncated at a total degree.
#[derive(Clone, Debug)]
pub struct MultiSeries<T> {
    pub poly: MPoly<T>,
    pub cap: i32,
}

impl<T: Field> MultiSeries<T> {
    pub fn new(poly: MPoly<T>, cap: i32) -> Self {
        let mut p = MPoly::zero(poly.nvars());
        for (e, c) in poly.terms() {
            if e.iter().sum::<i32>() <= cap {
                p.add_term(e.clone(), c.clone());
            }
        }
        MultiSeries { poly: p, cap }
    }

    pub fn num_vars(&self) -> usize {
        self.poly.nvars()
    }

    pub fn add(&self, o: &Self) -> Self {
        MultiSeries { poly: self.poly.add(&o.poly), cap: self.cap.min(o.cap) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let cap = self.cap.min(o.cap);
        MultiSeries { poly: self.poly.mul_truncated(&o.poly, cap), cap }
    }

    pub fn scale(&self, s: &T) -> Self {
        MultiSeries { poly: self.poly.scale(s), cap: self.cap }
    }

    /// Embeds a univariate power series in variable `i`.
    pub fn from_univariate(nvars: usize, i: usize, coeffs: &[T], cap: i32) -> Self {
        let mut p = MPoly::zero(nvars);
        for (k, c) in coeffs.iter().enumerate().take(cap as usize + 1) {
            let mut e = vec![0; nvars];
            e[i] = k as i32;
            p.add_term(e, c.clone());
        }
        MultiSeries { poly: p, cap }
    }

    /// Part of exact total degree `d`.
    pub fn homogeneous(&self, d: i32) -> MPoly<T> {
        let mut p = MPoly::zero(self.num_vars());
        for (e, c) in self.poly.terms() {
            if e.iter().sum::<i32>() == d {
                p.add_term(e.clone(), c.clone());
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::scalar::q;

    fn mp(n: usize, terms: &[(&[i32], i64)]) -> MPoly<Scalar> {
        let mut p = MPoly::zero(n);
        for (e, c) in terms {
            p.add_term(e.to_vec(), q(*c));
        }
        p
    }

    #[test]
    fn determinant_of_small_matrices() {
        let c = |v: i64| MPoly::constant(1, q(v));
        let m = vec![vec![c(2), c(1), c(0)], vec![c(1), c(3), c(1)], vec![c(0), c(1), c(4)]];
        assert_eq!(berkowitz_det(&m, 1), c(2 * (12 - 1) - (4)));
        let m = vec![vec![c(0), c(1)], vec![c(1), c(0)]];
        assert_eq!(berkowitz_det(&m, 1), c(-1));
    }

    #[test]
    fn eliminates_parametrization() {
        // x = z^2, y = z + 1  =>  x - (y - 1)^2 up to sign
        let a = mp(3, &[(&[1, 0, 0], 1), (&[0, 0, 2], -1)]);
        let b = mp(3, &[(&[0, 1, 0], 1), (&[0, 0, 1], -1), (&[0, 0, 0], -1)]);
        let r = resultant(&a, &b, 2).content_normalized();
        let expect = mp(3, &[(&[1, 0, 0], -1), (&[0, 2, 0], 1), (&[0, 1, 0], -2), (&[0, 0, 0], 1)]).content_normalized();
        assert_eq!(r, expect);
    }

    #[test]
    fn truncated_products() {
        let x = MultiSeries::new(mp(2, &[(&[1, 0], 1), (&[0, 1], 1)]), 3);
        let sq = x.mul(&x).mul(&x).mul(&x);
        assert!(sq.poly.is_zero());
        assert_eq!(x.mul(&x).homogeneous(2).coeff(&[1, 1]), q(2));
    }
}
