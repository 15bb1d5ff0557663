//! Truncated univariate Laurent series over any [`Field`].

use super::field::Field;
use super::poly::Polynomial;
use super::scalar::Scalar;

/// Expansion point; series at infinity are in the variable `1/z`.
#[derive(Clone, Debug, PartialEq)]
pub enum BasePoint<T> {
    At(T),
    Infinity,
}

/// `sum_{k=min_exp}^{order} c_k t^k + O(t^{order+1})`.
#[derive(Clone, Debug)]
pub struct TruncatedSeries<T> {
    pub base: BasePoint<T>,
    min_exp: i64,
    coeffs: Vec<T>,
    order: i64,
}

impl<T: Field> TruncatedSeries<T> {
    /// Builds a series, padding or cutting `coeffs` to the declared order.
    pub fn new(base: BasePoint<T>, min_exp: i64, mut coeffs: Vec<T>, order: i64) -> Self {
        let len = (order - min_exp + 1).max(0) as usize;
        coeffs.resize(len, T::fzero());
        TruncatedSeries { base, min_exp, coeffs, order }
    }

    pub fn zero_at(base: BasePoint<T>, order: i64) -> Self {
        Self::new(base, order + 1, Vec::new(), order)
    }

    /// `c t^k` known to the given order.
    pub fn monomial(base: BasePoint<T>, c: T, k: i64, order: i64) -> Self {
        if k > order {
            return Self::zero_at(base, order);
        }
        let mut v = vec![T::fzero(); (order - k + 1) as usize];
        v[0] = c;
        Self::new(base, k, v, order)
    }

    pub fn constant(base: BasePoint<T>, c: T, order: i64) -> Self {
        Self::monomial(base, c, 0, order)
    }

    /// The local variable `t` itself.
    pub fn variable(base: BasePoint<T>, order: i64) -> Self {
        Self::monomial(base, T::fone(), 1, order)
    }

    pub fn from_polynomial(base: BasePoint<T>, p: &Polynomial, order: i64) -> Self {
        Self::new(base, 0, p.coeffs().iter().map(T::from_scalar).collect(), order)
    }

    pub fn min_exp(&self) -> i64 {
        self.min_exp
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `t^k`; zero below `min_exp`. Panics above the order.
    pub fn coeff(&self, k: i64) -> T {
        assert!(k <= self.order, "series coefficient t^{} read beyond order {}", k, self.order);
        if k < self.min_exp {
            T::fzero()
        } else {
            self.coeffs[(k - self.min_exp) as usize].clone()
        }
    }

    /// Exponent of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs.iter().position(|c| !c.fis_zero()).map(|i| self.min_exp + i as i64)
    }

    /// Drops leading zeros so that `min_exp` is the valuation.
    pub fn normalized(&self) -> Self {
        match self.valuation() {
            Some(v) => self.with_range(v, self.order),
            None => Self::zero_at(self.base.clone(), self.order),
        }
    }

    /// Re-indexes to the window `[lo, hi]` with `hi <= order`.
    pub fn with_range(&self, lo: i64, hi: i64) -> Self {
        let hi = hi.min(self.order);
        let v = (lo..=hi).map(|k| self.coeff(k)).collect();
        Self::new(self.base.clone(), lo, v, hi)
    }

    pub fn truncate(&self, order: i64) -> Self {
        self.with_range(self.min_exp, order.min(self.order))
    }

    pub fn add(&self, o: &Self) -> Self {
        let lo = self.min_exp.min(o.min_exp);
        let hi = self.order.min(o.order);
        let v = (lo..=hi).map(|k| self.coeff(k).fadd(&o.coeff(k))).collect();
        Self::new(self.base.clone(), lo, v, hi)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.fneg())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|c| c.fmul(s))
    }

    fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Self::new(self.base.clone(), self.min_exp, self.coeffs.iter().map(f).collect(), self.order)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let a = self.normalized();
        let b = o.normalized();
        let lo = a.min_exp + b.min_exp;
        let hi = (a.order + b.min_exp).min(b.order + a.min_exp);
        if hi < lo {
            return Self::zero_at(self.base.clone(), hi);
        }
        let n = (hi - lo + 1) as usize;
        let mut v = vec![T::fzero(); n];
        for (i, x) in a.coeffs.iter().enumerate().take(n) {
            if x.fis_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate().take(n - i) {
                v[i + j] = v[i + j].fadd(&x.fmul(y));
            }
        }
        Self::new(self.base.clone(), lo, v, hi)
    }

    /// Multiplicative inverse; `None` when the series is zero to its order.
    pub fn inv(&self) -> Option<Self> {
        let a = self.normalized();
        let v = a.valuation()?;
        let rel = a.order - v;
        let inv0 = T::fone().fdiv(&a.coeffs[0]);
        let mut out: Vec<T> = Vec::with_capacity(rel as usize + 1);
        out.push(inv0.clone());
        for n in 1..=rel as usize {
            let mut s = T::fzero();
            for k in 1..=n {
                if k < a.coeffs.len() {
                    s = s.fadd(&a.coeffs[k].fmul(&out[n - k]));
                }
            }
            out.push(s.fneg().fmul(&inv0));
        }
        Some(Self::new(self.base.clone(), -v, out, -v + rel))
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        Some(self.mul(&o.inv()?))
    }

    pub fn powi(&self, n: i64) -> Option<Self> {
        if n < 0 {
            return self.inv()?.powi(-n);
        }
        if n == 0 {
            let a = self.normalized();
            let v = a.valuation()?;
            return Some(Self::constant(self.base.clone(), T::fone(), a.order - v));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.mul(self);
        }
        Some(acc)
    }

    pub fn derivative(&self) -> Self {
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.fmul(&T::from_i64(self.min_exp + i as i64)))
            .collect();
        Self::new(self.base.clone(), self.min_exp - 1, v, self.order - 1)
    }

    /// Term-wise antiderivative with zero constant term. Panics on a `t^{-1}` term.
    pub fn integral(&self) -> Self {
        if self.min_exp <= -1 && self.order >= -1 {
            assert!(self.coeff(-1).fis_zero(), "series integral would need a logarithm");
        }
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.min_exp + i as i64;
                if k == -1 {
                    T::fzero()
                } else {
                    c.fdiv(&T::from_i64(k + 1))
                }
            })
            .collect();
        Self::new(self.base.clone(), self.min_exp + 1, v, self.order + 1)
    }

    /// `self(g(t))` for `g` with positive valuation.
    pub fn compose(&self, g: &Self) -> Self {
        let g = g.normalized();
        assert!(g.min_exp >= 1 || g.valuation().is_none(), "inner series must vanish at t = 0");
        let order = self.order.min(g.order);
        let g = g.truncate(order);
        let mut acc = Self::zero_at(self.base.clone(), order);
        let top = self.order;
        // Horner over the nonnegative part, then negative powers through g^{-1}.
        let pos_start = self.min_exp.max(0);
        for k in (pos_start..=top).rev() {
            acc = acc.mul(&g).add(&Self::constant(self.base.clone(), self.coeff(k), order));
        }
        if pos_start > 0 {
            acc = acc.mul(&g.powi(pos_start).expect("nonzero inner series"));
        }
        if self.min_exp < 0 {
            let ginv = g.inv().expect("nonzero inner series");
            let mut p = Self::constant(self.base.clone(), T::fone(), order);
            for k in 1..=(-self.min_exp) {
                p = p.mul(&ginv);
                acc = acc.add(&p.scale(&self.coeff(-k)));
            }
        }
        acc
    }

    /// Compositional inverse of a series `a_1 t + a_2 t^2 + ...` with `a_1 != 0`.
    pub fn reversion(&self) -> Self {
        let g = self.normalized();
        assert_eq!(g.min_exp, 1, "reversion needs valuation exactly one");
        let order = g.order;
        let a1 = g.coeffs[0].clone();
        let t = Self::variable(self.base.clone(), order);
        let nonlinear = g.sub(&t.scale(&a1));
        let mut h = t.scale(&T::fone().fdiv(&a1));
        for _ in 0..order {
            let corr = nonlinear.compose(&h);
            h = t.sub(&corr).scale(&T::fone().fdiv(&a1));
        }
        h
    }

    /// `self^r` for a series with constant term one.
    pub fn pow_one_plus(&self, r: &Scalar) -> Self {
        assert!(self.min_exp >= 0 && self.coeff(0).fsub(&T::fone()).fis_zero(), "series must start with 1");
        let n = self.order.max(0) as usize;
        let rt = T::from_scalar(r);
        let mut h: Vec<T> = vec![T::fone()];
        for m in 1..=n {
            let mut s = T::fzero();
            for k in 1..=m {
                let f = self.coeff(k as i64);
                if f.fis_zero() {
                    continue;
                }
                // ((r + 1) k - m) f_k h_{m-k}
                let w = rt.fadd(&T::fone()).fmul(&T::from_i64(k as i64)).fsub(&T::from_i64(m as i64));
                s = s.fadd(&w.fmul(&f).fmul(&h[m - k]));
            }
            h.push(s.fdiv(&T::from_i64(m as i64)));
        }
        Self::new(self.base.clone(), 0, h, self.order)
    }

    /// `log(self)` for a series with constant term one.
    pub fn log_one_plus(&self) -> Self {
        let inv = self.inv().expect("unit series");
        self.derivative().mul(&inv).integral()
    }

    /// `exp(self)` for a series vanishing at `t = 0`.
    pub fn exp_series(&self) -> Self {
        assert!(self.min_exp >= 0 && self.coeff(0).fis_zero(), "exp needs a series without constant term");
        let n = self.order.max(0) as usize;
        let mut h: Vec<T> = vec![T::fone()];
        for m in 1..=n {
            let mut s = T::fzero();
            for k in 1..=m {
                let f = self.coeff(k as i64);
                if !f.fis_zero() {
                    s = s.fadd(&f.fmul(&T::from_i64(k as i64)).fmul(&h[m - k]));
                }
            }
            h.push(s.fdiv(&T::from_i64(m as i64)));
        }
        Self::new(self.base.clone(), 0, h, self.order)
    }

    /// Evaluates the truncated sum at a value of the local variable.
    pub fn eval(&self, t: &T) -> T {
        let mut acc = T::fzero();
        for c in self.coeffs.iter().rev() {
            acc = acc.fmul(t).fadd(c);
        }
        if self.min_exp >= 0 {
            acc.fmul(&t.fpowi(self.min_exp as u32))
        } else {
            acc.fdiv(&t.fpowi((-self.min_exp) as u32))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::scalar::{q, qf};

    fn s(c: &[i64], min: i64, order: i64) -> TruncatedSeries<Scalar> {
        TruncatedSeries::new(BasePoint::At(q(0)), min, c.iter().map(|&v| q(v)).collect(), order)
    }

    #[test]
    fn inverse_of_geometric() {
        let a = s(&[1, -1], 0, 6);
        let inv = a.inv().unwrap();
        assert!(inv.coeffs().iter().all(|c| *c == q(1)));
        assert_eq!(inv.order(), 6);
    }

    #[test]
    fn laurent_inverse_orders() {
        let a = s(&[0, 2, 1], 0, 5); // 2t + t^2
        let inv = a.inv().unwrap();
        assert_eq!(inv.min_exp(), -1);
        assert_eq!(inv.coeff(-1), qf(1, 2));
        assert_eq!(inv.coeff(0), qf(-1, 4));
        assert_eq!(inv.order(), 3);
    }

    #[test]
    fn reversion_round_trip() {
        let g = s(&[0, 1, 3, -2, 5], 0, 8);
        let h = g.reversion();
        let id = g.compose(&h);
        for k in 0..=8 {
            assert_eq!(id.coeff(k), if k == 1 { q(1) } else { q(0) });
        }
    }

    #[test]
    fn binomial_powers() {
        let f = s(&[1, 1], 0, 5);
        let h = f.pow_one_plus(&qf(1, 2));
        let sq = h.mul(&h);
        for k in 0..=5 {
            assert_eq!(sq.coeff(k), f.coeff(k));
        }
        let e = s(&[0, 1], 0, 6).exp_series();
        assert_eq!(e.coeff(4), qf(1, 24));
        let l = e.log_one_plus();
        assert_eq!(l.coeff(1), q(1));
        assert_eq!(l.coeff(3), q(0));
    }

    #[test]
    #[should_panic]
    fn never_reads_beyond_order() {
        s(&[1, 2], 0, 1).coeff(2);
    }
}
