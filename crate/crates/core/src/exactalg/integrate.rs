//! Symbolic antiderivatives of rational functions: Hermite reduction for the
//! rational part and Rothstein–Trager for the logarithmic part.

use num_traits::Zero;
use serde_json::json;

use super::bigfloat::BigComplex;
use super::poly::Polynomial;
use super::ratfunc::RationalFunction;
use super::scalar::{fmt_scalar, q, Scalar};
use super::AlgError;

/// `rational + sum c_i log p_i(z)`, defined up to an additive constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Antiderivative {
    pub rational: RationalFunction,
    pub logs: Vec<(Scalar, Polynomial)>,
}

impl Antiderivative {
    pub fn zero() -> Self {
        Antiderivative { rational: RationalFunction::zero(), logs: Vec::new() }
    }

    pub fn is_rational(&self) -> bool {
        self.logs.is_empty()
    }

    pub fn derivative(&self) -> RationalFunction {
        self.logs.iter().fold(self.rational.derivative(), |acc, (c, p)| {
            let lp = RationalFunction::new(p.derivative(), p.clone()).expect("nonzero log argument");
            &acc + &lp.scale(c)
        })
    }

    /// Same function minus its value at `z0` (rational part only when there are logs
    /// that would need a branch choice).
    pub fn normalized_at(&self, z0: &Scalar) -> Option<Self> {
        let v = self.rational.eval(z0)?;
        Some(Antiderivative {
            rational: &self.rational - &RationalFunction::constant(v),
            logs: self.logs.clone(),
        })
    }

    /// Numeric value with principal logarithms.
    pub fn eval_complex(&self, z: &BigComplex) -> BigComplex {
        let mut acc = self.rational.eval_field(z);
        for (c, p) in &self.logs {
            acc = acc.add(&p.eval_field(z).ln().mul(&BigComplex::from_scalar(c)));
        }
        acc
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "rational": self.rational.to_json(),
            "logs": self.logs.iter().map(|(c, p)| json!([fmt_scalar(c), p.to_json()])).collect::<Vec<_>>(),
        })
    }
}

/// Interpolating polynomial through `(xs[i], ys[i])` by divided differences.
pub fn interpolate(xs: &[Scalar], ys: &[Scalar]) -> Polynomial {
    let n = xs.len();
    let mut coef: Vec<Scalar> = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            coef[i] = (&coef[i] - &coef[i - 1]) / (&xs[i] - &xs[i - j]);
        }
    }
    let mut p = Polynomial::constant(coef[n - 1].clone());
    for i in (0..n - 1).rev() {
        p = &(&p * &Polynomial::linear_root(&xs[i])) + &Polynomial::constant(coef[i].clone());
    }
    p
}

/// Hermite reduction of `a/d` (`deg a < deg d`), Mack's linear variant.
/// Returns `(g, h)` with `a/d = g' + h` and `h` having a squarefree denominator.
fn hermite_reduce(a: &Polynomial, d: &Polynomial) -> (RationalFunction, RationalFunction) {
    let mut a = a.clone();
    let mut g = RationalFunction::zero();
    let mut dm = Polynomial::gcd(d, &d.derivative());
    let ds = d.monic().exact_div(&dm);
    while dm.deg() > 0 {
        let dm2 = Polynomial::gcd(&dm, &dm.derivative());
        let dms = dm.exact_div(&dm2);
        let lhs = (&ds * &dm.derivative()).exact_div(&dm);
        let (b, c) = Polynomial::solve_bezout(&(-&lhs), &dms, &a);
        a = &c - &(&b.derivative() * &ds).exact_div(&dms);
        g = &g + &RationalFunction::new(b, dm.clone()).expect("nonzero");
        dm = dm2;
    }
    let h = RationalFunction::new(a, ds).expect("nonzero");
    (g, h)
}

/// Rothstein–Trager logarithmic part of `a/d` with `d` squarefree and `deg a < deg d`.
fn log_part(a: &Polynomial, d: &Polynomial) -> Result<Vec<(Scalar, Polynomial)>, AlgError> {
    if a.is_zero() {
        return Ok(Vec::new());
    }
    let dp = d.derivative();
    let n = d.deg() as usize;
    let xs: Vec<Scalar> = (0..=n as i64).map(q).collect();
    let ys: Vec<Scalar> = xs
        .iter()
        .map(|c| Polynomial::resultant(d, &(a - &dp.scale(c))))
        .collect();
    let r = interpolate(&xs, &ys);
    let mut out = Vec::new();
    let mut covered = 0;
    for c in r.rational_roots() {
        if c.is_zero() {
            continue;
        }
        let g = Polynomial::gcd(d, &(a - &dp.scale(&c)));
        if g.deg() > 0 {
            covered += g.deg();
            out.push((c, g));
        }
    }
    if covered != d.deg() {
        return Err(AlgError::NonRationalLog(format!("{}", RationalFunction::new(a.clone(), d.clone()).expect("nonzero"))));
    }
    Ok(out)
}

/// Antiderivative of a rational function as rational part plus `c log p` terms.
///
/// Fails only when the logarithmic part needs coefficients outside the rationals.
pub fn hermite_antiderivative(f: &RationalFunction) -> Result<Antiderivative, AlgError> {
    if f.is_zero() {
        return Ok(Antiderivative::zero());
    }
    let (poly, rem) = f.num().div_rem(f.den());
    let mut rational = RationalFunction::from_poly(poly.integral());
    let mut logs = Vec::new();
    if !rem.is_zero() {
        let (g, h) = hermite_reduce(&rem, f.den());
        rational = &rational + &g;
        if !h.is_zero() {
            logs = log_part(h.num(), h.den())?;
        }
    }
    logs.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(Antiderivative { rational, logs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::scalar::qf;

    fn rf(n: &[i64], d: &[i64]) -> RationalFunction {
        RationalFunction::new(Polynomial::from_i64(n), Polynomial::from_i64(d)).unwrap()
    }

    #[test]
    fn log_only() {
        let a = hermite_antiderivative(&rf(&[-1], &[0, 2])).unwrap();
        assert!(a.rational.is_zero());
        assert_eq!(a.logs, vec![(qf(-1, 2), Polynomial::z())]);
    }

    #[test]
    fn purely_rational_examples() {
        let a = hermite_antiderivative(&rf(&[1, 0, -1], &[0, 0, 0, 0, 16])).unwrap();
        assert_eq!(a.rational, rf(&[-1, 0, 3], &[0, 0, 0, 48]));
        assert!(a.logs.is_empty());
        let a = hermite_antiderivative(&rf(&[1], &[0, 0, 1])).unwrap();
        assert_eq!(a.rational, rf(&[-1], &[0, 1]));
    }

    #[test]
    fn mixed_parts_round_trip() {
        // d/dz [ (z+1)/(z^2 (z-2)) ] + 3/(z-2) - 1/(2z) + z^3
        let r = rf(&[1, 1], &[0, 0, -2, 1]);
        let f = &(&(&r.derivative() + &rf(&[3], &[-2, 1])) + &rf(&[-1], &[0, 2])) + &rf(&[0, 0, 0, 1], &[1]);
        let a = hermite_antiderivative(&f).unwrap();
        assert_eq!(a.derivative(), f);
        assert_eq!(a.logs.len(), 2);
    }

    #[test]
    fn irrational_logs_rejected() {
        assert!(matches!(
            hermite_antiderivative(&rf(&[1], &[-2, 0, 1])),
            Err(AlgError::NonRationalLog(_))
        ));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let p = Polynomial::from_i64(&[3, -1, 0, 2]);
        let xs: Vec<Scalar> = (0..4).map(q).collect();
        let ys: Vec<Scalar> = xs.iter().map(|x| p.eval(x)).collect();
        assert_eq!(interpolate(&xs, &ys), p);
    }
}
