//! Mirror Landau–Ginzburg potentials, their critical points and the
//! Gaussian-moment saddle-point expansion of the oscillatory integral.

use std::collections::HashMap;

use num_complex::Complex64;
use num_traits::Zero;
use serde_json::json;
use thiserror::Error;

use crate::curve::CurveModel;
use crate::exactalg::bigfloat::{poly_roots, precision};
use crate::exactalg::{BigComplex, MPoly, Polynomial, Scalar};

#[derive(Debug, Error)]
pub enum OscError {
    #[error("degenerate critical point: {0}")]
    Degenerate(String),
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// `W = sum_i (u_i + w_i log u_i) - sum_a (v_a + lambda_a log v_a) + R + w_0 log R`
/// with `R = x prod v / prod u`, in coordinates `(u_1..u_{N-1}, v_1..v_n)`.
#[derive(Clone, Debug)]
pub struct LgPotential {
    pub model: CurveModel,
}

impl LgPotential {
    pub fn new(model: CurveModel) -> Self {
        LgPotential { model }
    }

    /// `k = N + n - 1`.
    pub fn dim(&self) -> usize {
        self.model.big_n() + self.model.small_n() - 1
    }

    fn nu(&self) -> usize {
        self.model.big_n() - 1
    }

    fn split<'a>(&self, c: &'a [BigComplex]) -> (&'a [BigComplex], &'a [BigComplex]) {
        c.split_at(self.nu())
    }

    /// `R = x prod v / prod u`.
    pub fn ratio(&self, coords: &[BigComplex], x: &BigComplex) -> BigComplex {
        let (u, v) = self.split(coords);
        let num = v.iter().fold(x.clone(), |a, b| a.mul(b));
        let den = u.iter().fold(BigComplex::one(), |a, b| a.mul(b));
        num.div(&den)
    }

    /// `W` on principal logarithms.
    pub fn value(&self, coords: &[BigComplex], x: &BigComplex) -> BigComplex {
        let (u, v) = self.split(coords);
        let mut acc = BigComplex::zero();
        for (i, ui) in u.iter().enumerate() {
            acc = acc.add(ui).add(&ui.ln().mul(&BigComplex::from_scalar(&self.model.w[i + 1])));
        }
        for (a, va) in v.iter().enumerate() {
            acc = acc.sub(va).sub(&va.ln().mul(&BigComplex::from_scalar(&self.model.lambda[a])));
        }
        let r = self.ratio(coords, x);
        acc.add(&r).add(&r.ln().mul(&BigComplex::from_scalar(&self.model.w[0])))
    }

    pub fn gradient(&self, coords: &[BigComplex], x: &BigComplex) -> Vec<BigComplex> {
        let (u, v) = self.split(coords);
        let r = self.ratio(coords, x);
        let w0 = BigComplex::from_scalar(&self.model.w[0]);
        let one = BigComplex::one();
        let mut g = Vec::with_capacity(coords.len());
        for (i, ui) in u.iter().enumerate() {
            let wi = BigComplex::from_scalar(&self.model.w[i + 1]);
            g.push(one.add(&wi.sub(&w0).sub(&r).div(ui)));
        }
        for (a, va) in v.iter().enumerate() {
            let la = BigComplex::from_scalar(&self.model.lambda[a]);
            g.push(one.neg().add(&r.sub(&la.sub(&w0)).div(va)));
        }
        g
    }

    /// Closed-form Hessian matrix in `(u, v)`.
    pub fn hessian(&self, coords: &[BigComplex], x: &BigComplex) -> Vec<Vec<BigComplex>> {
        let k = self.dim();
        let nu = self.nu();
        let r = self.ratio(coords, x);
        let w0 = BigComplex::from_scalar(&self.model.w[0]);
        let mut h = vec![vec![BigComplex::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let si = if i < nu { -1 } else { 1 };
                let sj = if j < nu { -1 } else { 1 };
                let base = r.div(&coords[i].mul(&coords[j]));
                h[i][j] = if i != j {
                    if si * sj > 0 { base } else { base.neg() }
                } else if i < nu {
                    let wi = BigComplex::from_scalar(&self.model.w[i + 1]);
                    base.scale(&crate::exactalg::bigfloat::real::from_i64(2)).sub(&wi.sub(&w0).div(&coords[i].mul(&coords[i])))
                } else {
                    let la = BigComplex::from_scalar(&self.model.lambda[i - nu]);
                    la.sub(&w0).div(&coords[i].mul(&coords[i]))
                };
            }
        }
        h
    }

    /// `x dW/dx = R + w_0`.
    pub fn x_dw_dx(&self, coords: &[BigComplex], x: &BigComplex) -> BigComplex {
        self.ratio(coords, x).add(&BigComplex::from_scalar(&self.model.w[0]))
    }

    /// Taylor polynomial of `W(c + xi) - W(c)` through total degree `deg`.
    pub fn taylor(&self, coords: &[BigComplex], x: &BigComplex, deg: i32) -> MPoly<BigComplex> {
        let k = self.dim();
        let nu = self.nu();
        let r = self.ratio(coords, x);
        let w0 = BigComplex::from_scalar(&self.model.w[0]);
        // log(1 + xi/c) and (1 + xi/c)^{+-1} as univariate series in each coordinate.
        let log1p = |i: usize| -> MPoly<BigComplex> {
            let mut p = MPoly::zero(k);
            let inv = coords[i].recip();
            let mut pw = BigComplex::one();
            for d in 1..=deg {
                pw = pw.mul(&inv);
                let c = pw.div(&BigComplex::from_i64(d as i64));
                let mut e = vec![0; k];
                e[i] = d;
                p.add_term(e, if d % 2 == 1 { c } else { c.neg() });
            }
            p
        };
        let geometric = |i: usize, sign: i32| -> MPoly<BigComplex> {
            // (1 + xi/c)^{sign}
            let mut p = MPoly::one(k);
            let inv = coords[i].recip();
            if sign > 0 {
                let mut e = vec![0; k];
                e[i] = 1;
                p.add_term(e, inv);
                return p;
            }
            let mut pw = BigComplex::one();
            for d in 1..=deg {
                pw = pw.mul(&inv).neg();
                let mut e = vec![0; k];
                e[i] = d;
                p.add_term(e, pw.clone());
            }
            p
        };
        let mut w = MPoly::zero(k);
        let mut ratio = MPoly::one(k);
        for i in 0..k {
            let l = log1p(i);
            let mut lin = vec![0; k];
            lin[i] = 1;
            if i < nu {
                let wi = BigComplex::from_scalar(&self.model.w[i + 1]);
                w = w.add(&MPoly::monomial(k, lin, BigComplex::one()));
                w = w.add(&l.scale(&wi.sub(&w0)));
                ratio = ratio.mul_truncated(&geometric(i, -1), deg);
            } else {
                let la = BigComplex::from_scalar(&self.model.lambda[i - nu]);
                w = w.sub(&MPoly::monomial(k, lin, BigComplex::one()));
                w = w.sub(&l.scale(&la.sub(&w0)));
                ratio = ratio.mul_truncated(&geometric(i, 1), deg);
            }
        }
        let ratio = ratio.sub(&MPoly::one(k));
        w.add(&ratio.scale(&r))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticalType {
    /// Growing like `x^{1/(N-n)}`.
    Growing,
    /// Anchored at some `lambda_b`.
    Anchored,
}

impl CriticalType {
    pub fn code(&self) -> u8 {
        match self {
            CriticalType::Growing => 1,
            CriticalType::Anchored => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub coords: Vec<BigComplex>,
    pub kind: CriticalType,
    pub hessian_det: BigComplex,
    /// `y = x dW/dx` at the point.
    pub y: BigComplex,
}

/// Gaussian elimination with partial pivoting; returns `(det, inverse)`.
pub fn det_and_inverse(m: &[Vec<BigComplex>]) -> (BigComplex, Option<Vec<Vec<BigComplex>>>) {
    let k = m.len();
    let mut a: Vec<Vec<BigComplex>> = m.to_vec();
    let mut inv: Vec<Vec<BigComplex>> =
        (0..k).map(|i| (0..k).map(|j| if i == j { BigComplex::one() } else { BigComplex::zero() }).collect()).collect();
    let mut det = BigComplex::one();
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i][col].abs_f64().partial_cmp(&a[j][col].abs_f64()).unwrap())
            .unwrap();
        if a[piv][col].is_zero() {
            return (BigComplex::zero(), None);
        }
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = det.neg();
        }
        let p = a[col][col].clone();
        det = det.mul(&p);
        let pinv = p.recip();
        for j in 0..k {
            a[col][j] = a[col][j].mul(&pinv);
            inv[col][j] = inv[col][j].mul(&pinv);
        }
        for i in 0..k {
            if i == col || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..k {
                a[i][j] = a[i][j].sub(&f.mul(&a[col][j]));
                inv[i][j] = inv[i][j].sub(&f.mul(&inv[col][j]));
            }
        }
    }
    (det, Some(inv))
}

/// Coefficients of `prod_i (Y - w_i) - x prod_a (Y - lambda_a)`.
fn y_polynomial(model: &CurveModel, x: &BigComplex) -> Vec<BigComplex> {
    let pw = Polynomial::from_roots(&model.w);
    let pl = Polynomial::from_roots(&model.lambda);
    (0..=model.big_n())
        .map(|d| BigComplex::from_scalar(&pw.coeff(d)).sub(&x.mul(&BigComplex::from_scalar(&pl.coeff(d)))))
        .collect()
}

fn c64(z: &BigComplex) -> Complex64 {
    let (re, im) = z.to_f64();
    Complex64::new(re, im)
}

/// Follows the roots of the `Y` polynomial from `x` out to very large `|x|`
/// along `x t`, and reports which ones end near some `lambda`.
fn classify(model: &CurveModel, x: &BigComplex, roots: &[BigComplex]) -> Vec<CriticalType> {
    if model.lambda.is_empty() {
        return vec![CriticalType::Growing; roots.len()];
    }
    let pw: Vec<Complex64> = Polynomial::from_roots(&model.w).coeffs().iter().map(|c| Complex64::new(crate::exactalg::scalar::to_f64(c), 0.0)).collect();
    let pl: Vec<Complex64> = Polynomial::from_roots(&model.lambda).coeffs().iter().map(|c| Complex64::new(crate::exactalg::scalar::to_f64(c), 0.0)).collect();
    let horner = |p: &[Complex64], y: Complex64| p.iter().rev().fold(Complex64::zero(), |a, c| a * y + c);
    let dhorner = |p: &[Complex64], y: Complex64| {
        let mut d = Complex64::zero();
        for (k, c) in p.iter().enumerate().skip(1).rev() {
            d = d * y + c * (k as f64);
        }
        d
    };
    let x0 = c64(x);
    let mut ys: Vec<Complex64> = roots.iter().map(c64).collect();
    let scale = 1.0 + model.w.iter().chain(&model.lambda).map(|s| crate::exactalg::scalar::to_f64(s).abs()).fold(0.0, f64::max);
    let target = 1e12 * scale.powi(model.big_n() as i32);
    // Path: rotate off the real axis first (real polynomials have colliding
    // roots there), then scale out radially. `p < 1` is the rotation phase.
    let end = 1.0 + (target / x0.norm()).ln().max(0.0);
    let at = |p: f64| x0 * Complex64::from_polar((p - 1.0).max(0.0).exp(), 0.3 * p.min(1.0));
    let mut p = 0.0f64;
    let mut dp = 0.02f64;
    while p < end {
        let pn = (p + dp).min(end);
        let (xp, xt) = (at(p), at(pn));
        let mut next = Vec::with_capacity(ys.len());
        let mut ok = true;
        for y0 in &ys {
            // Growing roots scale like x^{1/(N-n)}; anchored ones barely move.
            let grown = *y0 * (xt / xp).powf(1.0 / (model.big_n() - model.small_n()) as f64);
            let resid = |y: Complex64| (horner(&pw, y) - xt * horner(&pl, y)).norm();
            let pred = if resid(grown) < resid(*y0) { grown } else { *y0 };
            let mut y = pred;
            let mut conv = false;
            for _ in 0..60 {
                let f = horner(&pw, y) - xt * horner(&pl, y);
                let df = dhorner(&pw, y) - xt * dhorner(&pl, y);
                let dy = f / df;
                y -= dy;
                if dy.norm() <= 1e-13 * (1.0 + y.norm()) {
                    conv = true;
                    break;
                }
            }
            if !conv || (y - pred).norm() > 0.1 * (1.0 + pred.norm()) {
                ok = false;
                break;
            }
            next.push(y);
        }
        // Roots must stay distinct.
        if ok {
            'outer: for i in 0..next.len() {
                for j in 0..i {
                    if (next[i] - next[j]).norm() < 1e-9 * (1.0 + next[i].norm()) {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        if ok {
            ys = next;
            p = pn;
            dp = (dp * 1.5).min(0.4);
        } else {
            dp /= 4.0;
            if dp < 1e-12 {
                break;
            }
        }
    }
    let lam: Vec<f64> = model.lambda.iter().map(crate::exactalg::scalar::to_f64).collect();
    ys.iter()
        .map(|y| {
            if lam.iter().any(|l| (y - l).norm() < 1e-3 * (1.0 + l.abs())) {
                CriticalType::Anchored
            } else {
                CriticalType::Growing
            }
        })
        .collect()
}

/// All `N` critical points at `x`, found through the one-variable equation
/// for `Y = u_i + w_i = v_a + lambda_a`.
pub fn critical_points(pot: &LgPotential, x: &BigComplex) -> Result<Vec<CriticalPoint>, OscError> {
    if x.is_zero() {
        return Err(OscError::Invalid("x must be nonzero".into()));
    }
    let model = &pot.model;
    let roots = poly_roots(&y_polynomial(model, x));
    let digits = precision() as f64 * std::f64::consts::LOG10_2;
    for i in 0..roots.len() {
        for j in 0..i {
            if roots[i].dist(&roots[j]) < 10f64.powf(-digits / 3.0) * (1.0 + roots[i].abs_f64()) {
                return Err(OscError::Degenerate(format!("double root Y = {}", roots[i])));
            }
        }
    }
    let kinds = classify(model, x, &roots);
    let mut out = Vec::new();
    for (y, kind) in roots.into_iter().zip(kinds) {
        let mut coords: Vec<BigComplex> = model.w[1..].iter().map(|w| y.sub(&BigComplex::from_scalar(w))).collect();
        coords.extend(model.lambda.iter().map(|l| y.sub(&BigComplex::from_scalar(l))));
        if coords.iter().any(|c| c.is_zero()) {
            return Err(OscError::Degenerate("critical point on a coordinate hyperplane".into()));
        }
        let (det, _) = det_and_inverse(&pot.hessian(&coords, x));
        if det.abs_f64() < 10f64.powf(-digits + 8.0) {
            return Err(OscError::Degenerate(format!("vanishing Hessian at Y = {}", y)));
        }
        let yv = pot.x_dw_dx(&coords, x);
        out.push(CriticalPoint { coords, kind, hessian_det: det, y: yv });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SaddleExpansion {
    /// Critical value on principal logarithms.
    pub s0: BigComplex,
    /// `1 / (u_1 ... u_{N-1} sqrt(Hess))`.
    pub prefactor: BigComplex,
    /// `I_1, ..., I_m`.
    pub corrections: Vec<BigComplex>,
}

impl SaddleExpansion {
    pub fn to_json(&self) -> serde_json::Value {
        let f = |z: &BigComplex| {
            let (re, im) = z.to_f64();
            json!([re, im])
        };
        json!({
            "S0": f(&self.s0),
            "prefactor": f(&self.prefactor),
            "I": self.corrections.iter().map(f).collect::<Vec<_>>(),
        })
    }
}

/// Keeps terms whose `eps` exponent (last variable) is at most `cap`.
fn mul_eps(a: &MPoly<BigComplex>, b: &MPoly<BigComplex>, cap: i32) -> MPoly<BigComplex> {
    let k = a.nvars();
    let mut r = MPoly::zero(k);
    for (e1, c1) in a.terms() {
        for (e2, c2) in b.terms() {
            if e1[k - 1] + e2[k - 1] > cap {
                continue;
            }
            let e: Vec<i32> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
            r.add_term(e, c1.mul(c2));
        }
    }
    r
}

/// Gaussian moments `E[eta^alpha]` with covariance `cov`, by Wick's theorem.
struct Moments<'a> {
    cov: &'a [Vec<BigComplex>],
    memo: HashMap<Vec<i32>, BigComplex>,
}

impl Moments<'_> {
    fn get(&mut self, alpha: &[i32]) -> BigComplex {
        let total: i32 = alpha.iter().sum();
        if total == 0 {
            return BigComplex::one();
        }
        if total % 2 == 1 {
            return BigComplex::zero();
        }
        if let Some(v) = self.memo.get(alpha) {
            return v.clone();
        }
        let i = alpha.iter().position(|&a| a > 0).unwrap();
        let mut rest = alpha.to_vec();
        rest[i] -= 1;
        let mut acc = BigComplex::zero();
        for j in 0..alpha.len() {
            if rest[j] == 0 || self.cov[i][j].is_zero() {
                continue;
            }
            let mult = rest[j];
            let mut r2 = rest.clone();
            r2[j] -= 1;
            let m = self.get(&r2);
            acc = acc.add(&self.cov[i][j].mul(&m).mul(&BigComplex::from_i64(mult as i64)));
        }
        self.memo.insert(alpha.to_vec(), acc.clone());
        acc
    }
}

/// Saddle-point data at a critical point: the integral of
/// `e^{W/hbar} du/u dv` behaves as `e^{S0/hbar} (-2 pi hbar)^{k/2} prefactor (1 + sum hbar^m I_m)`.
pub fn saddle_expand(pot: &LgPotential, cp: &CriticalPoint, x: &BigComplex, m_max: usize) -> Result<SaddleExpansion, OscError> {
    let nu = pot.nu();
    let hess = pot.hessian(&cp.coords, x);
    let (det, inv) = det_and_inverse(&hess);
    let inv = inv.ok_or_else(|| OscError::Degenerate("singular Hessian".into()))?;
    let cond = hess.iter().flatten().map(|z| z.abs_f64()).fold(0.0, f64::max)
        * inv.iter().flatten().map(|z| z.abs_f64()).fold(0.0, f64::max);
    let digits = precision() as f64 * std::f64::consts::LOG10_2;
    if cond.log10() > digits - 10.0 {
        return Err(OscError::PrecisionLoss(format!("Hessian condition number {:e}", cond)));
    }
    let prod_u = cp.coords[..nu].iter().fold(BigComplex::one(), |a, b| a.mul(b));
    let prefactor = prod_u.mul(&det.sqrt()).recip();
    let s0 = pot.value(&cp.coords, x);
    if m_max == 0 {
        return Ok(SaddleExpansion { s0, prefactor, corrections: Vec::new() });
    }
    let taylor = pot.taylor(&cp.coords, x, 2 * m_max as i32 + 2);
    let inv_u: Vec<BigComplex> = cp.coords[..nu].iter().map(|u| u.recip()).collect();
    let corrections = wick_corrections(&taylor, &inv_u, &inv, m_max);
    Ok(SaddleExpansion { s0, prefactor, corrections })
}

/// `I_1..I_m` from the Taylor polynomial of `W - W(c)` (degree >= 2 part), the
/// measure factor `prod_i (1 + xi_i inv_u[i])^{-1}` and the inverse Hessian.
pub fn wick_corrections(taylor: &MPoly<BigComplex>, inv_u: &[BigComplex], hess_inv: &[Vec<BigComplex>], m_max: usize) -> Vec<BigComplex> {
    let k = taylor.nvars();
    let cap = 2 * m_max as i32;
    // With xi = eps eta and hbar = eps^2: X = sum_{d>=3} eps^{d-2} W_d(eta).
    let kk = k + 1;
    let mut xser = MPoly::zero(kk);
    for (e, c) in taylor.terms() {
        let d: i32 = e.iter().sum();
        if d >= 3 && d - 2 <= cap {
            let mut ne = e.clone();
            ne.push(d - 2);
            xser.add_term(ne, c.clone());
        }
    }
    let mut measure = MPoly::one(kk);
    for (i, iu) in inv_u.iter().enumerate() {
        let mut g = MPoly::one(kk);
        let mut pw = BigComplex::one();
        for d in 1..=cap {
            pw = pw.mul(iu).neg();
            let mut e = vec![0; kk];
            e[i] = d;
            e[k] = d;
            g.add_term(e, pw.clone());
        }
        measure = mul_eps(&measure, &g, cap);
    }
    let mut expx = MPoly::one(kk);
    let mut term = MPoly::one(kk);
    for j in 1..=cap {
        term = mul_eps(&term, &xser, cap).scale(&BigComplex::from_i64(j as i64).recip());
        if term.is_zero() {
            break;
        }
        expx = expx.add(&term);
    }
    let full = mul_eps(&expx, &measure, cap);
    let cov: Vec<Vec<BigComplex>> = hess_inv.iter().map(|row| row.iter().map(|z| z.neg()).collect()).collect();
    let mut moments = Moments { cov: &cov, memo: HashMap::new() };
    let mut corrections = vec![BigComplex::zero(); m_max];
    for (e, c) in full.terms() {
        let p = e[k];
        if p == 0 || p % 2 == 1 {
            continue;
        }
        let m = moments.get(&e[..k]);
        let idx = (p / 2) as usize - 1;
        corrections[idx] = corrections[idx].add(&c.mul(&m));
    }
    corrections
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanQuantity {
    HessPrefactor,
    Correction(usize),
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    pub slope: f64,
    pub residual: f64,
    pub poor_fit: bool,
    pub samples: Vec<(f64, f64)>,
}

/// Least-squares slope of `log |quantity|` against `log x` along a real grid,
/// following one critical point of the requested type.
pub fn exponent_scan(pot: &LgPotential, quantity: ScanQuantity, kind: CriticalType, x_grid: &[Scalar]) -> Result<ScanResult, OscError> {
    if x_grid.len() < 4 {
        return Err(OscError::Invalid("need at least four grid points".into()));
    }
    let mut samples = Vec::new();
    for xs in x_grid {
        let x = BigComplex::from_scalar(xs);
        let cps = critical_points(pot, &x)?;
        // Type-1 points differ by phases of x^{1/(N-n)}; take the one with the largest real Y.
        let cp = cps
            .into_iter()
            .filter(|c| c.kind == kind)
            .max_by(|a, b| a.y.to_f64().0.partial_cmp(&b.y.to_f64().0).unwrap())
            .ok_or_else(|| OscError::Invalid(format!("no critical point of type {}", kind.code())))?;
        let v = match quantity {
            ScanQuantity::HessPrefactor => saddle_expand(pot, &cp, &x, 0)?.prefactor,
            ScanQuantity::Correction(m) => saddle_expand(pot, &cp, &x, m)?.corrections[m - 1].clone(),
        };
        samples.push((crate::exactalg::scalar::to_f64(xs).ln(), v.abs_f64().ln()));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let slope = sxy / sxx;
    let residual = (samples.iter().map(|s| (s.1 - my - slope * (s.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Ok(ScanResult { slope, residual, poor_fit: residual > 0.05, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::scalar::{q, qf};
    use crate::exactalg::PrecisionGuard;

    fn cpn(w: &[i64]) -> LgPotential {
        LgPotential::new(CurveModel::projective_space(w.iter().map(|&v| q(v)).collect()).unwrap())
    }

    #[test]
    fn quadratic_critical_points() {
        let pot = cpn(&[1, 0]);
        let x = BigComplex::from_i64(2);
        let mut ys: Vec<f64> = critical_points(&pot, &x).unwrap().iter().map(|c| c.coords[0].to_f64().0).collect();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ys[0] + 1.0).abs() < 1e-30 && (ys[1] - 2.0).abs() < 1e-30);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let _g = PrecisionGuard::new(200);
        let pot = LgPotential::new(CurveModel::complete_intersection(vec![q(0), q(1), q(2)], vec![q(5)]).unwrap());
        let x = BigComplex::from_f64(3.0, 0.5);
        let c = vec![BigComplex::from_f64(1.3, 0.2), BigComplex::from_f64(-0.7, 0.4), BigComplex::from_f64(2.1, -0.3)];
        let g = pot.gradient(&c, &x);
        let h = BigComplex::from_f64(1e-25, 0.0);
        for i in 0..3 {
            let mut cp = c.clone();
            let mut cm = c.clone();
            cp[i] = cp[i].add(&h);
            cm[i] = cm[i].sub(&h);
            let fd = pot.value(&cp, &x).sub(&pot.value(&cm, &x)).div(&h.add(&h));
            assert!(fd.dist(&g[i]) / g[i].abs_f64() < 1e-30);
        }
        // Hessian against the quadratic Taylor coefficients.
        let t = pot.taylor(&c, &x, 2);
        let hs = pot.hessian(&c, &x);
        for i in 0..3 {
            for j in 0..3 {
                let mut e = vec![0; 3];
                e[i] += 1;
                e[j] += 1;
                let mut v = t.coeff(&e);
                if i == j {
                    v = v.add(&v);
                }
                assert!(v.dist(&hs[i][j]) < 1e-40);
            }
        }
    }

    #[test]
    fn pure_quadratic_has_no_corrections() {
        let mut t = MPoly::zero(2);
        t.add_term(vec![2, 0], BigComplex::from_i64(-1));
        t.add_term(vec![1, 1], BigComplex::from_i64(1));
        t.add_term(vec![0, 2], BigComplex::from_i64(-3));
        let (_, inv) = det_and_inverse(&[
            vec![BigComplex::from_i64(-2), BigComplex::from_i64(1)],
            vec![BigComplex::from_i64(1), BigComplex::from_i64(-6)],
        ]);
        for c in wick_corrections(&t, &[], &inv.unwrap(), 2) {
            assert!(c.is_zero());
        }
        let cov = vec![vec![BigComplex::from_i64(3)]];
        let mut m = Moments { cov: &cov, memo: HashMap::new() };
        assert_eq!(m.get(&[4]).to_f64().0, 27.0);
        assert!(m.get(&[3]).is_zero());
    }

    #[test]
    fn type_counts_at_large_x() {
        let pot = LgPotential::new(CurveModel::complete_intersection(vec![q(0), q(1), q(2)], vec![q(5)]).unwrap());
        let cps = critical_points(&pot, &BigComplex::from_i64(1_000_000)).unwrap();
        assert_eq!(cps.len(), 3);
        assert_eq!(cps.iter().filter(|c| c.kind == CriticalType::Growing).count(), 2);
        let cps = critical_points(&pot, &BigComplex::from_scalar(&qf(7, 1))).unwrap();
        assert_eq!(cps.iter().filter(|c| c.kind == CriticalType::Anchored).count(), 1);
    }
}
