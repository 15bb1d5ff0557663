//! Differential operators in `theta = hbar x d/dx`, the WKB hierarchy on a
//! parametrized spectral curve, the on-shell J-function and the brane q-series.

use std::fmt;

use num_traits::{One, Zero};
use serde_json::json;
use thiserror::Error;

use crate::curve::{CoordinateKind, CurveModel, SpectralCurve};
use crate::exactalg::scalar::{fmt_scalar, q, to_f64};
use crate::exactalg::{hermite_antiderivative, Antiderivative, MPoly, Polynomial, RationalFunction, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WkbError {
    #[error("operator does not quantize this curve: {0}")]
    CurveMismatch(String),
    #[error("degenerate curve: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// `sum_k c_k(x, hbar) theta^k`, normal-ordered with `theta` on the right.
/// Coefficients are polynomials in the variables `(x, hbar)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaOperator {
    coeffs: Vec<MPoly<Scalar>>,
}

impl ThetaOperator {
    pub fn new(mut coeffs: Vec<MPoly<Scalar>>) -> Result<Self, WkbError> {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(WkbError::Invalid("zero operator".into()));
        }
        if coeffs.iter().any(|c| c.nvars() != 2 || c.terms().keys().any(|e| e[0] < 0 || e[1] < 0)) {
            return Err(WkbError::Invalid("coefficients must be polynomials in (x, hbar)".into()));
        }
        Ok(ThetaOperator { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &MPoly<Scalar> {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[MPoly<Scalar>] {
        &self.coeffs
    }

    /// `theta -> y`, `hbar -> 0`, as a polynomial in `(x, y)`.
    pub fn semiclassical_limit(&self) -> MPoly<Scalar> {
        let mut out = MPoly::zero(2);
        for (k, c) in self.coeffs.iter().enumerate() {
            for (e, v) in c.terms() {
                if e[1] == 0 {
                    out.add_term(vec![e[0], k as i32], v.clone());
                }
            }
        }
        out
    }

    /// `c_k` split by powers of hbar: `[k][j]` is the polynomial in `x` multiplying `hbar^j theta^k`.
    fn split(&self) -> Vec<Vec<Polynomial>> {
        self.coeffs
            .iter()
            .map(|c| {
                let hd = c.max_degree_in(1).max(0) as usize;
                let mut v = vec![vec![Scalar::zero(); c.max_degree_in(0).max(0) as usize + 1]; hd + 1];
                for (e, a) in c.terms() {
                    v[e[1] as usize][e[0] as usize] += a;
                }
                v.into_iter().map(Polynomial::new).collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .coeffs
            .iter()
            .enumerate()
            .flat_map(|(k, c)| c.terms().iter().map(move |(e, v)| json!([k, e[0], e[1], fmt_scalar(v)])))
            .collect();
        json!({ "order": self.order(), "terms": terms, "text": self.to_string() })
    }
}

impl fmt::Display for ThetaOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            for (e, v) in c.terms().iter().rev() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({})", v)?;
                if e[0] > 0 {
                    write!(f, "*x^{}", e[0])?;
                }
                if e[1] > 0 {
                    write!(f, "*h^{}", e[1])?;
                }
                if k > 0 {
                    write!(f, "*T^{}", k)?;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Multiplies out `prod (theta - a_i(x, hbar))` where each root is a polynomial in `(x, hbar)`.
fn theta_product(roots: &[MPoly<Scalar>]) -> Vec<MPoly<Scalar>> {
    let mut c = vec![MPoly::one(2)];
    for r in roots {
        let mut next = vec![MPoly::zero(2); c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k + 1] = next[k + 1].add(ck);
            next[k] = next[k].sub(&ck.mul(r));
        }
        c = next;
    }
    c
}

/// `prod_i (theta - w_i) - x prod_a (theta - lambda_a + hbar)`.
pub fn gkz_operator(model: &CurveModel) -> ThetaOperator {
    let cst = |s: &Scalar| MPoly::constant(2, s.clone());
    let hbar = MPoly::<Scalar>::var(2, 1);
    let left = theta_product(&model.w.iter().map(cst).collect::<Vec<_>>());
    let right = theta_product(&model.lambda.iter().map(|l| cst(l).sub(&hbar)).collect::<Vec<_>>());
    let x = MPoly::<Scalar>::var(2, 0);
    let mut coeffs = left;
    for (k, c) in right.iter().enumerate() {
        coeffs[k] = coeffs[k].sub(&x.mul(c));
    }
    ThetaOperator::new(coeffs).expect("leading coefficient is 1")
}

pub fn semiclassical_limit(op: &ThetaOperator) -> MPoly<Scalar> {
    op.semiclassical_limit()
}

/// Where the `S_m` (`m >= 2`) are normalized to vanish.
#[derive(Clone, Debug, PartialEq)]
pub enum Endpoint {
    Infinity,
    At(Scalar),
}

impl Endpoint {
    /// `z = infinity`, except on the Zhukovsky coordinate: there `x = infinity` on the
    /// sheet `y ~ x` (the one with `sqrt(Delta) = +4bz/(z^2-1)`) sits at `z = 1`.
    pub fn default_for(curve: &SpectralCurve) -> Self {
        match curve.coordinate {
            CoordinateKind::Cp1Zhukovsky => Endpoint::At(Scalar::one()),
            _ => Endpoint::Infinity,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Endpoint::Infinity => json!("infinity"),
            Endpoint::At(s) => json!(fmt_scalar(s)),
        }
    }

    /// Value of a rational function at the endpoint, if finite.
    pub fn value(&self, f: &RationalFunction) -> Option<Scalar> {
        match self {
            Endpoint::Infinity => f.limit_at_infinity(),
            Endpoint::At(s) => f.eval(s),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WkbSeries {
    pub curve: SpectralCurve,
    /// `y_m(z)`, `m = 0..=m_max`.
    pub y: Vec<RationalFunction>,
    /// `dS_m/dz = y_m x'/x`.
    pub ds_dz: Vec<RationalFunction>,
    /// Antiderivatives; `None` when the log part needs irrational coefficients.
    /// For `m >= 2` the rational part vanishes at the endpoint when it is finite there.
    pub s: Vec<Option<Antiderivative>>,
    pub endpoint: Endpoint,
}

impl WkbSeries {
    pub fn m_max(&self) -> usize {
        self.y.len() - 1
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "curve": self.curve.to_json(),
            "endpoint": self.endpoint.to_json(),
            "branch": "S_m are functions of the curve coordinate z",
            "orders": (0..self.y.len()).map(|m| json!({
                "m": m,
                "y_m": self.y[m].to_json(),
                "dS_dz": self.ds_dz[m].to_json(),
                "S": self.s[m].as_ref().map(|a| a.to_json()),
            })).collect::<Vec<_>>(),
        })
    }
}

/// hbar-series with rational-function coefficients, truncated at a fixed order.
type HSeries = Vec<RationalFunction>;

/// Orders `0..=m` of `sum_k c_k(x, hbar) R_k` for the ansatz `theta psi = Y psi`.
fn wkb_residual(split: &[Vec<Polynomial>], x: &RationalFunction, xdx: &RationalFunction, ys: &[RationalFunction], m: usize) -> HSeries {
    let mut r: HSeries = vec![RationalFunction::zero(); m + 1];
    r[0] = RationalFunction::one();
    let mut total: HSeries = vec![RationalFunction::zero(); m + 1];
    for (k, ck) in split.iter().enumerate() {
        if k > 0 {
            let mut next = vec![RationalFunction::zero(); m + 1];
            for j in 0..=m {
                let mut acc = RationalFunction::zero();
                for a in 0..=j {
                    if a < ys.len() && !ys[a].is_zero() && !r[j - a].is_zero() {
                        acc = &acc + &(&ys[a] * &r[j - a]);
                    }
                }
                if j > 0 && !r[j - 1].is_zero() {
                    acc = &acc + &(xdx * &r[j - 1].derivative());
                }
                next[j] = acc;
            }
            r = next;
        }
        for (jh, p) in ck.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let px = RationalFunction::from_poly(p.clone()).compose(x);
            for j in jh..=m {
                if !r[j - jh].is_zero() {
                    total[j] = &total[j] + &(&px * &r[j - jh]);
                }
            }
        }
    }
    total
}

/// Solves the WKB hierarchy of `op` on `curve` to order `hbar^m_max`.
pub fn wkb_expand(op: &ThetaOperator, curve: &SpectralCurve, m_max: usize) -> Result<WkbSeries, WkbError> {
    if m_max < 1 {
        return Err(WkbError::Invalid("m_max must be at least 1".into()));
    }
    let a = op.semiclassical_limit().content_normalized();
    if a != curve.defining_poly.content_normalized() {
        return Err(WkbError::CurveMismatch("semiclassical limit differs from the curve".into()));
    }
    let split = op.split();
    let x = &curve.x;
    let dx = curve.dx();
    let xdx = x / &dx;
    let mut ys = vec![curve.y.clone()];
    let e0 = wkb_residual(&split, x, &xdx, &ys, 0);
    if !e0[0].is_zero() {
        return Err(WkbError::CurveMismatch("order-zero equation fails".into()));
    }
    // d/dy of the symbol at hbar = 0, evaluated on the curve.
    let mut ay = RationalFunction::zero();
    for (k, ck) in split.iter().enumerate().skip(1) {
        let p = RationalFunction::from_poly(ck[0].clone()).compose(x);
        ay = &ay + &(&p * &curve.y.pow(k as i32 - 1)).scale(&q(k as i64));
    }
    if ay.is_zero() {
        return Err(WkbError::Degenerate("dA/dy vanishes identically on the curve".into()));
    }
    for m in 1..=m_max {
        ys.push(RationalFunction::zero());
        let e = wkb_residual(&split, x, &xdx, &ys, m);
        ys[m] = -(&e[m] / &ay);
    }
    let check = wkb_residual(&split, x, &xdx, &ys, m_max);
    if let Some(j) = check.iter().position(|c| !c.is_zero()) {
        return Err(WkbError::Degenerate(format!("hierarchy residual nonzero at order {}", j)));
    }
    let endpoint = Endpoint::default_for(curve);
    let dlogx = &dx / x;
    let ds_dz: Vec<RationalFunction> = ys.iter().map(|y| y * &dlogx).collect();
    let s = ds_dz
        .iter()
        .enumerate()
        .map(|(m, f)| {
            let a = hermite_antiderivative(f).ok()?;
            if m < 2 {
                return Some(a);
            }
            match endpoint.value(&a.rational) {
                Some(v) => Some(Antiderivative { rational: &a.rational - &RationalFunction::constant(v), logs: a.logs }),
                None => Some(a),
            }
        })
        .collect();
    Ok(WkbSeries { curve: curve.clone(), y: ys, ds_dz, s, endpoint })
}

#[derive(Clone, Debug)]
pub struct OrderComparison {
    pub m: usize,
    pub equal: bool,
    pub difference: RationalFunction,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub orders: Vec<OrderComparison>,
    /// `S_m -> 0` at the endpoint for `2 <= m <= m_max`.
    pub normalized: bool,
}

impl ComparisonReport {
    pub fn all_equal(&self) -> bool {
        self.normalized && self.orders.iter().all(|o| o.equal)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "normalized": self.normalized,
            "orders": self.orders.iter().map(|o| json!({"m": o.m, "equal": o.equal, "difference": o.difference.to_json()})).collect::<Vec<_>>(),
        })
    }
}

/// Compares `dS_m/dz` with supplied `dF_m/dz`, `m = 0..=m_max`.
pub fn compare_wavefunctions(wkb: &WkbSeries, fm: &[RationalFunction], m_max: usize) -> ComparisonReport {
    let top = m_max.min(wkb.m_max()).min(fm.len().saturating_sub(1));
    let orders = (0..=top)
        .map(|m| {
            let d = &wkb.ds_dz[m] - &fm[m];
            OrderComparison { m, equal: d.is_zero(), difference: d }
        })
        .collect();
    let normalized = (2..=top).all(|m| match &wkb.s[m] {
        Some(a) => a.logs.is_empty() && wkb.endpoint.value(&a.rational).is_some_and(|v| v.is_zero()),
        None => false,
    });
    ComparisonReport { orders, normalized }
}

/// The linear polynomial `a + b hbar`.
fn lin_h(a: &Scalar, b: i64) -> Polynomial {
    Polynomial::new(vec![a.clone(), q(b)])
}

/// Coefficients of `x^d`, `d = 0..=d_max`, of the on-shell J-function at the
/// fixed point `pivot`, as rational functions of `hbar`.
pub fn onshell_j_series(model: &CurveModel, pivot: usize, d_max: usize) -> Result<Vec<RationalFunction>, WkbError> {
    if pivot >= model.big_n() {
        return Err(WkbError::Invalid(format!("pivot {} out of range", pivot)));
    }
    let wp = &model.w[pivot];
    let mut out = vec![RationalFunction::one()];
    for d in 1..=d_max as i64 {
        let mut num = Polynomial::one();
        for l in &model.lambda {
            num = &num * &lin_h(&(wp - l), d);
        }
        let mut den = Polynomial::one();
        for w in &model.w {
            den = &den * &lin_h(&(wp - w), d);
        }
        let step = RationalFunction::new(num, den).map_err(|e| WkbError::Degenerate(e.to_string()))?;
        let prev = out.last().expect("nonempty").clone();
        out.push(&prev * &step);
    }
    Ok(out)
}

/// First failing degree and its residual, if any.
#[derive(Clone, Debug)]
pub struct AnnihilationFailure {
    pub degree: usize,
    pub residual: RationalFunction,
}

/// Applies `op` to `x^{w_pivot/hbar} sum_d c_d x^d` and checks every coefficient
/// of `x^{w_pivot/hbar + d}`, `d < d_max`, vanishes identically in `hbar`.
pub fn annihilation_check(op: &ThetaOperator, series: &[RationalFunction], w_pivot: &Scalar, d_max: usize) -> Result<(), AnnihilationFailure> {
    let hb = RationalFunction::z();
    for dd in 0..d_max {
        let mut res = RationalFunction::zero();
        for (k, c) in op.coeffs().iter().enumerate() {
            for (e, v) in c.terms() {
                let i = e[0] as usize;
                if i > dd {
                    continue;
                }
                let d = dd - i;
                let Some(cd) = series.get(d) else { continue };
                let eig = RationalFunction::from_poly(lin_h(w_pivot, d as i64));
                let t = &(&hb.pow(e[1]) * &eig.pow(k as i32)) * cd;
                res = &res + &t.scale(v);
            }
        }
        if !res.is_zero() {
            return Err(AnnihilationFailure { degree: dd, residual: res });
        }
    }
    Ok(())
}

/// Brane q-series `sum_d c_d (q^{1/2} X)^d` with exact multivariate coefficients.
///
/// Variables: `s = q^{1/2}` (index 0), `Q_{w,i}` for `i = 1..N-1`, then `Q_{lambda,a}`.
/// `Q_{w,0} = 1`.
#[derive(Clone, Debug)]
pub struct QSeries {
    pub big_n: usize,
    pub small_n: usize,
    /// `(numerator, denominator)` of `c_d`, without the half-power prefix.
    pub coeffs: Vec<(MPoly<Scalar>, MPoly<Scalar>)>,
    /// The `q^{d/2}` factor, tracked separately.
    pub half_power_prefix: bool,
}

impl QSeries {
    fn nvars(big_n: usize, small_n: usize) -> usize {
        big_n + small_n
    }

    /// `q^k = s^{2k}` as a polynomial.
    fn qpow(nv: usize, k: i64) -> MPoly<Scalar> {
        let mut e = vec![0; nv];
        e[0] = 2 * k as i32;
        MPoly::monomial(nv, e, Scalar::one())
    }

    /// `Q_{w,i}` (`Q_{w,0} = 1`).
    fn qw(nv: usize, i: usize) -> MPoly<Scalar> {
        if i == 0 {
            MPoly::one(nv)
        } else {
            MPoly::var(nv, i)
        }
    }

    fn ql(nv: usize, big_n: usize, a: usize) -> MPoly<Scalar> {
        MPoly::var(nv, big_n + a)
    }

    pub fn new(big_n: usize, small_n: usize, d_max: usize) -> Result<Self, WkbError> {
        if big_n == 0 || small_n >= big_n {
            return Err(WkbError::Invalid(format!("need 0 <= n < N, got N={} n={}", big_n, small_n)));
        }
        let nv = Self::nvars(big_n, small_n);
        let one = MPoly::<Scalar>::one(nv);
        let mut coeffs = vec![(one.clone(), one.clone())];
        for d in 1..=d_max as i64 {
            let (pn, pd) = coeffs.last().expect("nonempty").clone();
            let mut num = pn;
            for a in 0..small_n {
                num = num.mul(&one.sub(&Self::ql(nv, big_n, a).mul(&Self::qpow(nv, d - 1))));
            }
            let mut den = pd;
            for i in 0..big_n {
                den = den.mul(&one.sub(&Self::qw(nv, i).mul(&Self::qpow(nv, d))));
            }
            coeffs.push((num, den));
        }
        Ok(QSeries { big_n, small_n, coeffs, half_power_prefix: true })
    }
}

#[derive(Clone, Debug)]
pub struct QdiffReport {
    /// Annihilation of `sum_d c_d X^d` by `prod_i (1 - Q_{w,i} y) - x prod_a (1 - Q_{lambda,a} y)`, up to `d_max`.
    pub holds: bool,
    pub first_failure: Option<usize>,
    /// Same check for the series with the `q^{d/2}` prefix kept and `x` unscaled.
    pub holds_with_prefix: bool,
    pub prefix_first_failure: Option<usize>,
}

impl QdiffReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "holds": self.holds,
            "first_failure": self.first_failure,
            "holds_with_half_power_prefix": self.holds_with_prefix,
            "prefix_first_failure": self.prefix_first_failure,
        })
    }
}

/// Coefficientwise check of the q-difference equation, exact in `q^{1/2}` and the `Q`'s.
///
/// With `y X^d = q^d X^d` the coefficient of `X^d` is
/// `c_d p^d prod_i (1 - Q_{w,i} q^d) - c_{d-1} p^{d-1} prod_a (1 - Q_{lambda,a} q^{d-1})`
/// where `p` is the per-degree prefix.
pub fn qdiff_check(big_n: usize, small_n: usize, d_max: usize) -> Result<QdiffReport, WkbError> {
    let series = QSeries::new(big_n, small_n, d_max)?;
    let nv = QSeries::nvars(big_n, small_n);
    let one = MPoly::<Scalar>::one(nv);
    let s = MPoly::<Scalar>::var(nv, 0);
    let check = |with_prefix: bool| -> Option<usize> {
        for d in 1..=d_max {
            let dq = d as i64;
            let mut lhs_f = one.clone();
            for i in 0..big_n {
                lhs_f = lhs_f.mul(&one.sub(&QSeries::qw(nv, i).mul(&QSeries::qpow(nv, dq))));
            }
            let mut rhs_f = one.clone();
            for a in 0..small_n {
                rhs_f = rhs_f.mul(&one.sub(&QSeries::ql(nv, big_n, a).mul(&QSeries::qpow(nv, dq - 1))));
            }
            if with_prefix {
                lhs_f = lhs_f.mul(&s);
            }
            let (n1, d1) = &series.coeffs[d];
            let (n0, d0) = &series.coeffs[d - 1];
            // c_d * lhs_f == c_{d-1} * rhs_f, cross-multiplied.
            let l = n1.mul(&lhs_f).mul(d0);
            let r = n0.mul(&rhs_f).mul(d1);
            if !l.sub(&r).is_zero() {
                return Some(d);
            }
        }
        None
    };
    let first_failure = check(false);
    let prefix_first_failure = check(true);
    Ok(QdiffReport {
        holds: first_failure.is_none(),
        first_failure,
        holds_with_prefix: prefix_first_failure.is_none(),
        prefix_first_failure,
    })
}

#[derive(Clone, Debug)]
pub struct CohLimitDegree {
    pub d: usize,
    pub limit: f64,
    /// Relative error at each beta.
    pub errors: Vec<f64>,
    /// Richardson estimate from the two smallest betas (rate one).
    pub richardson: f64,
    /// Least-squares slope of `log error` against `log beta`; `None` when exact.
    pub slope: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CohLimitReport {
    pub betas: Vec<f64>,
    pub degrees: Vec<CohLimitDegree>,
}

impl CohLimitReport {
    pub fn converges(&self) -> bool {
        self.degrees.iter().all(|d| d.slope.is_none_or(|s| (s - 1.0).abs() <= 0.1))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "betas": self.betas,
            "converges": self.converges(),
            "degrees": self.degrees.iter().map(|d| json!({
                "d": d.d, "limit": d.limit, "relative_errors": d.errors,
                "richardson": d.richardson, "slope": d.slope,
            })).collect::<Vec<_>>(),
        })
    }
}

/// `1 - exp(-t)` without cancellation.
fn one_minus_exp_neg(t: f64) -> f64 {
    -(-t).exp_m1()
}

/// Degree-`d` term of the brane series at `g_s = beta hbar`,
/// `Q_{w,i} = e^{-beta (w_0 - w_i)}`, `Q_{lambda,a} = e^{-beta (w_0 - lambda_a + hbar)}`
/// and `X = beta^{N-n} x`.
fn k_term(w: &[f64], lam: &[f64], x: f64, hbar: f64, beta: f64, d: usize) -> f64 {
    let mut v = 1.0;
    for m in 1..=d {
        let mf = m as f64;
        for l in lam {
            // 1 - Q_lambda q^{m-1} with q = e^{-beta hbar}
            v *= one_minus_exp_neg(beta * (w[0] - l + mf * hbar)) / beta;
        }
        for wi in w {
            v /= one_minus_exp_neg(beta * (w[0] - wi + mf * hbar)) / beta;
        }
    }
    // The beta^{(N-n)d} in X cancels the beta's divided out above.
    let half = (-beta * hbar * d as f64 / 2.0).exp();
    v * half * x.powi(d as i32)
}

/// Degreewise convergence of the brane series to the on-shell J-function
/// (pivot 0) as `beta -> 0`.
pub fn coh_limit_check(model: &CurveModel, x: f64, hbar: f64, betas: &[f64], d_max: usize) -> Result<CohLimitReport, WkbError> {
    if betas.len() < 2 || betas.windows(2).any(|p| !(p[1] < p[0] && p[1] > 0.0)) {
        return Err(WkbError::Invalid("beta list must be positive and strictly decreasing, length >= 2".into()));
    }
    let w: Vec<f64> = model.w.iter().map(to_f64).collect();
    let lam: Vec<f64> = model.lambda.iter().map(to_f64).collect();
    let hb = Scalar::from_float(hbar).ok_or_else(|| WkbError::Invalid("hbar not finite".into()))?;
    let j = onshell_j_series(model, 0, d_max)?;
    let mut degrees = Vec::new();
    for d in 0..=d_max {
        let limit = to_f64(&j[d].eval(&hb).ok_or_else(|| WkbError::Degenerate(format!("J coefficient {} has a pole at hbar", d)))?) * x.powi(d as i32);
        let vals: Vec<f64> = betas.iter().map(|&b| k_term(&w, &lam, x, hbar, b, d)).collect();
        let errors: Vec<f64> = vals.iter().map(|v| ((v - limit) / limit).abs()).collect();
        let n = vals.len();
        let (b1, b2) = (betas[n - 2], betas[n - 1]);
        let richardson = (b1 * vals[n - 1] - b2 * vals[n - 2]) / (b1 - b2);
        let slope = if errors.iter().all(|e| *e < 1e-300) {
            None
        } else {
            let pts: Vec<(f64, f64)> = betas.iter().zip(&errors).map(|(b, e)| (b.ln(), e.ln())).collect();
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            Some(sxy / sxx)
        };
        degrees.push(CohLimitDegree { d, limit, errors, richardson, slope });
    }
    Ok(CohLimitReport { betas: betas.to_vec(), degrees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_curve, build_curve_for_wkb};
    use crate::exactalg::scalar::qf;

    fn rf(n: &[i64], d: &[i64]) -> RationalFunction {
        RationalFunction::new(Polynomial::from_i64(n), Polynomial::from_i64(d)).unwrap()
    }

    #[test]
    fn gkz_operator_examples() {
        let m = CurveModel::projective_space(vec![q(2), q(-1)]).unwrap();
        let op = gkz_operator(&m);
        assert_eq!(op.order(), 2);
        assert_eq!(op.coeff(1), &MPoly::constant(2, q(-1)));
        assert_eq!(op.coeff(0).coeff(&[0, 0]), q(-2));
        assert_eq!(op.coeff(0).coeff(&[1, 0]), q(-1));
        let m = CurveModel::complete_intersection(vec![q(0), q(1)], vec![q(3)]).unwrap();
        let op = gkz_operator(&m);
        assert_eq!(op.coeff(1).coeff(&[1, 0]), q(-1));
        assert_eq!(op.coeff(0).coeff(&[1, 0]), q(3));
        assert_eq!(op.coeff(0).coeff(&[1, 1]), q(-1));
        assert_eq!(op.semiclassical_limit(), m.gkz_polynomial());
    }

    #[test]
    fn massless_cp1_hierarchy() {
        let m = CurveModel::projective_space(vec![q(0), q(0)]).unwrap();
        let c = build_curve_for_wkb(&m, CoordinateKind::Standard).unwrap();
        let w = wkb_expand(&gkz_operator(&m), &c, 4).unwrap();
        assert_eq!(w.s[2].as_ref().unwrap().rational, rf(&[1], &[0, 16]));
        assert_eq!(w.s[3].as_ref().unwrap().rational, rf(&[1], &[0, 0, 64]));
        assert_eq!(w.s[4].as_ref().unwrap().rational, rf(&[25], &[0, 0, 0, 3072]));
    }

    #[test]
    fn equivariant_cp1_s2() {
        let m = CurveModel::projective_space(vec![q(1), q(0)]).unwrap();
        let c = build_curve(&m, CoordinateKind::Cp1Sqrt).unwrap();
        let w = wkb_expand(&gkz_operator(&m), &c, 3).unwrap();
        // (6x - D) / (96 z^3) with x = z^2 - 1/4, D = 1
        let expect = rf(&[-5, 0, 12], &[0, 0, 0, 192]);
        assert_eq!(w.s[2].as_ref().unwrap().rational, expect);
    }

    #[test]
    fn j_series_and_annihilation() {
        let m = CurveModel::projective_space(vec![q(3), q(1)]).unwrap();
        let j = onshell_j_series(&m, 0, 6).unwrap();
        // 1/(hbar (2 + hbar))
        assert_eq!(j[1], rf(&[1], &[0, 2, 1]));
        let op = gkz_operator(&m);
        assert!(annihilation_check(&op, &j, &q(3), 6).is_ok());
        let bad = gkz_operator(&CurveModel::projective_space(vec![q(4), q(1)]).unwrap());
        assert_eq!(annihilation_check(&bad, &j, &q(3), 6).unwrap_err().degree, 0);
        let n1 = CurveModel::projective_space(vec![q(0)]).unwrap();
        let j = onshell_j_series(&n1, 0, 4).unwrap();
        assert_eq!(j[3], rf(&[1], &[0, 0, 0, 6]));
    }

    #[test]
    fn q_difference() {
        for (nb, ns) in [(1, 0), (2, 0), (2, 1)] {
            let r = qdiff_check(nb, ns, 6).unwrap();
            assert!(r.holds, "{:?}", r);
            assert_eq!(r.prefix_first_failure, Some(1));
        }
    }

    #[test]
    fn cohomological_limit() {
        let m = CurveModel::complete_intersection(vec![q(0), qf(3, 2)], vec![q(5)]).unwrap();
        let r = coh_limit_check(&m, 0.7, 0.9, &[1e-2, 5e-3, 2.5e-3, 1.25e-3], 3).unwrap();
        assert!(r.converges(), "{:?}", r);
        assert!(r.degrees[0].slope.is_none());
    }
}
