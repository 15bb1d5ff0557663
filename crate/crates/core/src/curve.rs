//! GKZ spectral curves: rational parametrizations, defining polynomials,
//! ramification data and local involutions.

use num_traits::{One, Zero};
use serde_json::json;
use thiserror::Error;

use crate::exactalg::bigfloat::{poly_roots, PrecisionGuard};
use crate::exactalg::mpoly::resultant;
use crate::exactalg::scalar::{fmt_scalar, sqrt_exact};
use crate::exactalg::{BasePoint, BigComplex, MPoly, Polynomial, RationalFunction, Scalar, TruncatedSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("non-simple ramification: {0}")]
    NonSimpleRamification(String),
    #[error("needs the numeric backend: {0}")]
    NeedsNumericBackend(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    ProjectiveSpace,
    CompleteIntersection,
}

/// Projective space `CP^{N-1}` or a degree-one complete intersection in it,
/// with equivariant parameters `w` and hypersurface parameters `lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveModel {
    pub family: Family,
    pub w: Vec<Scalar>,
    pub lambda: Vec<Scalar>,
}

impl CurveModel {
    pub fn projective_space(w: Vec<Scalar>) -> Result<Self, CurveError> {
        let m = CurveModel { family: Family::ProjectiveSpace, w, lambda: Vec::new() };
        m.validate()?;
        Ok(m)
    }

    pub fn complete_intersection(w: Vec<Scalar>, lambda: Vec<Scalar>) -> Result<Self, CurveError> {
        let m = CurveModel { family: Family::CompleteIntersection, w, lambda };
        m.validate()?;
        Ok(m)
    }

    /// Either family, picked from whether `lambda` is empty.
    pub fn from_params(w: Vec<Scalar>, lambda: Vec<Scalar>) -> Result<Self, CurveError> {
        if lambda.is_empty() {
            Self::projective_space(w)
        } else {
            Self::complete_intersection(w, lambda)
        }
    }

    /// `N`, the number of equivariant parameters.
    pub fn big_n(&self) -> usize {
        self.w.len()
    }

    /// `n`, the number of hypersurfaces.
    pub fn small_n(&self) -> usize {
        self.lambda.len()
    }

    fn validate(&self) -> Result<(), CurveError> {
        if self.w.is_empty() {
            return Err(CurveError::InvalidModel("N must be at least 1".into()));
        }
        if self.small_n() >= self.big_n() {
            return Err(CurveError::InvalidModel(format!("need n < N, got n={} N={}", self.small_n(), self.big_n())));
        }
        if self.family == Family::ProjectiveSpace && !self.lambda.is_empty() {
            return Err(CurveError::InvalidModel("projective space has no lambda parameters".into()));
        }
        Ok(())
    }

    /// `prod_i (y - w_i) - x prod_a (y - lambda_a)` in variables `(x, y)`.
    pub fn gkz_polynomial(&self) -> MPoly<Scalar> {
        let y = MPoly::<Scalar>::var(2, 1);
        let x = MPoly::<Scalar>::var(2, 0);
        let lin = |c: &Scalar| y.sub(&MPoly::constant(2, c.clone()));
        let left = self.w.iter().fold(MPoly::one(2), |acc, w| acc.mul(&lin(w)));
        let right = self.lambda.iter().fold(x, |acc, l| acc.mul(&lin(l)));
        left.sub(&right)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "family": match self.family { Family::ProjectiveSpace => "projective_space", Family::CompleteIntersection => "complete_intersection_degree_one" },
            "N": self.big_n(),
            "n": self.small_n(),
            "w": self.w.iter().map(fmt_scalar).collect::<Vec<_>>(),
            "lambda": self.lambda.iter().map(fmt_scalar).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordinateKind {
    /// `x = prod (z - w_i) / prod (z - lambda_a)`, `y = z`.
    Standard,
    /// `x = z^2 - Lambda`, `y = z + (w_0 + w_1)/2`.
    Cp1Sqrt,
    /// Zhukovsky-type coordinate for the degree-one hypersurface in `CP^1`.
    Cp1Zhukovsky,
}

impl CoordinateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoordinateKind::Standard => "standard",
            CoordinateKind::Cp1Sqrt => "cp1_sqrt",
            CoordinateKind::Cp1Zhukovsky => "cp1_zhukovsky",
        }
    }

    /// Whether `z -> -z` is a global deck transformation of `x`.
    pub fn has_global_involution(&self) -> bool {
        !matches!(self, CoordinateKind::Standard)
    }
}

/// The natural coordinate: the two `N = 2` special coordinates when they apply.
pub fn default_coordinate(model: &CurveModel) -> CoordinateKind {
    match (model.big_n(), model.small_n()) {
        (2, 0) => CoordinateKind::Cp1Sqrt,
        (2, 1) => {
            let s = (&model.lambda[0] - &model.w[0]) * (&model.lambda[0] - &model.w[1]);
            if sqrt_exact(&s).is_some() {
                CoordinateKind::Cp1Zhukovsky
            } else {
                CoordinateKind::Standard
            }
        }
        _ => CoordinateKind::Standard,
    }
}

#[derive(Clone, Debug)]
pub enum Involution {
    /// `sigma(z) = -z` globally.
    Negation,
    /// Local series `sigma(q + t) - q` in `t`.
    Series(TruncatedSeries<BigComplex>),
}

#[derive(Clone, Debug)]
pub enum Locus {
    Exact(Scalar),
    Numeric(BigComplex),
    Infinity,
}

impl Locus {
    pub fn to_complex(&self) -> Option<BigComplex> {
        match self {
            Locus::Exact(q) => Some(BigComplex::from_scalar(q)),
            Locus::Numeric(c) => Some(c.clone()),
            Locus::Infinity => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RamificationPoint {
    pub z: Locus,
    pub simple: bool,
    pub involution: Involution,
}

#[derive(Clone, Debug)]
pub struct SpectralCurve {
    pub model: CurveModel,
    pub x: RationalFunction,
    pub y: RationalFunction,
    /// `A(x, y)` in variables `(x, y)`.
    pub defining_poly: MPoly<Scalar>,
    pub coordinate: CoordinateKind,
    /// For the Zhukovsky coordinate, the chosen root `sqrt((lambda-w_0)(lambda-w_1))`.
    pub branch_root: Option<Scalar>,
}

impl SpectralCurve {
    pub fn dx(&self) -> RationalFunction {
        self.x.derivative()
    }

    pub fn dy(&self) -> RationalFunction {
        self.y.derivative()
    }

    /// `Lambda = (w_0 - w_1)^2 / 4` for the `N = 2` curves.
    pub fn big_lambda(&self) -> Scalar {
        let d = &self.model.w[0] - &self.model.w[1];
        &d * &d / Scalar::from_integer(4.into())
    }

    /// All `z` with `x(z) = x0` (numerically).
    pub fn preimages(&self, x0: &BigComplex) -> Vec<BigComplex> {
        let p = self.x.num();
        let d = self.x.den();
        let n = p.deg().max(d.deg()) as usize;
        let coeffs: Vec<BigComplex> = (0..=n)
            .map(|k| BigComplex::from_scalar(&p.coeff(k)).sub(&x0.mul(&BigComplex::from_scalar(&d.coeff(k)))))
            .collect();
        poly_roots(&coeffs)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let a: Vec<serde_json::Value> = self
            .defining_poly
            .terms()
            .iter()
            .map(|(e, c)| json!([e[0], e[1], fmt_scalar(c)]))
            .collect();
        let mut doc = json!({
            "model": self.model.to_json(),
            "x": self.x.to_json(),
            "y": self.y.to_json(),
            "A": a,
            "coordinate": self.coordinate.as_str(),
        });
        if let Some(r) = &self.branch_root {
            doc["branch_root"] = json!(fmt_scalar(r));
        }
        doc
    }
}

fn parametrization(model: &CurveModel, kind: CoordinateKind) -> Result<(RationalFunction, RationalFunction, Option<Scalar>), CurveError> {
    let two = Scalar::from_integer(2.into());
    match kind {
        CoordinateKind::Standard => {
            let num = Polynomial::from_roots(&model.w);
            let den = Polynomial::from_roots(&model.lambda);
            let x = RationalFunction::new(num, den).map_err(|e| CurveError::Degenerate(e.to_string()))?;
            Ok((x, RationalFunction::z(), None))
        }
        CoordinateKind::Cp1Sqrt => {
            if model.big_n() != 2 || model.small_n() != 0 {
                return Err(CurveError::InvalidModel("cp1_sqrt needs N=2, n=0".into()));
            }
            let d = &model.w[0] - &model.w[1];
            let lam = &d * &d / Scalar::from_integer(4.into());
            let x = RationalFunction::from_poly(Polynomial::new(vec![-lam, Scalar::zero(), Scalar::one()]));
            let y = RationalFunction::from_poly(Polynomial::new(vec![(&model.w[0] + &model.w[1]) / &two, Scalar::one()]));
            Ok((x, y, None))
        }
        CoordinateKind::Cp1Zhukovsky => {
            if model.big_n() != 2 || model.small_n() != 1 {
                return Err(CurveError::InvalidModel("cp1_zhukovsky needs N=2, n=1".into()));
            }
            let (w0, w1, l) = (&model.w[0], &model.w[1], &model.lambda[0]);
            let sq = (l - w0) * (l - w1);
            let b = sqrt_exact(&sq).ok_or_else(|| {
                CurveError::NeedsNumericBackend(format!("(lambda-w0)(lambda-w1) = {} is not a rational square", sq))
            })?;
            if b.is_zero() {
                return Err(CurveError::Degenerate("lambda coincides with a w_i".into()));
            }
            // alpha + beta = -2(w0 + w1 - 2 lambda), beta - alpha = 4b.
            let mid = -(w0 + w1 - &two * l);
            let zz1 = Polynomial::new(vec![-Scalar::one(), Scalar::zero(), Scalar::one()]);
            let zzp1 = Polynomial::new(vec![Scalar::one(), Scalar::zero(), Scalar::one()]);
            let frac = RationalFunction::new(zzp1, zz1.clone()).expect("nonzero");
            let x = &RationalFunction::constant(mid) + &frac.scale(&(&two * &b));
            let zfrac = RationalFunction::new(Polynomial::z(), zz1).expect("nonzero");
            let y = &(&RationalFunction::constant((w0 + w1) / &two) + &x.scale(&(Scalar::one() / &two))) + &zfrac.scale(&(&two * &b));
            Ok((x, y, Some(b)))
        }
    }
}

/// Eliminates `z` from `x - x(z)`, `y - y(z)` and strips factors in `x` alone.
fn eliminate(x: &RationalFunction, y: &RationalFunction) -> MPoly<Scalar> {
    // Variables (x, y, z).
    let lift = |p: &Polynomial| MPoly::from_univariate(p, 3, 2);
    let p1 = lift(x.num()).sub(&MPoly::var(3, 0).mul(&lift(x.den())));
    let p2 = lift(y.num()).sub(&MPoly::var(3, 1).mul(&lift(y.den())));
    let r = resultant(&p1, &p2, 2).permute(&[0, 1, 2], 3);
    let r2 = {
        let mut m = MPoly::zero(2);
        for (e, c) in r.terms() {
            m.add_term(vec![e[0], e[1]], c.clone());
        }
        m
    };
    // Remove the content with respect to y (a polynomial in x).
    let by_y = r2.coefficients_in(1);
    let g = by_y
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| c.to_univariate(0))
        .fold(Polynomial::zero(), |acc, p| Polynomial::gcd(&acc, &p));
    let mut out = MPoly::zero(2);
    for (j, c) in by_y.iter().enumerate() {
        let pc = c.to_univariate(0).exact_div(&g);
        for (i, a) in pc.coeffs().iter().enumerate() {
            out.add_term(vec![i as i32, j as i32], a.clone());
        }
    }
    out.content_normalized()
}

fn build(model: &CurveModel, kind: CoordinateKind, strict: bool) -> Result<SpectralCurve, CurveError> {
    let (x, y, branch_root) = parametrization(model, kind)?;
    if x.degree() == i64::MIN || x.num().deg() + x.den().deg() == 0 {
        return Err(CurveError::Degenerate("x(z) is constant".into()));
    }
    if model.w.iter().any(|w| model.lambda.contains(w)) {
        return Err(CurveError::Degenerate("some w_i equals some lambda_a".into()));
    }
    let defining_poly = eliminate(&x, &y);
    let closed = model.gkz_polynomial().content_normalized();
    if defining_poly != closed {
        return Err(CurveError::Internal("eliminated curve differs from the GKZ polynomial".into()));
    }
    if !defining_poly.eval_rf(&[x.clone(), y.clone()]).is_zero() {
        return Err(CurveError::Internal("A(x(z), y(z)) does not vanish".into()));
    }
    let curve = SpectralCurve { model: model.clone(), x, y, defining_poly, coordinate: kind, branch_root };
    let dxn = curve.dx().num().clone();
    let dyn_ = curve.dy().num().clone();
    if Polynomial::resultant(&dxn, &dyn_).is_zero() && dxn.deg() > 0 && dyn_.deg() > 0 {
        return Err(CurveError::Degenerate("dx and dy share a zero".into()));
    }
    if strict {
        if dxn.deg() > 0 && Polynomial::gcd(&dxn, &dxn.derivative()).deg() > 0 {
            return Err(CurveError::NonSimpleRamification(format!("dx/dz numerator {} has a repeated root", dxn)));
        }
        if infinity_ramification_order(&curve.x) > 1 {
            return Err(CurveError::NonSimpleRamification("higher-order ramification at z = infinity".into()));
        }
    }
    Ok(curve)
}

/// Builds the curve, rejecting degenerate parameters and non-simple ramification.
pub fn build_curve(model: &CurveModel, kind: CoordinateKind) -> Result<SpectralCurve, CurveError> {
    build(model, kind, true)
}

/// Like [`build_curve`] but accepts non-simple ramification; for WKB work only,
/// where no residue at a ramification point is ever taken.
pub fn build_curve_for_wkb(model: &CurveModel, kind: CoordinateKind) -> Result<SpectralCurve, CurveError> {
    build(model, kind, false)
}

/// `k - 1` when `x - x(inf)` vanishes to order `k >= 2` in `1/z`, else 0.
fn infinity_ramification_order(x: &RationalFunction) -> i64 {
    if x.degree() > 0 {
        return 0;
    }
    let s = x.laurent_expand(&BasePoint::Infinity, 8).expect("finite at infinity");
    let v = (1..=8).find(|&k| !s.coeff(k).is_zero()).unwrap_or(9);
    v - 1
}

/// Default involution-series depth for correlators up to `2g - 2 + n = chi`.
pub fn default_series_order(chi: i64) -> i64 {
    2 * chi + 4
}

/// Zeros of `dx/dz` with their local involutions.
pub fn ramification_points(curve: &SpectralCurve, precision_bits: usize, series_order: i64) -> Result<Vec<RamificationPoint>, CurveError> {
    let _g = PrecisionGuard::new(precision_bits);
    let dxn = curve.dx().num().clone();
    if dxn.deg() > 0 && Polynomial::gcd(&dxn, &dxn.derivative()).deg() > 0 {
        return Err(CurveError::NonSimpleRamification(format!("dx/dz numerator {} has a repeated root", dxn)));
    }
    let mut out = Vec::new();
    if curve.coordinate.has_global_involution() {
        out.push(RamificationPoint { z: Locus::Exact(Scalar::zero()), simple: true, involution: Involution::Negation });
        if curve.coordinate == CoordinateKind::Cp1Zhukovsky {
            out.push(RamificationPoint { z: Locus::Infinity, simple: true, involution: Involution::Negation });
        }
        return Ok(out);
    }
    let rational = dxn.rational_roots();
    let mut rest = dxn.monic();
    for r in &rational {
        rest = rest.exact_div(&Polynomial::linear_root(r));
    }
    let mut points: Vec<Locus> = rational.into_iter().map(Locus::Exact).collect();
    if rest.deg() > 0 {
        let cs: Vec<BigComplex> = rest.coeffs().iter().map(BigComplex::from_scalar).collect();
        let mut roots = poly_roots(&cs);
        roots.sort_by(|a, b| {
            let (ar, ai) = a.to_f64();
            let (br, bi) = b.to_f64();
            ar.partial_cmp(&br).unwrap().then(ai.partial_cmp(&bi).unwrap())
        });
        points.extend(roots.into_iter().map(Locus::Numeric));
    }
    if infinity_ramification_order(&curve.x) == 1 {
        return Err(CurveError::NeedsNumericBackend("ramification at infinity in the standard coordinate".into()));
    }
    for p in points {
        let q = p.to_complex().expect("finite point");
        let sigma = involution_series(&curve.x, &q, series_order);
        out.push(RamificationPoint { z: p, simple: true, involution: Involution::Series(sigma) });
    }
    Ok(out)
}

/// Local deck transformation at a simple ramification point `q`, as a series
/// `sigma(q + t) - q` in `t`.
///
/// With `x(q + t) - x(q) = a_2 t^2 U(t)`, `U(0) = 1`, the coordinate
/// `zeta = t U^{1/2}` satisfies `x - x(q) = a_2 zeta^2`, so `sigma` is the
/// reversion of `zeta` applied to `-zeta`.
pub fn involution_series(x: &RationalFunction, q: &BigComplex, order: i64) -> TruncatedSeries<BigComplex> {
    let xs = x.expand_at_complex(q, order + 2);
    let a2 = xs.coeff(2);
    let u: Vec<BigComplex> = (0..=order).map(|k| xs.coeff(k + 2).div(&a2)).collect();
    let base = BasePoint::At(q.clone());
    let mut u = TruncatedSeries::new(base.clone(), 0, u, order);
    // U(0) = 1 up to rounding; pin it.
    let mut coeffs = u.coeffs().to_vec();
    coeffs[0] = BigComplex::one();
    u = TruncatedSeries::new(base.clone(), 0, coeffs, order);
    let half = Scalar::new(1.into(), 2.into());
    let zeta = TruncatedSeries::variable(base, order + 1).mul(&u.pow_one_plus(&half));
    let inv = zeta.reversion();
    inv.compose(&zeta.neg())
}

/// Verifies that the critical values of the Landau–Ginzburg potential at
/// `x_sample` land on the GKZ curve.
pub fn critical_set_check(model: &CurveModel, x_sample: &Scalar, precision_bits: usize) -> Result<bool, CurveError> {
    let _g = PrecisionGuard::new(precision_bits);
    let pot = crate::oscillatory::LgPotential::new(model.clone());
    let xc = BigComplex::from_scalar(x_sample);
    let cps = crate::oscillatory::critical_points(&pot, &xc).map_err(|e| CurveError::Degenerate(e.to_string()))?;
    let a = model.gkz_polynomial().map(BigComplex::from_scalar);
    let tol = 2f64.powi(-(precision_bits as i32) + 40);
    for cp in &cps {
        let y = pot.x_dw_dx(&cp.coords, &xc);
        let val = a.eval(&[xc.clone(), y.clone()]);
        let scale = 1.0 + y.abs_f64().powi(model.big_n() as i32) + xc.abs_f64() * (1.0 + y.abs_f64()).powi(model.small_n() as i32);
        if val.abs_f64() > tol * scale {
            return Ok(false);
        }
    }
    Ok(cps.len() == model.big_n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::scalar::{q, qf};

    #[test]
    fn cp1_sqrt_curve() {
        let m = CurveModel::projective_space(vec![q(1), q(0)]).unwrap();
        let c = build_curve(&m, CoordinateKind::Cp1Sqrt).unwrap();
        assert_eq!(c.defining_poly, m.gkz_polynomial().content_normalized());
        let rp = ramification_points(&c, 128, 6).unwrap();
        assert_eq!(rp.len(), 1);
        assert!(matches!(rp[0].involution, Involution::Negation));
    }

    #[test]
    fn zhukovsky_curve() {
        let m = CurveModel::complete_intersection(vec![q(0), q(3)], vec![q(4)]).unwrap();
        let c = build_curve(&m, CoordinateKind::Cp1Zhukovsky).unwrap();
        assert_eq!(c.branch_root, Some(q(2)));
        // A = y^2 - (w0 + w1 + x) y + w0 w1 + lambda x
        let mut a = MPoly::zero(2);
        a.add_term(vec![0, 2], q(1));
        a.add_term(vec![0, 1], q(-3));
        a.add_term(vec![1, 1], q(-1));
        a.add_term(vec![1, 0], q(4));
        assert_eq!(c.defining_poly, a.content_normalized());
        assert_eq!(c.x.reflect(), c.x);
        let m = CurveModel::complete_intersection(vec![q(0), q(1)], vec![q(3)]).unwrap();
        assert!(matches!(build_curve(&m, CoordinateKind::Cp1Zhukovsky), Err(CurveError::NeedsNumericBackend(_))));
    }

    #[test]
    fn non_simple_ramification_rejected() {
        let m = CurveModel::projective_space(vec![q(0), q(0), q(0)]).unwrap();
        assert!(matches!(build_curve(&m, CoordinateKind::Standard), Err(CurveError::NonSimpleRamification(_))));
        assert!(build_curve_for_wkb(&m, CoordinateKind::Standard).is_ok());
    }

    #[test]
    fn standard_curve_involution_series() {
        let m = CurveModel::projective_space(vec![q(0), q(1), q(2)]).unwrap();
        let c = build_curve(&m, CoordinateKind::Standard).unwrap();
        let order = 10;
        let rp = ramification_points(&c, 166, order).unwrap();
        assert_eq!(rp.len(), 2);
        for p in &rp {
            let qz = p.z.to_complex().unwrap();
            let Involution::Series(s) = &p.involution else { panic!() };
            let xs = c.x.expand_at_complex(&qz, order);
            let diff = xs.compose(s).sub(&xs);
            for k in 0..=diff.order() {
                assert!(diff.coeff(k).abs_f64() < 1e-35, "k={} {}", k, diff.coeff(k));
            }
            let twice = s.compose(s);
            for k in 0..=twice.order() {
                let want = if k == 1 { 1.0 } else { 0.0 };
                assert!((twice.coeff(k).abs_f64() - want).abs() < 1e-35);
            }
        }
    }

    #[test]
    fn model_validation() {
        assert!(CurveModel::complete_intersection(vec![q(0)], vec![q(1)]).is_err());
        assert!(CurveModel::projective_space(vec![]).is_err());
        let m = CurveModel::complete_intersection(vec![q(0), qf(1, 2), q(2)], vec![q(5)]).unwrap();
        assert!(build_curve(&m, CoordinateKind::Standard).is_ok());
    }
}
