//! Topological recursion on GKZ spectral curves.
//!
//! Two engines share the same recursion:
//! * an exact one for the `N = 2` coordinates with the global involution
//!   `z -> -z`, where every stable correlator is a Laurent polynomial;
//! * a big-float one for the standard coordinate, working in the local basis
//!   `(z - a)^{-k-2} dz` at each ramification point `a`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde_json::json;
use thiserror::Error;

use crate::curve::{involution_series, ramification_points, CoordinateKind, CurveError, Locus, SpectralCurve};
use crate::exactalg::bigfloat::PrecisionGuard;
use crate::exactalg::scalar::{fmt_scalar, q};
use crate::exactalg::{
    hermite_antiderivative, Antiderivative, BasePoint, BigComplex, Field, MPoly, Polynomial, RationalFunction, Scalar,
    TruncatedSeries,
};
use crate::wkb::Endpoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopRecError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("integral diverges at the reference point: {0}")]
    Divergent(String),
}

/// `p(z) = -x / (2 (y(z) - y(-z)) x'(z))`, the recursion kernel on an
/// involution curve, with the reference point of the integrals.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub p: RationalFunction,
    pub z_star: Endpoint,
}

pub fn kernel(curve: &SpectralCurve) -> Result<Kernel, TopRecError> {
    if !curve.coordinate.has_global_involution() {
        return Err(TopRecError::Unsupported("kernel p(z) needs the global involution z -> -z".into()));
    }
    let dy = &curve.y - &curve.y.reflect();
    let den = &(&dy * &curve.dx()).scale(&q(-2));
    let p = &curve.x / den;
    Ok(Kernel { p, z_star: Endpoint::default_for(curve) })
}

/// `1/(w - sign * z_slot)^order`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Pole {
    slot: usize,
    sign: i32,
    order: u32,
}

fn sgn(c: i32, k: i32) -> Scalar {
    if c < 0 && k.rem_euclid(2) == 1 {
        -Scalar::one()
    } else {
        Scalar::one()
    }
}

/// Terms of `pole` expanded at `w = 0` (degrees `0..=hi`) or `w = infinity`
/// (degrees `lo..=-order`). Variable 0 is `w`.
fn pole_series(nv: usize, pole: Pole, at_inf: bool, lo: i32, hi: i32) -> MPoly<Scalar> {
    let mut out = MPoly::zero(nv);
    let (c, e) = (pole.sign, pole.order as i32);
    let mut k = 0;
    loop {
        let mut ex = vec![0; nv];
        let coef;
        if !at_inf {
            if k > hi {
                break;
            }
            ex[0] = k;
            if e == 1 {
                // -sum w^k a^{-k-1}
                ex[pole.slot] = -k - 1;
                coef = -sgn(c, k + 1);
            } else {
                ex[pole.slot] = -k - 2;
                coef = sgn(c, k) * q(k as i64 + 1);
            }
        } else {
            let d = -k - e;
            if d < lo {
                break;
            }
            ex[0] = d;
            ex[pole.slot] = k;
            coef = if e == 1 { sgn(c, k) } else { sgn(c, k) * q(k as i64 + 1) };
        }
        out.add_term(ex, coef);
        k += 1;
    }
    out
}

/// `1/(w + z_0) + 1/(w - z_0)` with `z_0` in slot 1.
fn kernel_series(nv: usize, at_inf: bool, lo: i32, hi: i32) -> MPoly<Scalar> {
    let mut out = MPoly::zero(nv);
    let mut k = 0;
    loop {
        let mut ex = vec![0; nv];
        if !at_inf {
            if 2 * k + 1 > hi {
                break;
            }
            ex[0] = 2 * k + 1;
            ex[1] = -2 * k - 2;
            out.add_term(ex, q(-2));
        } else {
            if -2 * k - 1 < lo {
                break;
            }
            ex[0] = -2 * k - 1;
            ex[1] = 2 * k;
            out.add_term(ex, q(2));
        }
        k += 1;
    }
    out
}

fn mul_window(a: &MPoly<Scalar>, b: &MPoly<Scalar>, lo: i32, hi: i32) -> MPoly<Scalar> {
    let mut r = MPoly::zero(a.nvars());
    for (e1, c1) in a.terms() {
        for (e2, c2) in b.terms() {
            let d = e1[0] + e2[0];
            if d < lo || d > hi {
                continue;
            }
            r.add_term(e1.iter().zip(e2).map(|(x, y)| x + y).collect(), c1 * c2);
        }
    }
    r
}

/// Coefficient of `w^{-1}` in `a * b`, with variable 0 dropped.
fn residue_of_product(a: &MPoly<Scalar>, b: &MPoly<Scalar>) -> MPoly<Scalar> {
    let mut by_deg: BTreeMap<i32, Vec<(&Vec<i32>, &Scalar)>> = BTreeMap::new();
    for (e, c) in b.terms() {
        by_deg.entry(e[0]).or_default().push((e, c));
    }
    let mut r = MPoly::zero(a.nvars());
    for (e1, c1) in a.terms() {
        if let Some(v) = by_deg.get(&(-1 - e1[0])) {
            for (e2, c2) in v {
                let mut e: Vec<i32> = e1.iter().zip(e2.iter()).map(|(x, y)| x + y).collect();
                e[0] = 0;
                r.add_term(e, c1 * *c2);
            }
        }
    }
    r
}

/// Places a stored correlator into the integrand's variables. `slots[i]` is
/// `(target, flip)`; `flip` substitutes `v -> -v`.
fn embed(p: &MPoly<Scalar>, slots: &[(usize, bool)], nv: usize) -> MPoly<Scalar> {
    let mut r = MPoly::zero(nv);
    for (e, c) in p.terms() {
        let mut ne = vec![0; nv];
        let mut neg = false;
        for (i, &k) in e.iter().enumerate() {
            let (t, flip) = slots[i];
            ne[t] += k;
            if flip && k.rem_euclid(2) == 1 {
                neg = !neg;
            }
        }
        r.add_term(ne, if neg { -c.clone() } else { c.clone() });
    }
    r
}

/// Laurent polynomial in one variable as a rational function.
fn laurent_to_rf(p: &MPoly<Scalar>) -> RationalFunction {
    if p.is_zero() {
        return RationalFunction::zero();
    }
    let lo = p.min_degree_in(0).min(0);
    let mut coeffs = vec![Scalar::zero(); (p.max_degree_in(0) - lo + 1).max(1) as usize];
    for (e, c) in p.terms() {
        coeffs[(e[0] - lo) as usize] += c;
    }
    let num = Polynomial::new(coeffs);
    RationalFunction::new(num, Polynomial::monomial(Scalar::one(), (-lo) as usize)).expect("nonzero")
}

/// Rational function with monomial denominator as a one-variable Laurent polynomial.
fn rf_to_laurent(f: &RationalFunction) -> Option<MPoly<Scalar>> {
    let d = f.den();
    let k = d.deg() as usize;
    if d.coeffs()[..k].iter().any(|c| !c.is_zero()) {
        return None;
    }
    let lc = d.lc();
    let mut out = MPoly::zero(1);
    for (i, c) in f.num().coeffs().iter().enumerate() {
        out.add_term(vec![i as i32 - k as i32], c / &lc);
    }
    Some(out)
}

/// Stable correlators `omega_{g,n}` on an involution curve, as Laurent
/// polynomials in `z_1..z_n` (the coefficient of `dz_1 ... dz_n`).
pub struct ExactRecursion {
    curve: SpectralCurve,
    p: MPoly<Scalar>,
    include_infinity: bool,
    endpoint: Endpoint,
    cache: HashMap<(usize, usize), MPoly<Scalar>>,
}

impl ExactRecursion {
    pub fn new(curve: &SpectralCurve) -> Result<Self, TopRecError> {
        let k = kernel(curve)?;
        let p = rf_to_laurent(&k.p).ok_or_else(|| TopRecError::Unsupported(format!("kernel {} is not a Laurent polynomial", k.p)))?;
        let rp = ramification_points(curve, crate::exactalg::bigfloat::precision(), 4)?;
        let include_infinity = rp.iter().any(|r| matches!(r.z, Locus::Infinity));
        Ok(ExactRecursion { curve: curve.clone(), p, include_infinity, endpoint: k.z_star, cache: HashMap::new() })
    }

    pub fn curve(&self) -> &SpectralCurve {
        &self.curve
    }

    pub fn endpoint(&self) -> &Endpoint {
        &self.endpoint
    }

    /// `omega_{g,n}` for `2g - 2 + n > 0`.
    pub fn correlator(&mut self, g: usize, n: usize) -> Result<MPoly<Scalar>, TopRecError> {
        if n == 0 || 2 * g + n <= 2 {
            return Err(TopRecError::Invalid(format!("(g, n) = ({}, {}) is not stable", g, n)));
        }
        if let Some(c) = self.cache.get(&(g, n)) {
            return Ok(c.clone());
        }
        // Dependencies first, in order of 2g - 2 + n.
        let mut deps = Vec::new();
        if g >= 1 && 2 * (g - 1) + n + 1 > 2 {
            deps.push((g - 1, n + 1));
        }
        for g1 in 0..=g {
            for k in 0..n {
                if 2 * g1 + k + 1 > 2 && (g1, k + 1) != (g, n) {
                    deps.push((g1, k + 1));
                }
            }
        }
        for (dg, dn) in deps {
            self.correlator(dg, dn)?;
        }
        let w = self.compute(g, n - 1);
        self.cache.entry((g, n)).or_insert(w);
        Ok(self.cache[&(g, n)].clone())
    }

    /// `omega_{g, n+1}(z_0, z_1..z_n)`. Integrand slots: 0 = w, 1 = z_0, 2.. = z_1..z_n.
    fn compute(&self, g: usize, n: usize) -> MPoly<Scalar> {
        let nv = n + 2;
        let zslots: Vec<usize> = (2..n + 2).collect();
        let mut bracket: HashMap<Vec<Pole>, MPoly<Scalar>> = HashMap::new();
        let mut push = |poles: Vec<Pole>, l: MPoly<Scalar>| {
            let mut poles = poles;
            poles.sort();
            let e = bracket.entry(poles).or_insert_with(|| MPoly::zero(nv));
            *e = e.add(&l);
        };
        if g >= 1 {
            if g == 1 && n == 0 {
                // B(w, -w) pulled back: -1/(4 w^2)
                let mut ex = vec![0; nv];
                ex[0] = -2;
                push(Vec::new(), MPoly::monomial(nv, ex, Scalar::new((-1).into(), 4.into())));
            } else {
                let mut slots = vec![(0, false), (0, true)];
                slots.extend(zslots.iter().map(|&s| (s, false)));
                push(Vec::new(), embed(&self.cache[&(g - 1, n + 2)], &slots, nv).neg());
            }
        }
        for g1 in 0..=g {
            let g2 = g - g1;
            for mask in 0u32..(1 << n) {
                let left: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| zslots[i]).collect();
                let right: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).map(|i| zslots[i]).collect();
                if (g1 == 0 && left.is_empty()) || (g2 == 0 && right.is_empty()) {
                    continue;
                }
                let (lp, ll) = if g1 == 0 && left.len() == 1 {
                    (vec![Pole { slot: left[0], sign: 1, order: 2 }], MPoly::one(nv))
                } else {
                    let mut slots = vec![(0, false)];
                    slots.extend(left.iter().map(|&s| (s, false)));
                    (Vec::new(), embed(&self.cache[&(g1, left.len() + 1)], &slots, nv))
                };
                let (rp, rl) = if g2 == 0 && right.len() == 1 {
                    (vec![Pole { slot: right[0], sign: -1, order: 2 }], MPoly::one(nv).neg())
                } else {
                    let mut slots = vec![(0, true)];
                    slots.extend(right.iter().map(|&s| (s, false)));
                    (Vec::new(), embed(&self.cache[&(g2, right.len() + 1)], &slots, nv).neg())
                };
                let mut poles = lp;
                poles.extend(rp);
                push(poles, ll.mul(&rl));
            }
        }
        let p = embed(&self.p, &[(0, false)], nv);
        let mut total = MPoly::zero(nv);
        for (poles, l) in &bracket {
            if l.is_zero() {
                continue;
            }
            let pl = p.mul(l);
            // Residue at w = 0.
            let dmin = pl.min_degree_in(0);
            if dmin < 0 {
                let hi = -1 - dmin;
                let mut s = kernel_series(nv, false, 0, hi);
                for &pole in poles {
                    s = mul_window(&s, &pole_series(nv, pole, false, 0, hi), 0, hi);
                }
                total = total.add(&residue_of_product(&pl, &s));
            }
            if self.include_infinity {
                let dmax = pl.max_degree_in(0);
                let lo = -1 - dmax;
                if lo <= -1 {
                    let mut s = kernel_series(nv, true, lo, -1);
                    for &pole in poles {
                        s = mul_window(&s, &pole_series(nv, pole, true, lo, -1), lo, -1);
                    }
                    total = total.sub(&residue_of_product(&pl, &s));
                }
            }
        }
        // Drop the w slot.
        let perm: Vec<usize> = std::iter::once(0).chain(0..n + 1).collect();
        total.permute(&perm, n + 1)
    }

    /// `F_n^{(g)}(z) = int_{z_*}^z ... int_{z_*}^z omega_{g,n}` on the diagonal.
    pub fn free_energy(&mut self, g: usize, n: usize) -> Result<RationalFunction, TopRecError> {
        let w = self.correlator(g, n)?;
        let mut acc = MPoly::zero(1);
        let mut memo: HashMap<i32, MPoly<Scalar>> = HashMap::new();
        for (e, c) in w.terms() {
            let mut t = MPoly::constant(1, c.clone());
            for &k in e {
                if let std::collections::hash_map::Entry::Vacant(e) = memo.entry(k) {
                    e.insert(self.integrate_power(k)?);
                }
                t = t.mul(&memo[&k]);
            }
            acc = acc.add(&t);
        }
        Ok(laurent_to_rf(&acc))
    }

    /// `int_{z_*}^z u^k du` as a Laurent polynomial in `z`.
    fn integrate_power(&self, k: i32) -> Result<MPoly<Scalar>, TopRecError> {
        if k == -1 {
            return Err(TopRecError::Divergent("logarithmic term in a stable correlator".into()));
        }
        let inv = Scalar::new(1.into(), (k + 1).into());
        let mut r = MPoly::monomial(1, vec![k + 1], inv.clone());
        match &self.endpoint {
            Endpoint::Infinity => {
                if k + 1 > 0 {
                    return Err(TopRecError::Divergent(format!("z^{} at z = infinity", k)));
                }
            }
            Endpoint::At(a) => {
                if a.is_zero() && k + 1 < 0 {
                    return Err(TopRecError::Divergent(format!("z^{} at z = 0", k)));
                }
                let v = a.fpowi((k + 1).unsigned_abs());
                let v = if k + 1 < 0 { Scalar::one() / v } else { v };
                r.add_term(vec![0], -(v * inv));
            }
        }
        Ok(r)
    }

    /// Reorganized wave-function terms `F_m`, `m = 0..=m_max`.
    pub fn wavefunction(&mut self, m_max: usize) -> Result<Vec<FreeEnergyTerm>, TopRecError> {
        let curve = self.curve.clone();
        let d0 = &(&curve.y * &curve.dx()) / &curve.x;
        let mut out = vec![FreeEnergyTerm { m: 0, derivative: d0.clone(), value: hermite_antiderivative(&d0).ok() }];
        if m_max >= 1 {
            out.push(f1_term(&self.endpoint));
        }
        for m in 2..=m_max {
            let mut acc = RationalFunction::zero();
            for g in 0..=m.div_ceil(2) {
                if 2 * g > m + 1 {
                    break;
                }
                let n = m + 1 - 2 * g;
                if n == 0 {
                    continue;
                }
                let f = self.free_energy(g, n)?;
                let fact = crate::exactalg::scalar::factorial(n as u64);
                acc = &acc + &f.scale(&Scalar::new(1.into(), fact));
            }
            out.push(FreeEnergyTerm {
                m,
                derivative: acc.derivative(),
                value: Some(Antiderivative { rational: acc, logs: Vec::new() }),
            });
        }
        Ok(out)
    }
}

/// `F_1 = F_2^{(0)}(z, z) / 2` with the regularized Bergman kernel `dz_1 dz_2 / (z_1 + z_2)^2`.
fn f1_term(z_star: &Endpoint) -> FreeEnergyTerm {
    let half = Scalar::new(1.into(), 2.into());
    match z_star {
        Endpoint::Infinity => FreeEnergyTerm {
            m: 1,
            derivative: RationalFunction::pole(&Scalar::zero(), 1).scale(&-half.clone()),
            value: Some(Antiderivative { rational: RationalFunction::zero(), logs: vec![(-half, Polynomial::z())] }),
        },
        Endpoint::At(a) => {
            let zp = Polynomial::new(vec![a.clone(), Scalar::one()]);
            let d = &RationalFunction::pole(&-a.clone(), 1) - &RationalFunction::pole(&Scalar::zero(), 1).scale(&half);
            FreeEnergyTerm {
                m: 1,
                derivative: d,
                value: Some(Antiderivative { rational: RationalFunction::zero(), logs: vec![(-half, Polynomial::z()), (Scalar::one(), zp)] }),
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct FreeEnergyTerm {
    pub m: usize,
    pub derivative: RationalFunction,
    pub value: Option<Antiderivative>,
}

impl FreeEnergyTerm {
    pub fn to_json(&self) -> serde_json::Value {
        match &self.value {
            Some(a) => json!({"m": self.m, "rational": a.rational.to_json(), "logs": a.logs.iter().map(|(c, p)| json!([fmt_scalar(c), p.to_json()])).collect::<Vec<_>>()}),
            None => json!({"m": self.m, "derivative": self.derivative.to_json()}),
        }
    }
}

/// `{"g", "n", "num", "den"}` with the common denominator `prod z_i^k`.
pub fn correlator_json(g: usize, n: usize, w: &MPoly<Scalar>) -> serde_json::Value {
    let k = (0..n).map(|i| -w.min_degree_in(i)).max().unwrap_or(0).max(0);
    let shift = vec![k; n];
    json!({
        "g": g,
        "n": n,
        "num": w.shift(&shift).to_json(),
        "den": {"power": k, "variables": n},
    })
}

/// `dF_m/dz`, `m = 0..=m_max`, from the closed recursion in `p(z)`.
///
/// `F_2` is seeded separately: the generic step counts the diagonal
/// product `F_1' F_1'` twice.
pub fn fm_recursion(curve: &SpectralCurve, m_max: usize) -> Result<Vec<RationalFunction>, TopRecError> {
    if m_max < 2 {
        return Err(TopRecError::Invalid("fm_recursion needs m_max >= 2".into()));
    }
    let k = kernel(curve)?;
    let p = &k.p;
    let dp = p.derivative();
    // 2p' - 4 z_* p / (z^2 - z_*^2); the second term drops for z_* = infinity.
    let c2 = match &k.z_star {
        Endpoint::Infinity => dp.scale(&q(2)),
        Endpoint::At(a) => {
            let den = RationalFunction::from_poly(Polynomial::new(vec![-(a * a), Scalar::zero(), Scalar::one()]));
            &dp.scale(&q(2)) - &(p / &den).scale(&(q(4) * a))
        }
    };
    let two_p = p.scale(&q(2));
    let mut d = vec![&(&curve.y * &curve.dx()) / &curve.x, f1_term(&k.z_star).derivative];
    // F_2
    let f1 = d[1].clone();
    d.push(&(&two_p * &(&f1.derivative() - &(&f1 * &f1))) + &(&c2 * &f1));
    for m in 2..m_max {
        let mut inner = d[m].derivative();
        for a in 2..m {
            let b = m + 1 - a;
            if b >= 2 {
                inner = &inner + &(&d[a] * &d[b]);
            }
        }
        d.push(&(&two_p * &inner) + &(&c2 * &d[m]));
    }
    Ok(d)
}

/// Local data at one finite ramification point.
struct LocalPoint {
    a: BigComplex,
    /// `sigma(a + t) - a`, valuation exactly 1.
    s: TruncatedSeries<BigComplex>,
    ds: TruncatedSeries<BigComplex>,
    /// `2 (t - s(t)) x'/x`, valuation exactly 2 (for `y = z`).
    den: TruncatedSeries<BigComplex>,
}

/// Key: per variable, `(point index, k)` for `(z - a)^{-k-2}`.
type BasisKey = Vec<(u16, u16)>;
type BasisForm = HashMap<BasisKey, BigComplex>;

/// Big-float recursion for coordinates with `y = z + const`, residues at
/// the finite simple zeros of `dx`.
pub struct NumericRecursion {
    curve: SpectralCurve,
    bits: usize,
    order: i64,
    points: Vec<LocalPoint>,
    cache: HashMap<(usize, usize), BasisForm>,
}

fn series_from(coeffs: Vec<BigComplex>, min_exp: i64, order: i64) -> TruncatedSeries<BigComplex> {
    TruncatedSeries::new(BasePoint::Infinity, min_exp, coeffs, order)
}

fn binom_neg(m: i64, j: i64) -> Scalar {
    // binomial(-m, j)
    let mut r = Scalar::one();
    for i in 0..j {
        r = r * q(-m - i) / q(i + 1);
    }
    r
}

impl NumericRecursion {
    /// `chi_max` bounds `2g - 2 + n` of the correlators that will be requested.
    pub fn new(curve: &SpectralCurve, chi_max: usize, bits: usize) -> Result<Self, TopRecError> {
        let _g = PrecisionGuard::new(bits);
        if curve.y.derivative() != RationalFunction::one() {
            return Err(TopRecError::Unsupported("numeric recursion expects y = z + const".into()));
        }
        let rp = ramification_points(curve, bits, 2)?;
        if rp.iter().any(|r| matches!(r.z, Locus::Infinity)) {
            return Err(TopRecError::Unsupported("ramification at infinity".into()));
        }
        let order = 4 * (3 * chi_max as i64 + 4) + 8;
        let xs = &curve.dx() / &curve.x;
        let mut points = Vec::new();
        for r in &rp {
            let a = r.z.to_complex().expect("finite");
            let s = match curve.coordinate {
                CoordinateKind::Standard => involution_series(&curve.x, &a, order + 2),
                _ => series_from(vec![BigComplex::zero(), BigComplex::one().neg()], 0, order + 2),
            };
            let s = series_from((1..=order + 2).map(|k| s.coeff(k)).collect(), 1, order + 2);
            let ds = s.derivative();
            let t = series_from(vec![BigComplex::one()], 1, order + 2);
            let tms = t.sub(&s);
            let l = xs.expand_at_complex(&a, order + 2);
            // x'(a) = 0: drop the rounding residue of the constant term.
            let l = series_from((1..=order + 2).map(|k| l.coeff(k)).collect(), 1, order + 2);
            let den = tms.mul(&l).scale(&BigComplex::from_i64(2));
            let den = series_from((2..=den.order()).map(|k| den.coeff(k)).collect(), 2, den.order());
            points.push(LocalPoint { a, s, ds, den });
        }
        Ok(NumericRecursion { curve: curve.clone(), bits, order, points, cache: HashMap::new() })
    }

    pub fn ramification_points(&self) -> Vec<BigComplex> {
        self.points.iter().map(|p| p.a.clone()).collect()
    }

    /// `(a + u - b)^{-m}` as a series in `u`, where `u` is `t` or `s(t)`.
    fn local_power(&self, ip: usize, b: usize, m: i64, sigma: bool) -> TruncatedSeries<BigComplex> {
        let pt = &self.points[ip];
        let ord = self.order;
        if ip == b {
            if sigma {
                pt.s.powi(-m).expect("s has valuation one").truncate(ord)
            } else {
                series_from(vec![BigComplex::one()], -m, ord)
            }
        } else {
            let d = pt.a.sub(&self.points[b].a);
            let inv = BigComplex::one().div(&d);
            let base = inv.fpowi(m as u32);
            let mut c = Vec::new();
            let mut p = base;
            for j in 0..=ord + m {
                c.push(p.mul(&BigComplex::from_scalar(&binom_neg(m, j))));
                p = p.mul(&inv);
            }
            let taylor = series_from(c, 0, ord + m);
            if sigma {
                taylor.compose(&pt.s).truncate(ord)
            } else {
                taylor.truncate(ord)
            }
        }
    }

    /// Expands a stored correlator at point `ip` in its first `first` variables
    /// (`w`, then optionally `sigma(w)`), leaving the rest in the basis.
    fn expand(&self, ip: usize, form: &BasisForm, sigmas: &[bool]) -> HashMap<BasisKey, TruncatedSeries<BigComplex>> {
        let mut out: HashMap<BasisKey, TruncatedSeries<BigComplex>> = HashMap::new();
        let mut memo: HashMap<(usize, u16, bool), TruncatedSeries<BigComplex>> = HashMap::new();
        for (key, c) in form {
            let mut ser = series_from(vec![c.clone()], 0, self.order);
            for (i, &sig) in sigmas.iter().enumerate() {
                let (b, k) = key[i];
                let f = memo
                    .entry((b as usize, k, sig))
                    .or_insert_with(|| self.local_power(ip, b as usize, k as i64 + 2, sig))
                    .clone();
                ser = ser.mul(&f);
            }
            for &sig in sigmas {
                if sig {
                    ser = ser.mul(&self.points[ip].ds);
                }
            }
            let rest: BasisKey = key[sigmas.len()..].to_vec();
            match out.get_mut(&rest) {
                Some(e) => *e = e.add(&ser),
                None => {
                    out.insert(rest, ser);
                }
            }
        }
        out
    }

    /// `B(w, z)` or the pulled-back `B(sigma(w), z)` at point `ip`, in the basis of `z`.
    fn bergman(&self, ip: usize, sigma: bool) -> Vec<TruncatedSeries<BigComplex>> {
        let pt = &self.points[ip];
        let ord = self.order;
        let u = if sigma { pt.s.clone() } else { series_from(vec![BigComplex::one()], 1, ord) };
        let mut out = Vec::new();
        let mut upow = series_from(vec![BigComplex::one()], 0, ord);
        for k in 0..=ord {
            let mut t = upow.scale(&BigComplex::from_i64(k + 1));
            if sigma {
                t = t.mul(&pt.ds);
            }
            out.push(t.truncate(ord));
            upow = upow.mul(&u).truncate(ord);
        }
        out
    }

    /// `omega_{g,n}`, stable.
    pub fn correlator(&mut self, g: usize, n: usize) -> Result<BasisForm, TopRecError> {
        if n == 0 || 2 * g + n <= 2 {
            return Err(TopRecError::Invalid(format!("(g, n) = ({}, {}) is not stable", g, n)));
        }
        if let Some(c) = self.cache.get(&(g, n)) {
            return Ok(c.clone());
        }
        if g >= 1 && 2 * (g - 1) + n + 1 > 2 {
            self.correlator(g - 1, n + 1)?;
        }
        for g1 in 0..=g {
            for k in 0..n {
                if 2 * g1 + k + 1 > 2 && (g1, k + 1) != (g, n) {
                    self.correlator(g1, k + 1)?;
                }
            }
        }
        let _guard = PrecisionGuard::new(self.bits);
        let w = self.compute(g, n - 1);
        self.cache.entry((g, n)).or_insert(w);
        Ok(self.cache[&(g, n)].clone())
    }

    fn compute(&self, g: usize, n: usize) -> BasisForm {
        let mut result: BasisForm = HashMap::new();
        let ord = self.order;
        for ip in 0..self.points.len() {
            // Bracket: basis key over z_1..z_n -> series in t.
            let mut br: HashMap<BasisKey, TruncatedSeries<BigComplex>> = HashMap::new();
            let mut add = |key: BasisKey, s: TruncatedSeries<BigComplex>| match br.get_mut(&key) {
                Some(e) => *e = e.add(&s),
                None => {
                    br.insert(key, s);
                }
            };
            let bw = self.bergman(ip, false);
            let bs = self.bergman(ip, true);
            if g >= 1 {
                if g == 1 && n == 0 {
                    let pt = &self.points[ip];
                    let t = series_from(vec![BigComplex::one()], 1, ord + 4);
                    let d = t.sub(&pt.s);
                    let d2 = d.mul(&d);
                    let v = pt.ds.div(&d2).expect("nonzero").truncate(ord);
                    add(Vec::new(), v);
                } else {
                    let e = self.expand(ip, &self.cache[&(g - 1, n + 2)], &[false, true]);
                    for (k, s) in e {
                        add(k, s);
                    }
                }
            }
            for g1 in 0..=g {
                let g2 = g - g1;
                for mask in 0u32..(1 << n) {
                    let left: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                    let right: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
                    if (g1 == 0 && left.is_empty()) || (g2 == 0 && right.is_empty()) {
                        continue;
                    }
                    // Each side as (variables covered, map key -> series).
                    let side = |gg: usize, vars: &[usize], sigma: bool| -> Vec<(BasisKey, TruncatedSeries<BigComplex>)> {
                        if gg == 0 && vars.len() == 1 {
                            let b = if sigma { &bs } else { &bw };
                            b.iter().enumerate().map(|(k, s)| (vec![(ip as u16, k as u16)], s.clone())).collect()
                        } else {
                            self.expand(ip, &self.cache[&(gg, vars.len() + 1)], &[sigma]).into_iter().collect()
                        }
                    };
                    let ls = side(g1, &left, false);
                    let rs = side(g2, &right, true);
                    for (lk, lser) in &ls {
                        for (rk, rser) in &rs {
                            let prod = lser.mul(rser);
                            if prod.order() < 0 {
                                continue;
                            }
                            let mut key = vec![(0u16, 0u16); n];
                            for (i, &v) in left.iter().enumerate() {
                                key[v] = lk[i];
                            }
                            for (i, &v) in right.iter().enumerate() {
                                key[v] = rk[i];
                            }
                            add(key, prod);
                        }
                    }
                }
            }
            // Kernel coefficients c_k(t) = (t^{k+1} - s^{k+1}) / den.
            let pt = &self.points[ip];
            let maxpole = br.values().filter_map(|s| s.normalized().valuation()).map(|v| -v).max().unwrap_or(-1);
            // c_0 has a simple pole, so a bracket regular at t = 0 still contributes.
            if maxpole < 0 {
                continue;
            }
            let t = series_from(vec![BigComplex::one()], 1, ord + 4);
            let mut tp = t.clone();
            let mut sp = pt.s.clone();
            for k in 0..=maxpole {
                let num = tp.sub(&sp);
                let ck = num.div(&pt.den).expect("den valuation two");
                for (key, s) in &br {
                    let mut acc = BigComplex::zero();
                    let lo = s.min_exp();
                    for j in (k - 1)..=(-1 - lo) {
                        if j > ck.order() || -1 - j > s.order() {
                            continue;
                        }
                        acc = acc.add(&ck.coeff(j).mul(&s.coeff(-1 - j)));
                    }
                    if acc.is_zero() {
                        continue;
                    }
                    let mut full = vec![(ip as u16, k as u16)];
                    full.extend_from_slice(key);
                    let e = result.entry(full).or_insert_with(BigComplex::zero);
                    *e = e.add(&acc);
                }
                tp = tp.mul(&t);
                sp = sp.mul(&pt.s);
            }
        }
        result
    }

    /// `F_n^{(g)}(z)` on the diagonal with reference point `z = infinity`.
    pub fn free_energy_at(&mut self, g: usize, n: usize, z: &BigComplex) -> Result<BigComplex, TopRecError> {
        let w = self.correlator(g, n)?;
        let _guard = PrecisionGuard::new(self.bits);
        let prim: Vec<Vec<BigComplex>> = self
            .points
            .iter()
            .map(|p| {
                let u = z.sub(&p.a);
                let inv = BigComplex::one().div(&u);
                let mut v = Vec::new();
                let mut pw = inv.clone();
                for k in 0..(self.order as usize) {
                    // int_inf^z (u - a)^{-k-2} = -(z - a)^{-k-1}/(k+1)
                    v.push(pw.mul(&BigComplex::from_scalar(&Scalar::new((-1).into(), (k as i64 + 1).into()))));
                    pw = pw.mul(&inv);
                }
                v
            })
            .collect();
        let mut acc = BigComplex::zero();
        for (key, c) in &w {
            let mut t = c.clone();
            for &(ip, k) in key {
                t = t.mul(&prim[ip as usize][k as usize]);
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// `F_m(z)` for `2 <= m`, reference point `z = infinity`.
    pub fn fm_at(&mut self, m: usize, z: &BigComplex) -> Result<BigComplex, TopRecError> {
        if m < 2 {
            return Err(TopRecError::Invalid("numeric F_m for m >= 2 only".into()));
        }
        let mut acc = BigComplex::zero();
        for g in 0..=m.div_ceil(2) {
            let n = m + 1 - 2 * g;
            if n == 0 {
                continue;
            }
            let f = self.free_energy_at(g, n, z)?;
            let fact = crate::exactalg::scalar::factorial(n as u64);
            let _guard = PrecisionGuard::new(self.bits);
            acc = acc.add(&f.div(&BigComplex::from_scalar(&Scalar::from_integer(fact))));
        }
        Ok(acc)
    }

    pub fn curve(&self) -> &SpectralCurve {
        &self.curve
    }

    /// Evaluates `omega_{g,n}` at a point (coefficient of `dz_1 ... dz_n`).
    pub fn eval_correlator(&mut self, g: usize, n: usize, zs: &[BigComplex]) -> Result<BigComplex, TopRecError> {
        let w = self.correlator(g, n)?;
        let _guard = PrecisionGuard::new(self.bits);
        let mut acc = BigComplex::zero();
        for (key, c) in &w {
            let mut t = c.clone();
            for (i, &(ip, k)) in key.iter().enumerate() {
                let u = zs[i].sub(&self.points[ip as usize].a);
                t = t.div(&u.fpowi(k as u32 + 2));
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_curve, CurveModel};
    use crate::exactalg::scalar::qf;

    fn cp1(w0: i64, w1: i64) -> SpectralCurve {
        let m = CurveModel::projective_space(vec![q(w0), q(w1)]).unwrap();
        build_curve(&m, CoordinateKind::Cp1Sqrt).unwrap()
    }

    #[test]
    fn kernel_cp1() {
        let k = kernel(&cp1(1, 0)).unwrap();
        // -(z^2 - 1/4) / (8 z^2)
        let e = RationalFunction::new(Polynomial::new(vec![qf(1, 4), q(0), q(-1)]), Polynomial::new(vec![q(0), q(0), q(8)])).unwrap();
        assert_eq!(k.p, e);
    }

    #[test]
    fn omega_11_cp1() {
        let mut r = ExactRecursion::new(&cp1(1, 0)).unwrap();
        let w = r.correlator(1, 1).unwrap();
        // (Lambda - z^2)/(16 z^4), Lambda = 1/4
        let mut e = MPoly::zero(1);
        e.add_term(vec![-4], qf(1, 64));
        e.add_term(vec![-2], qf(-1, 16));
        assert_eq!(w, e);
    }

    #[test]
    fn omega_03_symmetric() {
        let mut r = ExactRecursion::new(&cp1(2, -1)).unwrap();
        let w = r.correlator(0, 3).unwrap();
        assert!(!w.is_zero());
        assert_eq!(w.permute(&[1, 0, 2], 3), w);
        assert_eq!(w.permute(&[0, 2, 1], 3), w);
    }
}
