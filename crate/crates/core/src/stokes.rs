//! Exact-WKB data for the equivariant projective line: Schrödinger form,
//! Riccati hierarchy, Voros coefficient, Stokes graphs, Stokes events and the
//! total Stokes matrices.
//!
//! Curves are traced on the double cover `s^2 = 4x + d^2` (`d = w0 - w1`),
//! where `sqrt(Q0) = s / (2x)` is single valued. Points of the first sheet have
//! `s -> d` as `x -> 0`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use serde_json::json;
use thiserror::Error;

use crate::exactalg::scalar::{fmt_scalar, to_f64};
use crate::exactalg::{Polynomial, RationalFunction, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StokesError {
    #[error("turning point coalesces with the pole: w0 = w1")]
    Coalescent,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("step size collapsed at x = {0}")]
    StepCollapse(String),
    #[error("infinite product diverges: |exp(-V)| = {0}")]
    Divergent(f64),
}

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// `(hbar^2 d^2/dx^2 - Q0 - hbar^2 Q2) phi = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchroedingerData {
    pub w0: Scalar,
    pub w1: Scalar,
    pub q0: RationalFunction,
    pub q2: RationalFunction,
    /// The turning point `-(w0 - w1)^2 / 4`.
    pub v: Scalar,
}

impl SchroedingerData {
    pub fn d(&self) -> Scalar {
        &self.w0 - &self.w1
    }

    fn d_f64(&self) -> f64 {
        to_f64(&self.d())
    }

    fn v_c(&self) -> C {
        c(to_f64(&self.v), 0.0)
    }

    /// The first-sheet lift of `x`.
    pub fn first_sheet(&self, x: C) -> C {
        let d = self.d_f64();
        let s = (4.0 * x + d * d).sqrt();
        if d > 0.0 { s } else { -s }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "w0": fmt_scalar(&self.w0), "w1": fmt_scalar(&self.w1),
            "Q0": self.q0.to_json(), "Q2": self.q2.to_json(), "v": fmt_scalar(&self.v),
        })
    }
}

pub fn schroedinger_form(w0: &Scalar, w1: &Scalar) -> Result<SchroedingerData, StokesError> {
    if w0 == w1 {
        return Err(StokesError::Coalescent);
    }
    let d = w0 - w1;
    let d2 = &d * &d;
    let four = Scalar::from_integer(4.into());
    let q0 = RationalFunction::new(Polynomial::new(vec![d2.clone(), four.clone()]), Polynomial::monomial(four.clone(), 2)).expect("nonzero");
    let q2 = RationalFunction::new(Polynomial::constant(-Scalar::one()), Polynomial::monomial(four.clone(), 2)).expect("nonzero");
    Ok(SchroedingerData { w0: w0.clone(), w1: w1.clone(), q0, q2, v: -d2 / four })
}

/// `P_n^{(+)}` as rational functions of `z` on `x = z^2 - Lambda`, `sqrt(Q0) = z/(z^2 - Lambda)`.
/// The first sheet is `z -> d/2` at `x = 0`, and `P^{(-)}_n(z) = P^{(+)}_n(-z)`.
#[derive(Clone, Debug)]
pub struct RiccatiExpansion {
    pub lambda: Scalar,
    /// The first-sheet preimage of `x = 0`.
    pub z0: Scalar,
    pub p_plus: Vec<RationalFunction>,
    pub p_minus: Vec<RationalFunction>,
}

impl RiccatiExpansion {
    pub fn p_odd(&self, n: usize) -> RationalFunction {
        (&self.p_plus[n] - &self.p_minus[n]).scale(&Scalar::new(1.into(), 2.into()))
    }

    pub fn p_even(&self, n: usize) -> RationalFunction {
        (&self.p_plus[n] + &self.p_minus[n]).scale(&Scalar::new(1.into(), 2.into()))
    }

    fn x(&self) -> RationalFunction {
        RationalFunction::from_poly(Polynomial::new(vec![-self.lambda.clone(), Scalar::zero(), Scalar::one()]))
    }

    /// `Res_{x=0} f dx` on the first sheet.
    pub fn residue_at_origin(&self, f: &RationalFunction) -> Scalar {
        (f * &self.x().derivative()).residue(&self.z0)
    }

    /// The order of `P_n` at `x = infinity`, counted in powers of `x` (half-integers allowed).
    pub fn decay_at_infinity(&self, n: usize) -> Scalar {
        Scalar::new(self.p_plus[n].degree().into(), 2.into())
    }

    /// `P_even + (1/2) d log P_odd / dx`, order by order in `hbar`; all zero when the identity holds.
    pub fn even_odd_residuals(&self) -> Vec<RationalFunction> {
        let n = self.p_plus.len();
        let dx = self.x().derivative();
        let d = |f: &RationalFunction| &f.derivative() / &dx;
        let odd: Vec<RationalFunction> = (0..n).map(|k| self.p_odd(k)).collect();
        // log P_odd = log O_0 + log(1 + sum_{k>=1} hbar^k O_k/O_0); derivative via the series ratio
        let inv0 = odd[0].recip().expect("P_0 nonzero");
        let r: Vec<RationalFunction> = odd.iter().map(|o| o * &inv0).collect();
        // L = log(1 + sum r_k hbar^k): L' = (sum r_k' hbar^k) / (1 + sum r_k hbar^k)
        let mut quotient: Vec<RationalFunction> = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = if j == 0 { RationalFunction::zero() } else { d(&r[j]) };
            for i in 1..=j {
                acc = &acc - &(&r[i] * &quotient[j - i]);
            }
            quotient.push(acc);
        }
        let log0 = &d(&odd[0]) * &inv0;
        (0..n.saturating_sub(1))
            .map(|j| {
                let lj = if j == 0 { &log0 + &quotient[0] } else { quotient[j].clone() };
                &self.p_even(j + 1) + &lj.scale(&Scalar::new(1.into(), 2.into()))
            })
            .collect()
    }
}

/// Riccati hierarchy with `P_0 = z/x`; the first sheet is `z = d/2` at `x = 0`.
pub fn riccati_expand(data: &SchroedingerData, n_max: usize) -> Result<RiccatiExpansion, StokesError> {
    if n_max < 2 {
        return Err(StokesError::Invalid("need n_max >= 2".into()));
    }
    let d = data.d();
    let lambda = &d * &d / Scalar::from_integer(4.into());
    let zpoly = Polynomial::z();
    let x = RationalFunction::from_poly(Polynomial::new(vec![-lambda.clone(), Scalar::zero(), Scalar::one()]));
    let dx = x.derivative();
    let q2 = data.q2.compose(&x);
    let p0 = &RationalFunction::from_poly(zpoly) / &x;
    let mut p = vec![p0.clone()];
    let half_inv_p0 = p0.scale(&Scalar::from_integer(2.into())).recip().expect("nonzero");
    for n in 0..n_max {
        let mut rhs = if n == 1 { q2.clone() } else { RationalFunction::zero() };
        for n1 in 1..=n {
            let n2 = n + 1 - n1;
            if n2 >= 1 && n2 <= n {
                rhs = &rhs - &(&p[n1] * &p[n2]);
            }
        }
        rhs = &rhs - &(&p[n].derivative() / &dx);
        p.push(&rhs * &half_inv_p0);
    }
    let neg = RationalFunction::from_poly(Polynomial::new(vec![Scalar::zero(), -Scalar::one()]));
    let p_minus = p.iter().map(|f| f.compose(&neg)).collect();
    let z0 = &d / Scalar::from_integer(2.into());
    Ok(RiccatiExpansion { lambda, z0, p_plus: p, p_minus })
}

/// `V = 2 pi i coefficient / hbar`; `higher_orders_vanish` is read off the Riccati residues.
#[derive(Clone, Debug, PartialEq)]
pub struct VorosCoefficient {
    pub coefficient: Scalar,
    pub higher_orders_vanish: bool,
    pub checked_through: usize,
}

impl VorosCoefficient {
    pub fn value(&self, hbar: C) -> C {
        c(0.0, 2.0 * PI * to_f64(&self.coefficient)) / hbar
    }
}

/// The `gamma_0 - sigma_* gamma_0` period of `P_odd dx` is `2 * 2 pi i Res_{x=0}`.
pub fn voros_coefficient(w0: &Scalar, w1: &Scalar, n_max: usize) -> Result<VorosCoefficient, StokesError> {
    let data = schroedinger_form(w0, w1)?;
    let r = riccati_expand(&data, n_max.max(2))?;
    let two = Scalar::from_integer(2.into());
    let coefficient = r.residue_at_origin(&r.p_odd(0)) * &two;
    let higher_orders_vanish = (1..r.p_plus.len()).all(|n| r.residue_at_origin(&r.p_odd(n)).is_zero());
    Ok(VorosCoefficient { coefficient, higher_orders_vanish, checked_through: r.p_plus.len() - 1 })
}

/// Adaptive Dormand-Prince 5(4) for a complex scalar ODE. `observe` may stop the
/// integration by returning `false`.
fn dopri<F, O>(f: F, t0: f64, y0: C, t1: f64, tol: f64, h0: f64, mut observe: O) -> Result<(f64, C), StokesError>
where
    F: Fn(f64, C) -> C,
    O: FnMut(f64, C) -> bool,
{
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const CS: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const E: [f64; 7] = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
    let dir = (t1 - t0).signum();
    let (mut t, mut y) = (t0, y0);
    let mut h = h0.abs().min((t1 - t0).abs()) * dir;
    let mut steps = 0usize;
    while (t1 - t) * dir > 1e-15 {
        steps += 1;
        if steps > 2_000_000 {
            return Err(StokesError::StepCollapse(format!("{} (step budget)", y)));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k = [C::zero(); 7];
        k[0] = f(t, y);
        for i in 1..7 {
            let mut yi = y;
            for j in 0..i {
                yi += k[j] * (A[i - 1][j] * h);
            }
            k[i] = f(t + CS[i] * h, yi);
        }
        let y5 = y + (0..6).fold(C::zero(), |acc, j| acc + k[j] * (A[5][j] * h));
        let err = (0..7).fold(C::zero(), |acc, j| acc + k[j] * (E[j] * h)).norm();
        let scale = tol * (1.0 + y.norm().max(y5.norm()));
        if !err.is_finite() || err > scale {
            let fac = if err.is_finite() { (0.9 * (scale / err).powf(0.2)).clamp(0.1, 0.5) } else { 0.1 };
            h *= fac;
            if h.abs() < 1e-14 * (1.0 + t.abs()) {
                return Err(StokesError::StepCollapse(format!("{}", y)));
            }
            continue;
        }
        t += h;
        y = y5;
        if !observe(t, y) {
            break;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    Ok((t, y))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    pub tol: f64,
    /// Arc length cap, as a multiple of `|v|`.
    pub max_arc: f64,
    pub pole_buffer: f64,
    /// A curve closer than this to the turning point, after leaving it, is a saddle connection.
    pub saddle_tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { tol: 1e-10, max_arc: 50.0, pole_buffer: 1e-3, saddle_tol: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SaddleKind {
    Loop,
    Segment,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaddleConnection {
    pub kind: SaddleKind,
    pub winding_around_origin: i64,
    pub curve: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveEnd {
    Pole,
    ArcLength,
    TurningPoint,
}

#[derive(Clone, Debug)]
pub struct StokesCurve {
    /// Samples in the `x` plane.
    pub points: Vec<C>,
    /// The matching lifts `s = 2 x sqrt(Q0)`.
    pub lifts: Vec<C>,
    /// `+1` when `e^{-i theta} int_v^x sqrt(Q0) dx` grows positive along the curve.
    pub sign: f64,
    pub end: CurveEnd,
    /// Smallest `|x - v|` after the curve has left the turning point.
    pub min_return: f64,
    pub winding: f64,
}

#[derive(Clone, Debug)]
pub struct StokesGraph {
    pub theta: f64,
    pub turning_points: Vec<C>,
    pub curves: Vec<StokesCurve>,
    pub saddle_connections: Vec<SaddleConnection>,
}

/// `int_0^s t^2/(t^2 - d^2) dt` as `s + (d/2) log((s-d)/(s+d)) - i pi d/2` with principal logs.
fn primitive(s: C, d: f64) -> C {
    s + 0.5 * d * (((s - d) / (s + d)).ln() - c(0.0, PI))
}

fn unit(z: C) -> C {
    z / z.norm()
}

/// Traces the three Stokes curves of phase `theta` from the turning point.
pub fn trace_stokes_graph(data: &SchroedingerData, theta: f64, opts: &TraceOptions) -> Result<StokesGraph, StokesError> {
    let d = data.d_f64();
    let v = data.v_c();
    let e = C::from_polar(1.0, theta);
    let max_arc = opts.max_arc * v.norm();
    let mut curves = Vec::new();
    let mut saddles = Vec::new();
    for j in 0..3 {
        // near s = 0, u ~ -s^3/(3 d^2); the curve has u = sign * t * e^{i theta}, t > 0
        let phase = (theta + PI) / 3.0 + 2.0 * PI * j as f64 / 3.0;
        let s_start = C::from_polar(1e-3 * d.abs().max(1e-3), phase);
        let sign = 1.0;
        let field = |_l: f64, s: C| -> C {
            let h = e * sign * (s * s - d * d) / (s * s);
            // unit speed in x: |dx| = |s/2| |ds|
            unit(h) / (0.5 * s.norm()).max(1e-300)
        };
        let mut points = vec![(s_start * s_start - d * d) / 4.0];
        let mut lifts = vec![s_start];
        let mut end = CurveEnd::ArcLength;
        let mut min_return = f64::INFINITY;
        let mut left = false;
        let mut winding = 0.0;
        let mut last_x = points[0];
        let res = dopri(field, 0.0, s_start, max_arc, opts.tol, 1e-4, |_, s| {
            let x = (s * s - d * d) / 4.0;
            winding += (x / last_x).arg();
            last_x = x;
            points.push(x);
            lifts.push(s);
            let dist = (x - v).norm();
            if !left && dist > 0.5 * v.norm() {
                left = true;
            }
            if left {
                min_return = min_return.min(dist);
                if dist < opts.saddle_tol {
                    end = CurveEnd::TurningPoint;
                    return false;
                }
            }
            if x.norm() < opts.pole_buffer {
                end = CurveEnd::Pole;
                return false;
            }
            true
        });
        match res {
            Ok(_) => {}
            // a collapse right at the turning point is the saddle connection itself
            Err(StokesError::StepCollapse(_)) if left && min_return < 1e3 * opts.saddle_tol => end = CurveEnd::TurningPoint,
            Err(err) => return Err(err),
        }
        if end == CurveEnd::TurningPoint {
            let w = (winding / (2.0 * PI)).round() as i64;
            saddles.push(SaddleConnection { kind: if w != 0 { SaddleKind::Loop } else { SaddleKind::Segment }, winding_around_origin: w, curve: j });
        }
        curves.push(StokesCurve { points, lifts, sign, end, min_return, winding: winding / (2.0 * PI) });
    }
    Ok(StokesGraph { theta, turning_points: vec![v], curves, saddle_connections: saddles })
}

impl StokesGraph {
    /// Largest `|Im(e^{-i theta} int_v^x sqrt(Q0) dx)|` over all samples, with the
    /// logarithm continued along each curve.
    pub fn level_defect(&self, d: f64) -> f64 {
        let e = C::from_polar(1.0, -self.theta);
        let mut worst: f64 = 0.0;
        for curve in &self.curves {
            // at the turning point the log sits at +i pi, so u(v) = 0
            let mut prev_im = PI;
            for &s in &curve.lifts {
                let mut lg = ((s - d) / (s + d)).ln();
                lg.im += 2.0 * PI * ((prev_im - lg.im) / (2.0 * PI)).round();
                prev_im = lg.im;
                let u = s + 0.5 * d * (lg - c(0.0, PI));
                worst = worst.max((e * u).im.abs());
            }
        }
        worst
    }

    /// Smallest return distance to the turning point over the three curves.
    pub fn min_return(&self) -> f64 {
        self.curves.iter().map(|c| c.min_return).fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let cj = |z: &C| json!({"re": z.re, "im": z.im});
        json!({
            "theta": self.theta,
            "turning_points": self.turning_points.iter().map(cj).collect::<Vec<_>>(),
            "curves": self.curves.iter().map(|cv| json!({
                "end": format!("{:?}", cv.end),
                "winding": cv.winding,
                "points": cv.points.iter().step_by((cv.points.len() / 400).max(1)).map(cj).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "saddle_connections": self.saddle_connections.iter().map(|s| json!({
                "kind": match s.kind { SaddleKind::Loop => "loop", SaddleKind::Segment => "segment" },
                "winding_around_origin": s.winding_around_origin,
                "curve": s.curve,
            })).collect::<Vec<_>>(),
        })
    }

    /// The `x` plane: turning point as a dot, pole as a cross, saddle connections in red.
    pub fn to_svg(&self, half_width: f64) -> String {
        let size = 600.0;
        let map = |z: C| ((z.re / half_width + 1.0) * size / 2.0, (1.0 - z.im / half_width) * size / 2.0);
        let mut out = String::new();
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#, size);
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let saddle_curves: Vec<usize> = self.saddle_connections.iter().map(|s| s.curve).collect();
        for (i, cv) in self.curves.iter().enumerate() {
            let colour = if saddle_curves.contains(&i) { "#c0392b" } else { "#1f3a93" };
            let mut path = String::new();
            for (k, p) in cv.points.iter().enumerate() {
                if p.re.abs() > 4.0 * half_width || p.im.abs() > 4.0 * half_width {
                    break;
                }
                let (a, b) = map(*p);
                let _ = write!(path, "{}{:.2},{:.2} ", if k == 0 { "M" } else { "L" }, a, b);
            }
            let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#, path.trim_end(), colour);
        }
        for tp in &self.turning_points {
            let (a, b) = map(*tp);
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#, a, b);
        }
        let (a, b) = map(C::zero());
        let _ = writeln!(out, r#"<path d="M{0:.2},{1:.2} l8,8 m-8,0 l8,-8" transform="translate(-4,-4)" stroke="black" stroke-width="2"/>"#, a, b);
        let _ = writeln!(out, r#"<text x="8" y="20" font-family="monospace" font-size="14">theta = {:.4}</text>"#, self.theta);
        out.push_str("</svg>\n");
        out
    }
}

/// Phases in `[lo, hi]` carrying a saddle connection: grid scan of the return
/// distance, then golden-section refinement of each local minimum.
pub fn find_saddle_connections(data: &SchroedingerData, lo: f64, hi: f64, n_grid: usize, opts: &TraceOptions) -> Result<Vec<(f64, SaddleConnection)>, StokesError> {
    let grid: Vec<f64> = (0..=n_grid).map(|k| lo + (hi - lo) * k as f64 / n_grid as f64).collect();
    let mut vals = Vec::with_capacity(grid.len());
    for &t in &grid {
        vals.push(trace_stokes_graph(data, t, opts)?.min_return());
    }
    let mut found: Vec<(f64, SaddleConnection)> = Vec::new();
    for k in 0..grid.len() {
        let left = if k == 0 { f64::INFINITY } else { vals[k - 1] };
        let right = if k + 1 == grid.len() { f64::INFINITY } else { vals[k + 1] };
        if !(vals[k] <= left && vals[k] <= right) || !vals[k].is_finite() {
            continue;
        }
        let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let eval = |t: f64| trace_stokes_graph(data, t, opts).map(|gr| gr.min_return());
        let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
        let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
        for _ in 0..60 {
            if f1 < opts.saddle_tol || f2 < opts.saddle_tol || (b - a) < 1e-13 {
                break;
            }
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = eval(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = eval(x2)?;
            }
        }
        let t = if f1 < f2 { x1 } else { x2 };
        let graph = trace_stokes_graph(data, t, opts)?;
        if let Some(sc) = graph.saddle_connections.first() {
            if !found.iter().any(|(u, _)| (u - t).abs() < 1e-6) {
                found.push((t, sc.clone()));
            }
        }
    }
    Ok(found)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triangularity {
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StokesEvent {
    pub theta: f64,
    pub triangularity: Triangularity,
    /// `int_v^x sqrt(Q0) dx` along the Stokes curve through `x`, first-sheet integrand at `x`.
    pub integral: C,
    /// The shift `m` in `w(x) + m delta` relative to the principal determination.
    pub m: i64,
}

#[derive(Clone, Debug)]
pub struct StokesEvents {
    pub x: C,
    pub w: C,
    pub delta: C,
    pub events: Vec<StokesEvent>,
    /// Events reached `|m| = m_cut`, so the list is a truncation of an accumulating family.
    pub truncated: bool,
}

impl StokesEvents {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "x": {"re": self.x.re, "im": self.x.im},
            "w": {"re": self.w.re, "im": self.w.im},
            "delta": {"re": self.delta.re, "im": self.delta.im},
            "truncated": self.truncated,
            "events": self.events.iter().map(|e| json!({
                "theta": e.theta, "m": e.m,
                "triangularity": match e.triangularity { Triangularity::Upper => "upper", Triangularity::Lower => "lower" },
            })).collect::<Vec<_>>(),
        })
    }

    pub fn count(&self, t: Triangularity) -> usize {
        self.events.iter().filter(|e| e.triangularity == t).count()
    }
}

/// Whether the straight line from `u` to `0` in the `u = int sqrt(Q0) dx` plane,
/// continued from the lift `s_x`, lands on the turning point.
fn reaches_turning_point(s_x: C, u: C, d: f64, tol: f64) -> Result<bool, StokesError> {
    // dF/ds = s^2/(s^2 - d^2); along F = tau u, ds/dtau = u (s^2 - d^2)/s^2
    let field = |_t: f64, s: C| u * (s * s - d * d) / (s * s);
    let mut hit_pole = false;
    let (_, s_end) = match dopri(field, 1.0, s_x, 1e-9, tol, 1e-3, |_, s| {
        if (s * s - d * d).norm() < 1e-9 {
            hit_pole = true;
            return false;
        }
        true
    }) {
        Ok(r) => r,
        Err(StokesError::StepCollapse(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    if hit_pole {
        return Ok(false);
    }
    // near the turning point |s|^3 ~ 3 d^2 tau |u|
    let scale = (3.0 * d * d * 1e-9 * u.norm()).cbrt();
    Ok(s_end.norm() < 50.0 * scale + 1e-6)
}

/// Directions in `(0, pi)` where a Stokes curve passes through `x`, from the
/// candidates `w(x) + m delta`, `|m| <= m_cut`.
pub fn stokes_events(data: &SchroedingerData, x: C, m_cut: i64) -> Result<StokesEvents, StokesError> {
    let d = data.d_f64();
    let v = data.v_c();
    if x.norm() < 1e-12 || (x - v).norm() < 1e-12 {
        return Err(StokesError::Invalid("x must avoid the pole and the turning point".into()));
    }
    let s_x = data.first_sheet(x);
    let u0 = primitive(s_x, d);
    let half_delta = c(0.0, PI * d);
    let mut events = Vec::new();
    let mut truncated = false;
    for m in -m_cut..=m_cut {
        let u = u0 + half_delta * m as f64;
        if u.norm() < 1e-12 {
            continue;
        }
        let mut theta = u.arg();
        let mut positive = true;
        if theta < 0.0 {
            theta += PI;
            positive = false;
        }
        if theta <= 0.0 || theta >= PI {
            continue;
        }
        if reaches_turning_point(s_x, u, d, 1e-11)? {
            if m.abs() == m_cut {
                truncated = true;
            }
            events.push(StokesEvent { theta, triangularity: if positive { Triangularity::Lower } else { Triangularity::Upper }, integral: u, m });
        }
    }
    events.sort_by(|a, b| a.theta.partial_cmp(&b.theta).unwrap());
    Ok(StokesEvents { x, w: u0 * 2.0, delta: half_delta * 2.0, events, truncated })
}

/// A 2x2 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesMatrix(pub [[C; 2]; 2]);

impl StokesMatrix {
    pub fn identity() -> Self {
        StokesMatrix([[C::one(), C::zero()], [C::zero(), C::one()]])
    }

    pub fn upper(b: C) -> Self {
        StokesMatrix([[C::one(), b], [C::zero(), C::one()]])
    }

    pub fn lower(b: C) -> Self {
        StokesMatrix([[C::one(), C::zero()], [b, C::one()]])
    }

    pub fn diag(a: C, b: C) -> Self {
        StokesMatrix([[a, C::zero()], [C::zero(), b]])
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        let mut r = [[C::zero(); 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        StokesMatrix(r)
    }

    pub fn det(&self) -> C {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn max_dist(&self, o: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - o.0[i][j]).norm());
            }
        }
        m
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!(self.0.iter().map(|r| r.iter().map(|z| json!({"re": z.re, "im": z.im})).collect::<Vec<_>>()).collect::<Vec<_>>())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    X1,
    X2,
    X3,
}

impl std::str::FromStr for Region {
    type Err = StokesError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x1" => Ok(Region::X1),
            "x2" => Ok(Region::X2),
            "x3" => Ok(Region::X3),
            _ => Err(StokesError::Invalid(format!("unknown region {:?}", s))),
        }
    }
}

fn product_upper(em: C) -> Result<StokesMatrix, StokesError> {
    check_convergent(em)?;
    let mut acc = StokesMatrix::identity();
    let mut p = em;
    while p.norm() >= 1e-30 {
        acc = acc.mul(&StokesMatrix::upper(c(0.0, -1.0) * p));
        p *= em;
    }
    Ok(acc)
}

fn product_lower(em: C) -> Result<StokesMatrix, StokesError> {
    check_convergent(em)?;
    let mut acc = StokesMatrix::identity();
    let mut p = C::one();
    while p.norm() >= 1e-30 {
        acc = acc.mul(&StokesMatrix::lower(c(0.0, -1.0) * p));
        p *= em;
    }
    Ok(acc)
}

fn check_convergent(em: C) -> Result<(), StokesError> {
    if !(em.norm() < 1.0 - 1e-12) {
        return Err(StokesError::Divergent(em.norm()));
    }
    Ok(())
}

/// Total Stokes matrix at one of the three base points, as a function of `V`.
pub fn total_stokes_matrix(region: Region, voros: C) -> Result<StokesMatrix, StokesError> {
    let i = c(0.0, 1.0);
    let em = (-voros).exp();
    Ok(match region {
        Region::X1 => StokesMatrix([[C::one() - em, -i * em], [-i, C::one()]]),
        Region::X2 => {
            let diag = StokesMatrix::diag(C::one() - em, (C::one() - em).inv());
            product_lower(em)?.mul(&diag).mul(&product_upper(em)?)
        }
        Region::X3 => StokesMatrix::lower(-i * (C::one() + voros.exp())),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WallCrossing {
    /// `U(-i e^{-V}) L(-i)` against the x2-side product.
    pub residual: f64,
    /// The same with `e^{+V}` in the upper factor, as sometimes printed.
    pub literal_residual: f64,
}

pub fn wall_crossing_check(voros: C) -> Result<WallCrossing, StokesError> {
    let i = c(0.0, 1.0);
    let rhs = total_stokes_matrix(Region::X2, voros)?;
    let lhs = StokesMatrix::upper(-i * (-voros).exp()).mul(&StokesMatrix::lower(-i));
    let literal = StokesMatrix::upper(-i * voros.exp()).mul(&StokesMatrix::lower(-i));
    Ok(WallCrossing { residual: lhs.max_dist(&rhs), literal_residual: literal.max_dist(&rhs) })
}

/// Laurent polynomials in `E = e^{V}` with Gaussian-rational coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpPoly(pub BTreeMap<i64, Complex<Scalar>>);

impl ExpPoly {
    pub fn constant(re: i64, im: i64) -> Self {
        Self::monomial(0, re, im)
    }

    pub fn monomial(k: i64, re: i64, im: i64) -> Self {
        let mut m = BTreeMap::new();
        let z = Complex::new(Scalar::from_integer(re.into()), Scalar::from_integer(im.into()));
        if !z.is_zero() {
            m.insert(k, z);
        }
        ExpPoly(m)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = self.0.clone();
        for (k, v) in &o.0 {
            let e = m.entry(*k).or_insert_with(Complex::zero);
            *e = e.clone() + v.clone();
            if e.is_zero() {
                m.remove(k);
            }
        }
        ExpPoly(m)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = ExpPoly::default();
        for (a, x) in &self.0 {
            for (b, y) in &o.0 {
                let mut t = BTreeMap::new();
                t.insert(a + b, x.clone() * y.clone());
                out = out.add(&ExpPoly(t));
            }
        }
        out
    }

    pub fn eval(&self, e_v: C) -> C {
        self.0.iter().fold(C::zero(), |acc, (k, z)| acc + c(to_f64(&z.re), to_f64(&z.im)) * e_v.powi(*k as i32))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, z)| {
                let coef = format!("({}{}{}i)", fmt_scalar(&z.re), if z.im < Scalar::zero() { "" } else { "+" }, fmt_scalar(&z.im));
                match k {
                    0 => coef,
                    1 => format!("{}*e^V", coef),
                    _ => format!("{}*e^({}V)", coef, k),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Symbolic 2x2 matrix over `ExpPoly`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicMatrix(pub [[ExpPoly; 2]; 2]);

impl SymbolicMatrix {
    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        let cell = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
        SymbolicMatrix([[cell(0, 0), cell(0, 1)], [cell(1, 0), cell(1, 1)]])
    }

    pub fn det(&self) -> ExpPoly {
        let neg = ExpPoly::constant(-1, 0);
        self.0[0][0].mul(&self.0[1][1]).add(&neg.mul(&self.0[0][1].mul(&self.0[1][0])))
    }

    pub fn eval(&self, voros: C) -> StokesMatrix {
        let e = voros.exp();
        StokesMatrix([[self.0[0][0].eval(e), self.0[0][1].eval(e)], [self.0[1][0].eval(e), self.0[1][1].eval(e)]])
    }
}

/// The x1 and x3 totals as products of their two Stokes factors, exact in `e^{V}`.
pub fn symbolic_total(region: Region) -> Option<SymbolicMatrix> {
    let one = ExpPoly::constant(1, 0);
    let zero = ExpPoly::default();
    let lower_i = SymbolicMatrix([[one.clone(), zero.clone()], [ExpPoly::constant(0, -1), one.clone()]]);
    match region {
        Region::X1 => {
            let up = SymbolicMatrix([[one.clone(), ExpPoly::monomial(-1, 0, -1)], [zero.clone(), one.clone()]]);
            Some(up.mul(&lower_i))
        }
        Region::X3 => {
            let low = SymbolicMatrix([[one.clone(), zero.clone()], [ExpPoly::monomial(1, 0, -1), one.clone()]]);
            Some(low.mul(&lower_i))
        }
        Region::X2 => None,
    }
}

/// `chi = 1 + e^{2 pi i (w0 - w1)/hbar}`.
pub fn euler_pairing(w0: f64, w1: f64, hbar: C) -> Result<C, StokesError> {
    if hbar.norm() == 0.0 {
        return Err(StokesError::Invalid("hbar must be nonzero".into()));
    }
    Ok(C::one() + (c(0.0, 2.0 * PI * (w0 - w1)) / hbar).exp())
}

/// `1 + E` with `E = e^{2 pi i (w0 - w1)/hbar} = e^{V}`.
pub fn euler_pairing_symbolic() -> ExpPoly {
    ExpPoly::constant(1, 0).add(&ExpPoly::monomial(1, 1, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{q, qf};

    #[test]
    fn schroedinger_examples() {
        let s = schroedinger_form(&q(1), &q(0)).unwrap();
        assert_eq!(s.v, qf(-1, 4));
        assert_eq!(s.q0.eval(&q(1)), Some(qf(5, 4)));
        assert_eq!(schroedinger_form(&q(3), &q(1)).unwrap().v, q(-1));
        assert_eq!(schroedinger_form(&q(2), &q(2)), Err(StokesError::Coalescent));
    }

    #[test]
    fn riccati_lemma() {
        for (w0, w1) in [(q(1), q(0)), (qf(3, 2), qf(-1, 3)), (q(0), q(2))] {
            let data = schroedinger_form(&w0, &w1).unwrap();
            let r = riccati_expand(&data, 6).unwrap();
            let d = &w0 - &w1;
            assert_eq!(r.residue_at_origin(&r.p_plus[0]), &d / q(2));
            assert_eq!(r.residue_at_origin(&r.p_plus[1]), qf(1, 2));
            for n in 2..=6 {
                assert!(r.p_plus[n].order_at(&r.z0) >= 0, "P_{} has a pole at x = 0", n);
                assert!(r.decay_at_infinity(n) <= -qf(n as i64 + 1, 2));
            }
            assert!(r.even_odd_residuals().iter().all(|f| f.is_zero()));
        }
    }

    #[test]
    fn voros() {
        let v = voros_coefficient(&q(1), &q(0), 8).unwrap();
        assert_eq!(v.coefficient, q(1));
        assert!(v.higher_orders_vanish);
        assert_eq!(voros_coefficient(&q(0), &q(1), 4).unwrap().coefficient, q(-1));
    }

    #[test]
    fn wall_crossing_and_totals() {
        for v in [c(2.0 * PI, 0.0), c(4.0 * PI, 0.0), c(1.3, 0.7)] {
            let wc = wall_crossing_check(v).unwrap();
            assert!(wc.residual < 1e-12, "{:?}", wc);
        }
        let big = total_stokes_matrix(Region::X2, c(80.0, 0.0)).unwrap();
        assert!(big.max_dist(&StokesMatrix::lower(c(0.0, -1.0))) < 1e-12);
        let s1 = symbolic_total(Region::X1).unwrap();
        let s3 = symbolic_total(Region::X3).unwrap();
        assert_eq!(s1.det(), ExpPoly::constant(1, 0));
        assert_eq!(s3.det(), ExpPoly::constant(1, 0));
        let mult = &s3.0[1][0];
        assert_eq!(mult.mul(&ExpPoly::constant(0, 1)), euler_pairing_symbolic());
        let vv = c(0.4, 1.1);
        assert!(s1.eval(vv).max_dist(&total_stokes_matrix(Region::X1, vv).unwrap()) < 1e-12);
        assert!(s3.eval(vv).max_dist(&total_stokes_matrix(Region::X3, vv).unwrap()) < 1e-12);
    }

    #[test]
    fn loop_at_half_pi() {
        let data = schroedinger_form(&q(1), &q(0)).unwrap();
        let g = trace_stokes_graph(&data, 0.0, &TraceOptions::default()).unwrap();
        assert!(g.saddle_connections.is_empty());
        assert_eq!(g.curves.iter().filter(|c| c.end == CurveEnd::Pole).count(), 1);
        assert!(g.level_defect(1.0) < 1e-7, "{}", g.level_defect(1.0));
        let found = find_saddle_connections(&data, PI / 2.0 - 0.1, PI / 2.0 + 0.1, 8, &TraceOptions::default()).unwrap();
        assert_eq!(found.len(), 1, "{:?}", found);
        assert!((found[0].0 - PI / 2.0).abs() < 0.02);
        assert_eq!(found[0].1.kind, SaddleKind::Loop);
    }

    #[test]
    fn events_at_base_points() {
        let data = schroedinger_form(&q(1), &q(0)).unwrap();
        let e1 = stokes_events(&data, c(0.8, 0.0), 12).unwrap();
        assert_eq!(e1.events.len(), 2);
        assert!(e1.events[0].theta < PI / 2.0 && e1.events[1].theta > PI / 2.0);
        assert_eq!(e1.events[0].triangularity, Triangularity::Lower);
        assert_eq!(e1.events[1].triangularity, Triangularity::Upper);
        let e3 = stokes_events(&data, c(-1.8, 0.7), 12).unwrap();
        assert_eq!(e3.count(Triangularity::Lower), 2);
        assert_eq!(e3.events.len(), 2);
        // inside the loop: one family from each side of pi/2
        let e2 = stokes_events(&data, c(0.05, 0.0), 12).unwrap();
        assert!(e2.truncated);
        assert!(e2.events.iter().all(|e| (e.theta < PI / 2.0) == (e.triangularity == Triangularity::Upper)));
        assert!(e2.count(Triangularity::Upper) >= 12 && e2.count(Triangularity::Lower) >= 12);
        let closest = e2.events.iter().map(|e| (e.theta - PI / 2.0).abs()).fold(f64::INFINITY, f64::min);
        assert!(closest < 0.02);
    }

    #[test]
    fn no_saddles_away_from_half_pi() {
        let data = schroedinger_form(&q(1), &q(0)).unwrap();
        let opts = TraceOptions::default();
        assert!(find_saddle_connections(&data, 0.0, PI / 2.0 - 0.05, 24, &opts).unwrap().is_empty());
        assert!(find_saddle_connections(&data, PI / 2.0 + 0.05, PI, 24, &opts).unwrap().is_empty());
    }

    #[test]
    fn mirror_graph() {
        let data = schroedinger_form(&q(1), &q(0)).unwrap();
        let opts = TraceOptions::default();
        let a = trace_stokes_graph(&data, 0.4, &opts).unwrap();
        let b = trace_stokes_graph(&data, PI - 0.4, &opts).unwrap();
        for cv in &a.curves {
            let end = cv.points.last().unwrap().conj();
            let best = b.curves.iter().map(|o| (o.points.last().unwrap() - end).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-6, "{}", best);
        }
    }
}
