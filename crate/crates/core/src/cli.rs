//! Batch front end. Every subcommand prints one JSON report
//! `{"check", "status", "detail"}`; `report-all` prints the list of them.
//!
//! Exit codes: 0 when every asserted identity holds, 2 when one fails, 1 on
//! usage or parse errors.

use std::ffi::OsString;
use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::checks::{self, CheckReport};
use crate::curve::{build_curve, build_curve_for_wkb, critical_set_check, default_coordinate, ramification_points, CoordinateKind, CurveModel, SpectralCurve};
use crate::exactalg::scalar::{fmt_scalar, parse_scalar, parse_scalar_list};
use crate::exactalg::{BigComplex, PrecisionGuard, Scalar};
use crate::oscillatory::{critical_points, saddle_expand, LgPotential};
use crate::reconstruct::{admissibility_check, assemble_operator, ck_limits, equality_check, newton_polygon, reconstruction_polynomial};
use crate::stokes::{schroedinger_form, total_stokes_matrix, trace_stokes_graph, wall_crossing_check, Region, TraceOptions};
use crate::toprec::{correlator_json, ExactRecursion};
use crate::wkb::{annihilation_check, compare_wavefunctions, gkz_operator, onshell_j_series, qdiff_check, wkb_expand};

#[derive(Parser, Debug)]
#[command(name = "gkz", version, about = "Quantum curves, topological recursion and Stokes data for GKZ models")]
struct Cli {
    /// Working precision in decimal digits (default from GKZ_PRECISION_BITS, else 166 bits).
    #[arg(long, global = true)]
    digits: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the spectral curve and list its ramification points.
    Curve(ModelArgs),
    /// WKB expansion of the quantum curve.
    Wkb {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 4)]
        orders: usize,
    },
    /// Exact correlators from topological recursion.
    Toprec {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1)]
        g_max: usize,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
    },
    /// F_m from the recursion against S_m from WKB.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 4)]
        orders: usize,
    },
    /// Rebuild the quantum curve from the recursion and compare with the GKZ operator.
    Reconstruct(ModelArgs),
    /// Newton polygon and admissibility of the classical curve.
    Newton(ModelArgs),
    /// GKZ annihilation of the on-shell J-function, every pivot.
    Jcheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 12)]
        d_max: usize,
    },
    /// q-difference annihilation of the K-theoretic series.
    Qcheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8)]
        d_max: usize,
    },
    /// Saddle-point expansion of the oscillatory integral at every critical point.
    Saddle {
        #[command(flatten)]
        model: ModelArgs,
        /// Base point, real part.
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x_im: f64,
        #[arg(long, default_value_t = 2)]
        orders: usize,
    },
    /// Stokes graph of the equivariant CP^1 Schroedinger equation at one phase.
    StokesGraph {
        #[command(flatten)]
        pair: PairArgs,
        /// Phase, as radians or "<r>pi".
        #[arg(long, value_parser = parse_theta, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Half width of the plotted window in the x-plane.
        #[arg(long, default_value_t = 3.0)]
        half_width: f64,
    },
    /// Total Stokes matrix in one region, with its determinant and the wall-crossing residual.
    StokesTotal {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_parser = parse_region)]
        region: Region,
        #[arg(long, allow_hyphen_values = true)]
        hbar_re: f64,
        #[arg(long, allow_hyphen_values = true)]
        hbar_im: f64,
    },
    /// Every acceptance check; exits 0 iff all pass.
    ReportAll,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    /// Projective space.
    Cpn,
    /// Complete intersection.
    Ci,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Coordinate {
    Auto,
    Standard,
    Sqrt,
    Zhukovsky,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Cpn)]
    model: ModelKind,
    /// Number of equivariant weights.
    #[arg(long = "N")]
    big_n: usize,
    /// Number of line bundles.
    #[arg(long = "n", default_value_t = 0)]
    small_n: usize,
    /// Weights as comma separated "p/q" values; all zero when omitted.
    #[arg(long, allow_hyphen_values = true)]
    w: Option<String>,
    /// Line-bundle weights as comma separated "p/q" values.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, value_enum, default_value_t = Coordinate::Auto)]
    coordinate: Coordinate,
}

#[derive(Args, Debug)]
struct PairArgs {
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    w0: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    w1: String,
}

impl PairArgs {
    fn scalars(&self) -> Result<(Scalar, Scalar)> {
        Ok((parse_scalar(&self.w0)?, parse_scalar(&self.w1)?))
    }
}

impl ModelArgs {
    fn model(&self) -> Result<CurveModel> {
        let w = match &self.w {
            Some(s) => parse_scalar_list(s).with_context(|| format!("--w {}", s))?,
            None => vec![Scalar::from_integer(0.into()); self.big_n],
        };
        let lambda = match &self.lambda {
            Some(s) => parse_scalar_list(s).with_context(|| format!("--lambda {}", s))?,
            None => Vec::new(),
        };
        if w.len() != self.big_n {
            bail!("--N {} but {} weights given", self.big_n, w.len());
        }
        if lambda.len() != self.small_n {
            bail!("--n {} but {} lambda values given", self.small_n, lambda.len());
        }
        let model = match self.model {
            ModelKind::Cpn if !lambda.is_empty() => bail!("--model cpn takes no --lambda"),
            ModelKind::Cpn => CurveModel::projective_space(w)?,
            ModelKind::Ci if lambda.is_empty() => bail!("--model ci needs --lambda"),
            ModelKind::Ci => CurveModel::complete_intersection(w, lambda)?,
        };
        Ok(model)
    }

    fn coordinate(&self, model: &CurveModel) -> CoordinateKind {
        match self.coordinate {
            Coordinate::Auto => default_coordinate(model),
            Coordinate::Standard => CoordinateKind::Standard,
            Coordinate::Sqrt => CoordinateKind::Cp1Sqrt,
            Coordinate::Zhukovsky => CoordinateKind::Cp1Zhukovsky,
        }
    }

    fn curve(&self) -> Result<SpectralCurve> {
        let model = self.model()?;
        Ok(build_curve(&model, self.coordinate(&model))?)
    }
}

/// Radians, or a multiple of pi written "<r>pi" with `r` a decimal or "p/q".
fn parse_theta(s: &str) -> Result<f64, String> {
    let s = s.trim();
    match s.strip_suffix("pi") {
        Some("") => Ok(PI),
        Some("-") => Ok(-PI),
        Some(r) => {
            let r = r.trim_end_matches('*');
            if let Ok(v) = r.parse::<f64>() {
                return Ok(v * PI);
            }
            let q = parse_scalar(r).map_err(|e| e.to_string())?;
            let (n, d) = (q.numer().to_string(), q.denom().to_string());
            let (n, d): (f64, f64) = (n.parse().map_err(|_| "bad numerator")?, d.parse().map_err(|_| "bad denominator")?);
            Ok(n / d * PI)
        }
        None => s.parse::<f64>().map_err(|e| format!("{}: {}", s, e)),
    }
}

fn parse_region(s: &str) -> Result<Region, String> {
    s.parse::<Region>().map_err(|e| e.to_string())
}

fn digits_to_bits(d: usize) -> usize {
    (d as f64 * std::f64::consts::LOG2_10).ceil() as usize + 1
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let _g = cli.digits.map(|d| PrecisionGuard::new(digits_to_bits(d)));
    match execute(&cli) {
        Ok((out, ok)) => match emit(&cli.out, &out) {
            Ok(()) => if ok { 0 } else { 2 },
            Err(e) => {
                eprintln!("error: {:#}", e);
                1
            }
        },
        Err(e) => {
            eprintln!("error: {:#}", e);
            1
        }
    }
}

fn emit(path: &Option<PathBuf>, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn report(r: CheckReport) -> (Value, bool) {
    let ok = r.passed();
    (r.to_json(), ok)
}

fn execute(cli: &Cli) -> Result<(Value, bool)> {
    Ok(match &cli.command {
        Command::Curve(m) => report(curve_cmd(m)?),
        Command::Wkb { model, orders } => {
            let md = model.model()?;
            let curve = build_curve_for_wkb(&md, model.coordinate(&md))?;
            let w = wkb_expand(&gkz_operator(&md), &curve, *orders)?;
            report(CheckReport::new("wkb", true, w.to_json()))
        }
        Command::Toprec { model, g_max, n_max } => {
            let mut rec = ExactRecursion::new(&model.curve()?)?;
            let mut out = Vec::new();
            for g in 0..=*g_max {
                for n in 1..=*n_max {
                    if 2 * g + n > 2 {
                        out.push(correlator_json(g, n, &rec.correlator(g, n)?));
                    }
                }
            }
            report(CheckReport::new("toprec", true, json!(out)))
        }
        Command::Compare { model, orders } => {
            let md = model.model()?;
            let curve = model.curve()?;
            let w = wkb_expand(&gkz_operator(&md), &curve, *orders)?;
            let mut rec = ExactRecursion::new(&curve)?;
            let fm: Vec<_> = rec.wavefunction(*orders)?.into_iter().map(|t| t.derivative).collect();
            let rep = compare_wavefunctions(&w, &fm, *orders);
            let complete = rep.orders.last().map(|o| o.m) == Some(*orders);
            report(CheckReport::new("compare", rep.all_equal() && complete, json!({"coordinate": curve.coordinate.as_str(), "comparison": rep.to_json()})))
        }
        Command::Reconstruct(m) => {
            let md = m.model()?;
            let curve = m.curve()?;
            let c = ck_limits(&curve)?;
            let ck_ok = c == checks::ck_closed_form(&md);
            let rec = assemble_operator(&curve)?;
            let rep = equality_check(&rec.operator, &gkz_operator(&md));
            report(CheckReport::new(
                "reconstruct",
                rep.equal && ck_ok,
                json!({"model": md.to_json(), "ck": c.iter().map(fmt_scalar).collect::<Vec<_>>(), "ck_closed_form": ck_ok,
                       "reconstruction": rec.to_json(), "equality": rep.to_json()}),
            ))
        }
        Command::Newton(m) => {
            let p = reconstruction_polynomial(&m.model()?.gkz_polynomial());
            let np = newton_polygon(&p)?;
            let admissible = admissibility_check(&np, &p);
            report(CheckReport::new("newton", admissible, np.to_json(admissible)))
        }
        Command::Jcheck { model, d_max } => {
            let md = model.model()?;
            let op = gkz_operator(&md);
            let mut ok = true;
            let mut detail = Vec::new();
            for (i, wi) in md.w.iter().enumerate() {
                let series = onshell_j_series(&md, i, *d_max)?;
                let res = annihilation_check(&op, &series, wi, *d_max);
                ok &= res.is_ok();
                detail.push(json!({"pivot": i, "first_failure": res.err().map(|f| f.degree)}));
            }
            report(CheckReport::new("jcheck", ok, json!({"d_max": d_max, "pivots": detail})))
        }
        Command::Qcheck { model, d_max } => {
            let r = qdiff_check(model.big_n, model.small_n, *d_max)?;
            report(CheckReport::new("qcheck", r.holds, r.to_json()))
        }
        Command::Saddle { model, x, x_im, orders } => {
            let md = model.model()?;
            let pot = LgPotential::new(md);
            let xv = BigComplex::from_f64(*x, *x_im);
            let mut detail = Vec::new();
            for cp in critical_points(&pot, &xv)? {
                let se = saddle_expand(&pot, &cp, &xv, *orders)?;
                let (re, im) = cp.y.to_f64();
                detail.push(json!({"type": cp.kind.code(), "y": [re, im], "expansion": se.to_json()}));
            }
            report(CheckReport::new("saddle", true, json!({"x": [x, x_im], "critical_points": detail})))
        }
        Command::StokesGraph { pair, theta, svg, half_width } => {
            let (w0, w1) = pair.scalars()?;
            let data = schroedinger_form(&w0, &w1)?;
            let g = trace_stokes_graph(&data, *theta, &TraceOptions::default())?;
            if let Some(p) = svg {
                std::fs::write(p, g.to_svg(*half_width)).with_context(|| format!("writing {}", p.display()))?;
            }
            report(CheckReport::new("stokes-graph", true, g.to_json()))
        }
        Command::StokesTotal { pair, region, hbar_re, hbar_im } => {
            let (w0, w1) = pair.scalars()?;
            let hbar = Complex64::new(*hbar_re, *hbar_im);
            if hbar.norm() == 0.0 {
                bail!("hbar must be nonzero");
            }
            let delta = scalar_f64(&(&w0 - &w1))?;
            let v = 2.0 * PI * Complex64::new(0.0, delta) / hbar;
            let m = total_stokes_matrix(*region, v)?;
            let det_defect = (m.det() - 1.0).norm();
            let wc = wall_crossing_check(v)?;
            let ok = det_defect < 1e-12 && wc.residual < 1e-12;
            report(CheckReport::new(
                "stokes-total",
                ok,
                json!({"voros": {"re": v.re, "im": v.im}, "matrix": m.to_json(), "det_defect": det_defect, "wall_crossing_residual": wc.residual}),
            ))
        }
        Command::ReportAll => {
            let all = checks::run_all();
            let ok = all.iter().all(|r| r.passed());
            (json!(all.iter().map(|r| r.to_json()).collect::<Vec<_>>()), ok)
        }
    })
}

fn curve_cmd(m: &ModelArgs) -> Result<CheckReport> {
    let curve = m.curve()?;
    let bits = crate::exactalg::bigfloat::precision();
    let ram = ramification_points(&curve, bits, 4)?;
    let sample = Scalar::from_integer(7.into());
    let on_curve = if curve.model.small_n() == 0 { Some(critical_set_check(&curve.model, &sample, bits)?) } else { None };
    let ram: Vec<Value> = ram
        .iter()
        .map(|r| {
            let z = r.z.to_complex().map(|c| c.to_f64());
            json!({"z": z.map(|(re, im)| [re, im]), "simple": r.simple})
        })
        .collect();
    Ok(CheckReport::new(
        "curve",
        on_curve.unwrap_or(true),
        json!({"curve": curve.to_json(), "ramification_points": ram, "critical_set_on_curve_at_x_7": on_curve}),
    ))
}

fn scalar_f64(s: &Scalar) -> Result<f64> {
    fmt_scalar(s)
        .split_once('/')
        .and_then(|(n, d)| Some(n.parse::<f64>().ok()? / d.parse::<f64>().ok()?))
        .ok_or_else(|| anyhow!("cannot convert {} to a float", fmt_scalar(s)))
}
