//! Known closed forms, transcribed by hand into the curve coordinate `z`.
//!
//! These are independent of the solvers: every entry is written from the
//! published formula in `x` and the branch substitution for `sqrt`, never
//! computed by the engine. Rows with logarithms carry only `d/dz`.

use num_traits::{One, Zero};

use crate::exactalg::scalar::{q, qf, sqrt_exact};
use crate::exactalg::{RationalFunction, Scalar};

/// One order of a golden expansion.
#[derive(Clone, Debug)]
pub struct GoldenRow {
    pub m: usize,
    /// `d/dz` of the tabulated function.
    pub derivative: RationalFunction,
    /// The function itself, when it is rational in `z`.
    pub value: Option<RationalFunction>,
}

impl GoldenRow {
    fn rational(m: usize, f: RationalFunction) -> Self {
        GoldenRow { m, derivative: f.derivative(), value: Some(f) }
    }

    fn logarithmic(m: usize, d: RationalFunction) -> Self {
        GoldenRow { m, derivative: d, value: None }
    }
}

fn c(v: Scalar) -> RationalFunction {
    RationalFunction::constant(v)
}

fn ci(v: i64) -> RationalFunction {
    RationalFunction::from_i64(v)
}

fn zpow(k: i32) -> RationalFunction {
    RationalFunction::z().pow(k)
}

/// `f'/f`, the derivative of `log f`.
fn dlog(f: &RationalFunction) -> RationalFunction {
    &f.derivative() / f
}

/// Non-equivariant `CP^{N-1}` on `x = z^N`, `y = z`, for `N = 2, 3, 4`.
pub fn cpn_table(big_n: usize) -> Option<Vec<GoldenRow>> {
    // S_1 = log x^{-e}; S_2..S_4 = coefficient * x^{-k/N}
    let (e, s2, s3, s4) = match big_n {
        2 => (qf(1, 4), (qf(1, 16), 1), (qf(1, 64), 2), (qf(25, 3072), 3)),
        3 => (qf(1, 3), (qf(1, 9), 1), (qf(1, 54), 2), (qf(1, 243), 3)),
        4 => (qf(3, 8), (qf(5, 32), 1), (qf(5, 256), 2), (qf(17, 24576), 3)),
        _ => return None,
    };
    let n = q(big_n as i64);
    let mut rows = vec![
        GoldenRow::logarithmic(0, c(n.clone())),
        GoldenRow::logarithmic(1, zpow(-1).scale(&(-(e * n)))),
    ];
    for (m, (coef, k)) in [(2, s2), (3, s3), (4, s4)] {
        rows.push(GoldenRow::rational(m, zpow(-k).scale(&coef)));
    }
    Some(rows)
}

/// Equivariant `CP^1` on `x = z^2 - Lambda`, `y = z + (w_0 + w_1)/2`, branch `sqrt(4x + D) = 2z`.
pub fn equivariant_cp1_table(w0: &Scalar, w1: &Scalar) -> Vec<GoldenRow> {
    let dl = w0 - w1;
    let d = &dl * &dl;
    let lam = &d / q(4);
    let x = &zpow(2) - &c(lam);
    let z = RationalFunction::z();
    let dc = c(d.clone());
    let sq = z.scale(&q(2));
    // S_0 = sqrt + w_0 log(-w_0 + w_1 + sqrt) + w_1 log(w_0 - w_1 + sqrt)
    let s0 = &(&sq.derivative() + &dlog(&(&sq - &c(dl.clone()))).scale(w0)) + &dlog(&(&sq + &c(dl.clone()))).scale(w1);
    // S_1 = -1/4 log((4x + D)/4)
    let s1 = dlog(&(&x.scale(&q(4)) + &dc)).scale(&qf(-1, 4));
    let s2 = &(&x.scale(&q(6)) - &dc) / &(&ci(12) * &sq.pow(3));
    let s3 = &(&x * &(&x - &dc)) / &(&x.scale(&q(4)) + &dc).pow(3);
    let s4n = &(&(&x.pow(3).scale(&q(1500)) - &(&x.pow(2) * &dc).scale(&q(3654))) + &(&x * &dc.pow(2)).scale(&q(378))) + &dc.pow(3);
    let s4 = &s4n / &(&ci(360) * &sq.pow(9));
    vec![
        GoldenRow::logarithmic(0, s0),
        GoldenRow::logarithmic(1, s1),
        GoldenRow::rational(2, s2),
        GoldenRow::rational(3, s3),
        GoldenRow::rational(4, s4),
    ]
}

/// Degree-one hypersurface in `CP^1` on the Zhukovsky coordinate, branch
/// `sqrt(Delta) = 4bz/(z^2 - 1)` with `b^2 = (lambda - w_0)(lambda - w_1)`.
/// `None` when `b` is irrational.
pub fn hypersurface_cp1_table(w0: &Scalar, w1: &Scalar, l: &Scalar) -> Option<Vec<GoldenRow>> {
    let b2 = (l - w0) * (l - w1);
    let b = sqrt_exact(&b2)?;
    if b.is_zero() {
        return None;
    }
    let s = w0 + w1 - q(2) * l;
    let dl = w0 - w1;
    let zz1 = &zpow(2) - &ci(1);
    let x = &c(-s.clone()) + &(&(&zpow(2) + &ci(1)) / &zz1).scale(&(q(2) * &b));
    let r = (&RationalFunction::z() / &zz1).scale(&(q(4) * &b));
    let delta = &(&x.pow(2) + &x.scale(&(q(2) * &s))) + &c(&dl * &dl);
    debug_assert_eq!(&r * &r, delta);
    let (sc, dc) = (c(s.clone()), c(dl.clone()));
    let xsr = &(&x + &sc) + &r;
    let sxd = &(&x.scale(&s) + &c(&dl * &dl)) + &(&dc * &r);
    // S_0 = (x + r + d log x + (w0+w1) log x + s log(x+s+r) - d log(s x + d^2 + d r)) / 2
    let s0 = &(&(&(&x.derivative() + &r.derivative()) + &dlog(&x).scale(&(&dl + &(w0 + w1)))) + &dlog(&xsr).scale(&s)) - &dlog(&sxd).scale(&dl);
    let s0 = s0.scale(&qf(1, 2));
    let s1 = &dlog(&delta).scale(&qf(-1, 4)) + &dlog(&xsr).scale(&qf(1, 2));
    let t1 = (&x / &delta).scale(&qf(-1, 2));
    let t2 = (&(&x.scale(&s) + &c(&dl * &dl)) / &(&delta * &r)).scale(&qf(-5, 12));
    let k = w0 * w0 - q(10) * w0 * w1 + w1 * w1 + q(8) * (w0 + w1) * l - q(8) * l * l;
    let t3 = &(&x.scale(&s) + &c(k)) / &(&c(q(24) * &b2) * &r);
    let s2 = &(&t1 + &t2) - &t3;
    let s3n = &(&x * &(&(&x.pow(2).scale(&q(3)) + &x.scale(&s)) - &c(q(2) * &dl * &dl))) * &(&(&x + &sc) - &r);
    let s3 = &s3n / &delta.pow(3).scale(&q(4));
    Some(vec![
        GoldenRow::logarithmic(0, s0),
        GoldenRow::logarithmic(1, s1),
        GoldenRow::rational(2, s2),
        GoldenRow::rational(3, s3),
    ])
}

/// `x = z^2 - Lambda` and the branch `(x + Lambda)^{1/2} = z`.
fn lambda_x(lam: &Scalar) -> RationalFunction {
    &zpow(2) - &c(lam.clone())
}

/// Reorganized free energies `F_m`, `m = 1..=4`, of the equivariant `CP^1` recursion,
/// reference point `z = infinity`, branch `+`.
pub fn equivariant_cp1_fm_table(lam: &Scalar) -> Vec<GoldenRow> {
    let x = lambda_x(lam);
    let lc = c(lam.clone());
    let f2 = &(&x.scale(&q(3)) - &lc.scale(&q(2))) / &zpow(3).scale(&q(48));
    let f3 = &(&x * &(&x - &lc.scale(&q(4)))) / &zpow(6).scale(&q(64));
    let f4n = &(&(&x.pow(3).scale(&q(375)) - &(&x.pow(2) * &lc).scale(&q(3654))) + &(&x * &lc.pow(2)).scale(&q(1512))) + &lc.pow(3).scale(&q(16));
    let f4 = &f4n / &zpow(9).scale(&q(46080));
    vec![
        GoldenRow::logarithmic(1, zpow(-1).scale(&qf(-1, 2))),
        GoldenRow::rational(2, f2),
        GoldenRow::rational(3, f3),
        GoldenRow::rational(4, f4),
    ]
}

/// Principal specializations `F_n^{(g)}(z, ..., z)` of the equivariant `CP^1`
/// correlators, branch `+`, reference point `z = infinity`. Keyed by `(g, n)`.
pub fn equivariant_cp1_free_energies(lam: &Scalar) -> Vec<((usize, usize), GoldenRow)> {
    let x = lambda_x(lam);
    let l = c(lam.clone());
    let over = |num: RationalFunction, k: i64, p: i32| &num / &zpow(p).scale(&q(k));
    let rows = vec![
        ((0, 3), over(-l.clone(), 2, 3)),
        ((1, 1), over(&x.scale(&q(3)) + &l.scale(&q(2)), 48, 3)),
        ((0, 4), over(&l * &(&l - &x.scale(&q(3))), 4, 6)),
        ((1, 2), over(&(&x.pow(2).scale(&q(3)) - &l.pow(2).scale(&q(2))) - &(&x * &l).scale(&q(6)), 96, 6)),
        (
            (0, 5),
            over(-(&l * &(&(&l.pow(2).scale(&q(2)) - &(&x * &l).scale(&q(21))) + &x.pow(2).scale(&q(12)))), 8, 9),
        ),
        (
            (1, 3),
            over(
                &(&(&l.pow(3).scale(&q(4)) + &(&x * &l.pow(2)).scale(&q(18))) - &(&l * &x.pow(2)).scale(&q(63))) + &x.pow(3).scale(&q(6)),
                192,
                9,
            ),
        ),
        (
            (2, 1),
            over(
                -(&(&(&(&l * &x.pow(2)).scale(&q(186)) + &(&x * &l.pow(2)).scale(&q(72))) + &l.pow(3).scale(&q(16))) - &x.pow(3).scale(&q(45))),
                15360,
                9,
            ),
        ),
    ];
    let mut out: Vec<((usize, usize), GoldenRow)> =
        vec![((0, 2), GoldenRow::logarithmic(1, zpow(-1).scale(&-Scalar::one())))];
    for ((g, n), f) in rows {
        out.push(((g, n), GoldenRow::rational(2 * g + n - 1, f)));
    }
    out
}

/// For a row `a z^{-k}` on `x = z^N`, returns `(a, k)`, i.e. `a x^{-k/N}`.
pub fn cpn_power(row: &GoldenRow) -> Option<(Scalar, i64)> {
    let v = row.value.as_ref()?;
    let num = v.num();
    let den = v.den();
    if num.deg() != 0 || den.deg() < 0 || den.coeffs().iter().filter(|c| !c.is_zero()).count() != 1 {
        return None;
    }
    Some((&num.coeff(0) / &den.lc(), den.deg()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fm_and_s_tables_agree() {
        // Two independent transcriptions must coincide on the branch z = sqrt(x + Lambda).
        for (w0, w1) in [(q(1), q(0)), (q(3), qf(-1, 2))] {
            let s = equivariant_cp1_table(&w0, &w1);
            let lam = (&w0 - &w1) * (&w0 - &w1) / q(4);
            let f = equivariant_cp1_fm_table(&lam);
            for fr in &f {
                let sr = &s[fr.m];
                assert_eq!(sr.derivative, fr.derivative, "m = {}", fr.m);
            }
            let corr = equivariant_cp1_free_energies(&lam);
            let get = |g, n| corr.iter().find(|(k, _)| *k == (g, n)).unwrap().1.value.clone().unwrap();
            let f2 = &get(0, 3).scale(&qf(1, 6)) + &get(1, 1);
            assert_eq!(Some(f2), f[1].value);
            let f3 = &get(0, 4).scale(&qf(1, 24)) + &get(1, 2).scale(&qf(1, 2));
            assert_eq!(Some(f3), f[2].value);
            let f4 = &(&get(0, 5).scale(&qf(1, 120)) + &get(1, 3).scale(&qf(1, 6))) + &get(2, 1);
            assert_eq!(Some(f4), f[3].value);
        }
    }

    #[test]
    fn cpn_rows_are_powers() {
        let r = cpn_table(4).unwrap();
        assert_eq!(cpn_power(&r[4]), Some((qf(17, 24576), 3)));
    }
}
