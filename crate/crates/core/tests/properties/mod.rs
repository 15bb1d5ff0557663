//! Randomized invariants, one submodule per library module.

use gkz_core::exactalg::{Polynomial, RationalFunction, Scalar};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Scalar> {
    (-20i64..=20, 1i64..=8).prop_map(|(n, d)| Scalar::new(n.into(), d.into()))
}

fn small_rational() -> impl Strategy<Value = Scalar> {
    (-9i64..=9, 1i64..=5).prop_map(|(n, d)| Scalar::new(n.into(), d.into()))
}

fn poly(max_len: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(rational(), 1..=max_len).prop_map(Polynomial::new)
}

fn nonzero_poly(max_len: usize) -> impl Strategy<Value = Polynomial> {
    poly(max_len).prop_filter("nonzero", |p| !p.is_zero())
}

/// Denominators with distinct small rational roots, so every pole is at a rational point.
fn rooted_den(max_roots: usize) -> impl Strategy<Value = (Polynomial, Vec<Scalar>)> {
    prop::collection::btree_set(-6i64..=6, 1..=max_roots).prop_flat_map(|roots| {
        let roots: Vec<Scalar> = roots.into_iter().map(|r| Scalar::new(r.into(), 2.into())).collect();
        prop::collection::vec(1u32..=3, roots.len()).prop_map(move |mult| {
            let mut den = Polynomial::one();
            for (r, m) in roots.iter().zip(&mult) {
                for _ in 0..*m {
                    den = &den * &Polynomial::linear_root(r);
                }
            }
            (den, roots.clone())
        })
    })
}

/// Parameters no two of which differ by an integer.
fn generic(count: usize) -> impl Strategy<Value = Vec<Scalar>> {
    prop::collection::vec(small_rational(), count).prop_filter("generic", |v| {
        (0..v.len()).all(|i| (0..i).all(|j| !(&v[i] - &v[j]).is_integer()))
    })
}

fn generic_model(max_n: usize) -> impl Strategy<Value = gkz_core::curve::CurveModel> {
    (2..=max_n)
        .prop_flat_map(|big_n| (Just(big_n), 0..big_n))
        .prop_flat_map(|(big_n, n)| generic(big_n + n).prop_map(move |p| (big_n, p)))
        .prop_map(|(big_n, p)| gkz_core::curve::CurveModel::from_params(p[..big_n].to_vec(), p[big_n..].to_vec()).unwrap())
}

mod exactalg {
    use super::*;
    use gkz_core::exactalg::{hermite_antiderivative, BasePoint};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn residue_is_laurent_coefficient(num in poly(6), (den, roots) in rooted_den(3)) {
            let f = RationalFunction::new(num, den).unwrap();
            for r in &roots {
                let s = f.laurent_expand(&BasePoint::At(r.clone()), 0).unwrap();
                prop_assert_eq!(f.residue(r), s.coeff(-1));
            }
        }

        #[test]
        fn residues_sum_to_zero(num in poly(8), (den, roots) in rooted_den(3)) {
            let f = RationalFunction::new(num, den).unwrap();
            let mut total = f.residue_at_infinity();
            for r in &roots {
                total += f.residue(r);
            }
            prop_assert_eq!(total, Scalar::from_integer(0.into()));
        }

        #[test]
        fn hermite_round_trip(num in poly(12), (den, _) in rooted_den(4)) {
            let f = RationalFunction::new(num, den).unwrap();
            let a = hermite_antiderivative(&f).unwrap();
            let mut d = a.rational.derivative();
            for (c, p) in &a.logs {
                d = &d + &RationalFunction::new(p.derivative().scale(c), p.clone()).unwrap();
            }
            prop_assert_eq!(d, f);
        }

        #[test]
        fn canonical_form(a in nonzero_poly(5), b in nonzero_poly(5), c in nonzero_poly(4), d in nonzero_poly(4)) {
            let f = RationalFunction::new(a, b).unwrap();
            let g = RationalFunction::new(c, d).unwrap();
            prop_assert!((&f - &f).is_zero());
            prop_assert_eq!(&(&f / &g) * &(&g / &f), RationalFunction::one());
            prop_assert_eq!(&(&f + &g) - &g, f);
        }

        #[test]
        fn division_with_remainder(a in poly(7), b in nonzero_poly(4)) {
            let (q, r) = a.div_rem(&b);
            prop_assert_eq!(&(&q * &b) + &r, a);
            prop_assert!(r.is_zero() || r.deg() < b.deg());
        }

        #[test]
        fn gcd_divides(a in nonzero_poly(5), b in nonzero_poly(5), c in nonzero_poly(3)) {
            let (ac, bc) = (&a * &c, &b * &c);
            let g = Polynomial::gcd(&ac, &bc);
            prop_assert!(ac.rem(&g).is_zero() && bc.rem(&g).is_zero());
            prop_assert!(g.rem(&c).is_zero());
        }
    }
}

mod curve {
    use super::*;
    use gkz_core::curve::{build_curve, ramification_points, CoordinateKind, Involution};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn curve_identity_and_pole_order(model in generic_model(5)) {
            let c = build_curve(&model, CoordinateKind::Standard);
            prop_assume!(c.is_ok());
            let c = c.unwrap();
            prop_assert!(c.defining_poly.eval_rf(&[c.x.clone(), c.y.clone()]).is_zero());
            prop_assert_eq!(&c.y, &RationalFunction::z());
            prop_assert_eq!(c.x.degree(), (model.big_n() - model.small_n()) as i64);
        }

        #[test]
        fn series_involution_squares_to_identity(w in generic(3)) {
            let model = gkz_core::curve::CurveModel::projective_space(w).unwrap();
            let c = build_curve(&model, CoordinateKind::Standard);
            prop_assume!(c.is_ok());
            let c = c.unwrap();
            let order = 8;
            for p in ramification_points(&c, 166, order).unwrap() {
                if let Involution::Series(s) = &p.involution {
                    let twice = s.compose(s);
                    for k in 0..=order {
                        let want = if k == 1 { 1.0 } else { 0.0 };
                        let got = twice.coeff(k).to_f64();
                        prop_assert!((got.0 - want).abs() + got.1.abs() < 1e-25, "k = {}: {:?}", k, got);
                    }
                }
            }
        }
    }
}

mod toprec {
    use super::*;
    use gkz_core::curve::{build_curve, CoordinateKind, CurveModel};
    use gkz_core::toprec::ExactRecursion;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn correlators_are_symmetric(w in generic(2)) {
            let model = CurveModel::projective_space(w).unwrap();
            let mut r = ExactRecursion::new(&build_curve(&model, CoordinateKind::Cp1Sqrt).unwrap()).unwrap();
            let w3 = r.correlator(0, 3).unwrap();
            prop_assert_eq!(w3.permute(&[1, 0, 2], 3), w3.clone());
            prop_assert_eq!(w3.permute(&[0, 2, 1], 3), w3);
            let w12 = r.correlator(1, 2).unwrap();
            prop_assert_eq!(w12.permute(&[1, 0], 2), w12);
        }
    }
}

mod wkb {
    use super::*;
    use gkz_core::curve::{build_curve_for_wkb, CoordinateKind};
    use gkz_core::wkb::{gkz_operator, semiclassical_limit};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn order_zero_consistency(model in generic_model(4)) {
            let c = build_curve_for_wkb(&model, CoordinateKind::Standard).unwrap();
            let a = semiclassical_limit(&gkz_operator(&model));
            prop_assert!(a.eval_rf(&[c.x.clone(), c.y.clone()]).is_zero());
        }
    }
}

mod reconstruct {
    use super::*;
    use gkz_core::checks::ck_closed_form;
    use gkz_core::curve::{build_curve, CoordinateKind};
    use gkz_core::reconstruct::{assemble_operator, ck_limits, newton_polygon, reconstruction_polynomial};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn pick_matches_enumeration(model in generic_model(5)) {
            let p = reconstruction_polynomial(&model.gkz_polynomial());
            let np = newton_polygon(&p).unwrap();
            prop_assert_eq!(np.pick_interior(), Some(np.interior_points().len() as i64));
        }

        #[test]
        fn reconstruction_has_the_curve_as_limit(model in generic_model(5)) {
            let c = build_curve(&model, CoordinateKind::Standard);
            prop_assume!(c.is_ok());
            let c = c.unwrap();
            prop_assert_eq!(ck_limits(&c).unwrap(), ck_closed_form(&model));
            let rec = assemble_operator(&c).unwrap();
            prop_assert_eq!(rec.operator.semiclassical_limit(), model.gkz_polynomial());
        }
    }
}

mod oscillatory {
    use super::*;
    use gkz_core::curve::critical_set_check;
    use gkz_core::exactalg::BigComplex;
    use gkz_core::oscillatory::{critical_points, LgPotential};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn critical_points_count_and_lie_on_curve(model in generic_model(4), xn in 2i64..40, xd in 1i64..4) {
            let x = Scalar::new(xn.into(), xd.into());
            let n = model.big_n();
            prop_assert_eq!(critical_points(&LgPotential::new(model.clone()), &BigComplex::from_scalar(&x)).unwrap().len(), n);
            prop_assert!(critical_set_check(&model, &x, 128).unwrap());
        }
    }
}

mod stokes {
    use super::*;
    use gkz_core::stokes::{riccati_expand, schroedinger_form, total_stokes_matrix, trace_stokes_graph, Region, TraceOptions};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn hbar() -> impl Strategy<Value = Complex64> {
        (0.1f64..2.0, 0.1f64..PI - 0.1).prop_map(|(r, t)| Complex64::from_polar(r, t))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn unimodular_and_region_independent(h in hbar()) {
            let v = 2.0 * PI * Complex64::new(0.0, 1.0) / h;
            for r in [Region::X1, Region::X2, Region::X3] {
                prop_assert!((total_stokes_matrix(r, v).unwrap().det() - 1.0).norm() < 1e-12);
            }
            let (a, b) = (total_stokes_matrix(Region::X1, v).unwrap(), total_stokes_matrix(Region::X2, v).unwrap());
            prop_assert!(a.max_dist(&b) < 1e-12);
        }

        #[test]
        fn riccati_decay(w0 in small_rational(), w1 in small_rational()) {
            prop_assume!(w0 != w1);
            let r = riccati_expand(&schroedinger_form(&w0, &w1).unwrap(), 5).unwrap();
            for n in 2..=5 {
                prop_assert!(r.p_plus[n].order_at(&r.z0) >= 0);
                prop_assert!(r.decay_at_infinity(n) <= -Scalar::new((n as i64 + 1).into(), 2.into()));
            }
        }

        #[test]
        fn traces_stay_on_level_sets_and_mirror(theta in 0.1f64..PI / 2.0 - 0.1) {
            let data = schroedinger_form(&Scalar::from_integer(1.into()), &Scalar::from_integer(0.into())).unwrap();
            let opts = TraceOptions::default();
            let a = trace_stokes_graph(&data, theta, &opts).unwrap();
            let b = trace_stokes_graph(&data, PI - theta, &opts).unwrap();
            prop_assert!(a.level_defect(1.0) < 1e-6, "{}", a.level_defect(1.0));
            for cv in &a.curves {
                let end = cv.points.last().unwrap().conj();
                let best = b.curves.iter().map(|o| (o.points.last().unwrap() - end).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(best < 1e-6, "{}", best);
            }
        }
    }
}
