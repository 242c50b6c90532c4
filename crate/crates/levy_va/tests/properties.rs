use levy_va::actuarial::{
    bounded_surrender_intensity, surrender_intensity, MortalityParams, SurrenderParams, SurvivalModel,
};
use levy_va::levy_core::{nig_cumulant, time_integrated_cumulant, NigParams, TimeQuadrature};
use levy_va::market_model::{table1_contract, table1_model, ForwardCurve};
use levy_va::pricing::{build_gmab_integrands, BaseMeasure, CoordKind, Coordinate, SpreadIntegrand};
use levy_va::Complex64;
use proptest::prelude::*;

fn l1() -> NigParams {
    NigParams::new(4.0, -3.8, 1.34, 0.0).unwrap()
}

fn l2() -> NigParams {
    NigParams::new(5.73, -2.13, 8.3, 0.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cumulant_conjugate_symmetric(re in -0.19f64..7.79, im in -50.0f64..50.0) {
        let z = Complex64::new(re, im);
        let a = nig_cumulant(&l1(), z).unwrap();
        let b = nig_cumulant(&l1(), z.conj()).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn cumulant_real_and_convex_on_real_line(x in -3.6f64..7.7, y in -3.6f64..7.7) {
        let p = l2();
        let f = |u: f64| nig_cumulant(&p, Complex64::new(u, 0.0)).unwrap();
        let (fx, fy, fm) = (f(x), f(y), f(0.5 * (x + y)));
        prop_assert_eq!(fx.im, 0.0);
        prop_assert!(fm.re <= 0.5 * (fx.re + fy.re) + 1e-12);
    }

    #[test]
    fn time_integral_is_linear_in_length(t in 0.01f64..30.0, re in -0.1f64..2.0, im in -20.0f64..20.0) {
        let u = Complex64::new(re, im);
        let p = l1();
        let v = time_integrated_cumulant(&p, |_| u, t, &TimeQuadrature::default()).unwrap();
        let expect = nig_cumulant(&p, u).unwrap() * t;
        prop_assert!((v - expect).norm() <= 1e-12 * expect.norm().max(1.0));
    }

    #[test]
    fn bounded_intensity_agrees_inside_and_is_capped(
        beta in 0.0f64..0.5, c in 0.0f64..0.1, l in 0.1f64..12.0, d in -30.0f64..30.0
    ) {
        let p = SurrenderParams::new(beta, c, l, 1e-4).unwrap();
        let w2 = bounded_surrender_intensity(d, &p);
        let w1 = surrender_intensity(d, &p);
        if d.abs() <= l {
            prop_assert_eq!(w2, w1);
        }
        prop_assert!(w2 <= w1 + 1e-15);
        prop_assert!(w2 >= 0.0);
        let h = 1e-9;
        for edge in [l, -l] {
            let jump = (bounded_surrender_intensity(edge + h, &p)
                - bounded_surrender_intensity(edge - h, &p)).abs();
            prop_assert!(jump < 1e-6 * (1.0 + beta * l * l));
        }
    }

    #[test]
    fn survival_decreases_from_one(age in 20.0f64..80.0, s in 0.0f64..40.0, ds in 0.0f64..5.0) {
        let m = SurvivalModel::new(MortalityParams::table1(age)).unwrap();
        let (a, b) = (m.survival_probability(s), m.survival_probability(s + ds));
        prop_assert!(b <= a + 1e-15);
        prop_assert!(a <= 1.0 && b > 0.0);
    }

    #[test]
    fn log_moment_vanishes_at_origin(h in 0.5f64..10.0, frac in 0.05f64..1.0, spot in any::<bool>()) {
        let m = table1_model(10.0, ForwardCurve::Flat(0.01));
        let window = h * frac;
        let coords = vec![
            Coordinate { kind: CoordKind::Gaussian { c: 0.05 }, window, phase: 0.3, maturity: 10.0 },
            Coordinate { kind: CoordKind::Damped { r: 1.5, shift: 0.0 }, window: h, phase: -0.1, maturity: h },
        ];
        let (base, log_const) = if spot {
            (BaseMeasure::Spot, -m.equity_drift_omega(h).unwrap())
        } else {
            (BaseMeasure::Bond(h), -m.integrated_drift(h, h).unwrap())
        };
        let ig = SpreadIntegrand::new(&m, base, h, log_const, coords).unwrap();
        let zero = [Complex64::new(0.0, 0.0); 2];
        prop_assert!(ig.log_moment(&zero).unwrap().norm() < 1e-13);
    }

    #[test]
    fn gmab_integrands_conjugate_symmetric(x in -5.0f64..5.0, y in -30.0f64..30.0) {
        let m = table1_model(3.0, ForwardCurve::flat_zero());
        let c = table1_contract(3.0);
        let s = SurrenderParams::new(0.05, 0.01, 10.0, 1e-4).unwrap();
        let (_, a2) = build_gmab_integrands(&c, &m, &s).unwrap();
        let (p, n) = (a2.eval(&[x, y]), a2.eval(&[-x, -y]));
        prop_assert!((p.conj() - n).norm() <= 1e-12 * p.norm().max(1e-300));
    }

    #[test]
    fn death_probabilities_close_with_survival(age in 20.0f64..80.0, t in 2usize..20) {
        let m = SurvivalModel::new(MortalityParams::table1(age)).unwrap();
        let c = table1_contract(t as f64);
        let q: Vec<f64> = (1..=c.n()).map(|i| m.death_interval_probability(i, &c).unwrap()).collect();
        prop_assert!(q.iter().all(|&v| v >= 0.0));
        let total: f64 = q.iter().sum::<f64>() + m.survival_probability(c.maturity);
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
