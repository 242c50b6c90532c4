use levy_va::actuarial::{MortalityParams, SurrenderParams, SurvivalModel};
use levy_va::integrate::rng::stream_rng;
use levy_va::levy_core::{nig_cumulant, MomentBudget, NigParams, TimeQuadrature};
use levy_va::market_model::{table1_contract, table1_model, Driver, ForwardCurve, HybridMarketModel};
use levy_va::oracle::{sample_nig_increment, simulate_contract, simulate_survival, simulate_unchecked, OracleSettings};
use levy_va::pricing::Actuarial;
use levy_va::Complex64;

fn l1() -> NigParams {
    NigParams::new(4.0, -3.8, 1.34, 0.0).unwrap()
}

fn l2() -> NigParams {
    NigParams::new(5.73, -2.13, 8.3, 0.0).unwrap()
}

fn draws(p: &NigParams, dt: f64, n: usize, stream: u64) -> Vec<f64> {
    let mut rng = stream_rng(99, stream);
    (0..n).map(|_| sample_nig_increment(p, dt, &mut rng)).collect()
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn nig_increments_have_the_right_moments() {
    for (p, dt) in [(l1(), 1.0), (l1(), 1.0 / 256.0), (l2(), 0.5)] {
        let x = draws(&p, dt, 400_000, 1);
        let (m, se) = mean_se(&x);
        assert!((m - p.mean() * dt).abs() < 4.0 * se, "mean {m} vs {}", p.mean() * dt);
        let sq: Vec<f64> = x.iter().map(|v| (v - m).powi(2)).collect();
        let (v, vse) = mean_se(&sq);
        assert!((v - p.variance() * dt).abs() < 4.0 * vse, "var {v} vs {}", p.variance() * dt);
    }
}

#[test]
fn nig_empirical_mgf_matches_cumulant() {
    for (p, u) in [(l1(), 0.1), (l1(), 2.0), (l2(), -0.5)] {
        let x = draws(&p, 1.0, 400_000, 2);
        let e: Vec<f64> = x.iter().map(|v| (u * v).exp()).collect();
        let (m, se) = mean_se(&e);
        let exact = nig_cumulant(&p, Complex64::new(u, 0.0)).unwrap().re.exp();
        assert!((m - exact).abs() < 4.0 * se, "u={u}: {m} vs {exact}");
    }
}

#[test]
fn two_half_steps_match_one_full_step_in_law() {
    let p = l1();
    let n = 100_000;
    let mut a = draws(&p, 1.0, n, 3);
    let h1 = draws(&p, 0.5, n, 4);
    let h2 = draws(&p, 0.5, n, 5);
    let mut b: Vec<f64> = h1.iter().zip(&h2).map(|(x, y)| x + y).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    // Two-sample Kolmogorov-Smirnov statistic.
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && j < n {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 - j as f64).abs() / n as f64);
    }
    // 0.1% critical value.
    let crit = 1.95 * (2.0 / n as f64).sqrt();
    assert!(d < crit, "KS {d} vs {crit}");
}

fn degenerate_model(rate: f64) -> HybridMarketModel {
    let driver = |p: NigParams| Driver {
        params: p,
        budget: MomentBudget::new(0.15, 0.1).unwrap(),
    };
    HybridMarketModel::new(
        0.0,
        0.0,
        0.0,
        ForwardCurve::Flat(rate),
        driver(l1()),
        driver(l2()),
        TimeQuadrature::default(),
        4.0,
    )
    .unwrap()
}

#[test]
fn unloaded_drivers_price_deterministically() {
    let m = degenerate_model(0.02);
    let c = table1_contract(4.0);
    let a = Actuarial {
        survival: SurvivalModel::new(MortalityParams::table1(40.0)).unwrap(),
        surrender: SurrenderParams::new(0.0, 0.0, 10.0, 1e-4).unwrap(),
    };
    let settings = OracleSettings {
        paths: 2_000,
        step: 1.0 / 16.0,
        seed: 1,
        coarsen: 1,
    };
    let r = simulate_unchecked(&c, &m, &a, &settings).unwrap();
    let t = c.maturity;
    let expect = a.survival.survival_probability(t)
        * (c.guarantee(t) * m.zero_bond_price(t)).max(c.notional);
    assert!((r.w1.gmab.value - expect).abs() < 1e-10 * expect, "{} vs {expect}", r.w1.gmab.value);
    assert!(r.w1.gmab.std_error < 1e-10);
    assert_eq!(r.w1.sb.value, 0.0);
    assert_eq!(r.w1, r.w2);
}

#[test]
fn halving_the_step_moves_prices_within_noise() {
    let m = table1_model(3.0, ForwardCurve::flat_zero());
    let c = table1_contract(3.0);
    let a = Actuarial {
        survival: SurvivalModel::new(MortalityParams::table1(40.0)).unwrap(),
        surrender: SurrenderParams::new(0.05, 0.01, 10.0, 1e-4).unwrap(),
    };
    let run = |coarsen| {
        simulate_contract(
            &c,
            &m,
            &a,
            &OracleSettings {
                paths: 10_000,
                step: 1.0 / 64.0,
                seed: 4,
                coarsen,
            },
        )
        .unwrap()
    };
    // Same increments, left points on the h and h/2 grids.
    let (fine, coarse) = (run(1), run(2));
    for (f, g) in [
        (fine.w1.gmab, coarse.w1.gmab),
        (fine.w1.db, coarse.w1.db),
        (fine.w1.sb, coarse.w1.sb),
    ] {
        assert!((f.value - g.value).abs() < 0.5 * f.std_error, "{f:?} {g:?}");
    }
}

#[test]
fn oracle_rejects_too_few_paths() {
    let m = table1_model(3.0, ForwardCurve::flat_zero());
    let c = table1_contract(3.0);
    let a = Actuarial {
        survival: SurvivalModel::new(MortalityParams::table1(40.0)).unwrap(),
        surrender: SurrenderParams::new(0.05, 0.01, 10.0, 1e-4).unwrap(),
    };
    let s = OracleSettings {
        paths: 0,
        ..Default::default()
    };
    assert!(simulate_contract(&c, &m, &a, &s).is_err());
    let s = OracleSettings {
        step: 0.3,
        paths: 10_000,
        ..Default::default()
    };
    assert!(simulate_contract(&c, &m, &a, &s).is_err());
}

#[test]
fn survival_simulation_without_mortality_noise_is_the_closed_form() {
    let mut p = MortalityParams::table1(40.0);
    p.ou_sigma = 0.0;
    let closed = SurvivalModel::new(p).unwrap().survival_probability(5.0);
    let sim = simulate_survival(&p, 5.0, 10, 1, 1.0 / 256.0).unwrap();
    assert!((sim.value - closed).abs() < 1e-7, "{} vs {closed}", sim.value);
    assert!(sim.std_error < 1e-15);
}

#[test]
fn survival_simulation_matches_closed_form() {
    let p = MortalityParams::table1(60.0);
    let closed = SurvivalModel::new(p).unwrap().survival_probability(10.0);
    let sim = simulate_survival(&p, 10.0, 50_000, 3, 1.0 / 32.0).unwrap();
    assert!((sim.value - closed).abs() < 4.0 * sim.std_error + 1e-5, "{sim:?} vs {closed}");
}
