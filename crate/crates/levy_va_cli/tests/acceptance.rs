//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use levy_va::actuarial::{approximation_error_bounds, SurvivalModel};
use levy_va::integrate::{adaptive_quadrature, IntegrandBundle};
use levy_va::levy_core::nig_cumulant;
use levy_va::oracle::{simulate_contract, simulate_survival, OracleReport};
use levy_va::pricing::{
    bound_constants, build_db_integrands, build_gmab_integrands, build_sb_integrands,
    damped_call_transform, gaussian_log_transform, integrate_bundle, price_sb, price_va,
    IntegratorConfig, Method, PriceReport,
};
use levy_va::Complex64;
use levy_va_cli::config::Built;
use levy_va_cli::{run, Command, RunConfig};

const SEED: u64 = 20_240_601;
const BENCH_BATCHES: usize = 10;
const BENCH_SAMPLES: usize = 100_000;
const ORACLE_PATHS: usize = 100_000;
const ORACLE_STEP: f64 = 1.0 / 256.0;
const EPS: f64 = 1e-4;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn table1(maturity: f64) -> RunConfig {
    let (mut cfg, _) = RunConfig::load(&root().join("table1.cfg")).expect("table1.cfg loads");
    cfg.contract.maturity = maturity;
    cfg.integration.seed = SEED;
    cfg.integration.batches = BENCH_BATCHES;
    cfg.integration.samples_per_batch = BENCH_SAMPLES;
    cfg.integration.oracle_paths = ORACLE_PATHS;
    cfg.integration.oracle_step = ORACLE_STEP;
    cfg.surrender.eps_tail = EPS;
    cfg.surrender.trunc_level = None;
    cfg
}

fn build(cfg: &RunConfig) -> Built {
    cfg.build(None, Some(&root())).expect("config builds")
}

fn mc_only(b: &Built) -> IntegratorConfig {
    IntegratorConfig {
        method: Method::MonteCarlo,
        ..b.integrator.clone()
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, o: &Outcome, secs: f64) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {tag} ({secs:.1}s) {}", o.detail);
}

/// MC and quadrature of one bundle: (mc, mc_se, quad, quad_err).
fn both(b: &IntegrandBundle, built: &Built) -> (f64, f64, f64, f64) {
    let m = integrate_bundle(b, &mc_only(built)).expect("mc");
    let q = adaptive_quadrature(b, &built.integrator.quad).expect("quadrature");
    (m.value, m.std_error, q.value.re, q.error_estimate)
}

fn criterion1() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for t in [3.0, 4.0] {
        let b = build(&table1(t));
        let (a1, a2) = build_gmab_integrands(&b.contract, &b.model, &b.actuarial.surrender).unwrap();
        for bundle in [&a1, &a2] {
            let (m, se, q, _) = both(bundle, &b);
            let bias = (m - q).abs() / q.abs();
            let rel_se = se / m.abs();
            let ok = bias < 0.005 && rel_se < 0.005;
            pass &= ok;
            detail.push(format!(
                "T={t} {}: quad={q:.6} mc={m:.6} |bias|={:.3}% se={:.3}%",
                bundle.label,
                100.0 * bias,
                100.0 * rel_se
            ));
        }
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn criterion2() -> Outcome {
    let b = build(&table1(4.0));
    let s = &b.actuarial.surrender;
    let mut bundles = Vec::new();
    for d in build_db_integrands(&b.contract, &b.model, s).unwrap() {
        if d.j >= 1 {
            bundles.extend(d.a1);
            bundles.push(d.a2);
        }
    }
    let sb = build_sb_integrands(&b.contract, &b.model, s).unwrap();
    let b11_absent = sb[0].b1.is_none();
    bundles.extend(sb[1].b1.clone());
    bundles.push(sb[1].b2.clone());
    let sb_price = price_sb(&b.contract, &b.model, &b.actuarial, &b.integrator).unwrap();
    let b11 = sb_price
        .integrals
        .iter()
        .find(|e| e.label == "sb.B1[i=1]")
        .map(|e| e.value);
    let mut pass = b11_absent && b11 == Some(1.0);
    let mut worst = (0.0f64, String::new());
    for bundle in &bundles {
        let (m, se, q, qe) = both(bundle, &b);
        let z = (m - q).abs() / (se * se + qe * qe).sqrt();
        pass &= z <= 3.0;
        if z >= worst.0 {
            worst = (z, bundle.label.clone());
        }
    }
    Outcome {
        pass,
        detail: format!(
            "{} integrals, worst |z|={:.2} ({}); B1^1={:?}",
            bundles.len(),
            worst.0,
            worst.1,
            b11
        ),
    }
}

struct OracleRun {
    t: f64,
    fourier: PriceReport,
    oracle: OracleReport,
    bound: [f64; 3],
}

fn oracle_runs() -> Vec<OracleRun> {
    [3.0, 4.0]
        .into_iter()
        .map(|t| {
            let b = build(&table1(t));
            let fourier = price_va(&b.contract, &b.model, &b.actuarial, &b.integrator).unwrap();
            let oracle = simulate_contract(&b.contract, &b.model, &b.actuarial, &b.oracle).unwrap();
            let k = bound_constants(&b.contract, &b.model, &b.actuarial.survival).unwrap();
            let e = approximation_error_bounds(EPS, &k).unwrap();
            OracleRun {
                t,
                fourier,
                oracle,
                bound: [e.gmab, e.db, e.sb],
            }
        })
        .collect()
}

fn components(r: &OracleRun) -> [(&'static str, f64, f64); 3] {
    let f = &r.fourier;
    [
        ("GMAB", f.gmab, f.std_errors.gmab),
        ("DB", f.db, f.std_errors.db),
        ("SB", f.sb, f.std_errors.sb),
    ]
}

fn criterion3(runs: &[OracleRun]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for r in runs {
        let o = [r.oracle.w1.gmab, r.oracle.w1.db, r.oracle.w1.sb];
        for ((name, f, fse), o) in components(r).into_iter().zip(o) {
            let z = (f - o.value).abs() / (fse * fse + o.std_error * o.std_error).sqrt();
            pass &= z <= 3.0;
            detail.push(format!("T={} {name}: fourier={f:.5} oracle={:.5} z={z:.2}", r.t, o.value));
        }
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn criterion4() -> Outcome {
    let cfg = table1(3.0);
    let b = build(&cfg);
    let params = b.actuarial.survival.params;
    let mut pass = true;
    let mut detail = Vec::new();
    for t in [1.0, 5.0, 10.0] {
        let closed = b.actuarial.survival.survival_probability(t);
        let sim = simulate_survival(&params, t, 1_000_000, SEED, 1.0 / 64.0).unwrap();
        let rel = (sim.value - closed).abs() / closed;
        pass &= rel < 0.005;
        detail.push(format!("t={t}: closed={closed:.6} sim={:.6} rel={:.2e}", sim.value, rel));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

/// Trapezoid on [a, b] with n intervals and the h²/12 endpoint derivative correction.
fn corrected_trapezoid(
    f: impl Fn(f64) -> Complex64,
    df: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    n: usize,
) -> Complex64 {
    let h = (b - a) / n as f64;
    let mut s = (f(a) + f(b)) * 0.5;
    for k in 1..n {
        s += f(a + k as f64 * h);
    }
    s * h - (df(b) - df(a)) * (h * h / 12.0)
}

fn criterion5() -> Outcome {
    let n = 1 << 16;
    let c = 0.05 * 1.0;
    let r = 1.5;
    let xs: Vec<f64> = (0..=400).map(|k| -20.0 + 0.1 * k as f64).collect();
    let mut sup_f = 0.0f64;
    let mut sup_g = 0.0f64;
    for &x in &xs {
        // f(y) = e^{−c y²} against e^{−ixy}.
        let f = |y: f64| Complex64::new(0.0, -x * y).exp() * (-c * y * y).exp();
        let df = |y: f64| f(y) * Complex64::new(-2.0 * c * y, -x);
        let num = corrected_trapezoid(f, df, -40.0, 40.0, n);
        let exact = gaussian_log_transform(c, x).exp();
        sup_f = sup_f.max((num - exact).norm());
        // g(y) = (eʸ − 1)⁺ against e^{−(r+ix)y}, supported on y ≥ 0.
        let z = Complex64::new(r, x);
        let g = |y: f64| ((y).exp() - 1.0) * (-z * y).exp();
        let dg = |y: f64| (y.exp() - (y.exp() - 1.0) * z) * (-z * y).exp();
        let num = corrected_trapezoid(g, dg, 0.0, 40.0, n);
        sup_g = sup_g.max((num - damped_call_transform(r, x)).norm());
    }
    Outcome {
        pass: sup_f < 1e-8 && sup_g < 1e-8,
        detail: format!("sup|f̂ err|={sup_f:.2e} sup|ĝ err|={sup_g:.2e}"),
    }
}

fn criterion6(runs: &[OracleRun]) -> Outcome {
    let b = build(&table1(4.0));
    let mut fails = Vec::new();
    let zero = Complex64::new(0.0, 0.0);
    for (name, p) in [("theta1", b.model.theta1()), ("theta2", b.model.theta2())] {
        if nig_cumulant(p, zero).unwrap().norm() != 0.0 {
            fails.push(format!("{name}(0)≠0"));
        }
        for u in [0.3, 1.7, 5.0] {
            let z = Complex64::new(0.05, u);
            let a = nig_cumulant(p, z).unwrap();
            let c = nig_cumulant(p, z.conj()).unwrap();
            if (a.conj() - c).norm() > 1e-12 * a.norm().max(1.0) {
                fails.push(format!("{name} conjugate symmetry at {z}"));
            }
        }
    }
    let t = b.contract.maturity;
    if b.model.sigma_bond(t, t) != 0.0 {
        fails.push("Sigma(T,T)≠0".into());
    }
    if b.contract.penalty.log_penalty(t) != 0.0 {
        fails.push("p(T)≠0".into());
    }
    let surv: &SurvivalModel = &b.actuarial.survival;
    if surv.survival_probability(0.0) != 1.0 {
        fails.push("survival(0)≠1".into());
    }
    let q: f64 = (1..=b.contract.n())
        .map(|i| surv.death_interval_probability(i, &b.contract).unwrap())
        .sum();
    let closure = (q + surv.survival_probability(t) - 1.0).abs();
    if closure > 1e-12 {
        fails.push(format!("sum q + survival - 1 = {closure:.1e}"));
    }
    let s = &b.actuarial.surrender;
    let (a1, a2) = build_gmab_integrands(&b.contract, &b.model, s).unwrap();
    let mut bundles = vec![a1, a2];
    for d in build_db_integrands(&b.contract, &b.model, s).unwrap() {
        bundles.extend(d.a1);
        bundles.push(d.a2);
    }
    for d in build_sb_integrands(&b.contract, &b.model, s).unwrap() {
        bundles.extend(d.b1);
        bundles.push(d.b2);
    }
    for bundle in &bundles {
        let x: Vec<f64> = (0..bundle.dimension()).map(|k| 0.37 + 0.81 * k as f64).collect();
        let nx: Vec<f64> = x.iter().map(|v| -v).collect();
        let (p, m) = (bundle.eval(&x), bundle.eval(&nx));
        if (p.conj() - m).norm() > 1e-12 * p.norm().max(1e-300) {
            fails.push(format!("{} conjugate symmetry", bundle.label));
        }
    }
    let mut worst = 0.0f64;
    for r in runs {
        for m in &r.oracle.martingale {
            for e in [m.discounted_stock, m.discount_ratio] {
                let z = (e.value - 1.0).abs() / e.std_error.max(1e-300);
                worst = worst.max(if e.std_error == 0.0 && e.value == 1.0 { 0.0 } else { z });
            }
        }
    }
    if worst > 4.0 {
        fails.push(format!("martingale |z|={worst:.2}"));
    }
    Outcome {
        pass: fails.is_empty(),
        detail: if fails.is_empty() {
            format!("all invariants hold; {} bundles symmetric; worst martingale |z|={worst:.2}", bundles.len())
        } else {
            fails.join("; ")
        },
    }
}

fn criterion7() -> Outcome {
    let price = |cfg: &RunConfig| {
        let b = build(cfg);
        price_va(&b.contract, &b.model, &b.actuarial, &b.integrator).unwrap()
    };
    let mut gmab = Vec::new();
    let mut sb = Vec::new();
    for beta in [0.0, 0.05, 0.1] {
        let mut cfg = table1(4.0);
        cfg.surrender.beta = beta;
        let r = price(&cfg);
        gmab.push(r.gmab);
        sb.push(r.sb);
    }
    let mut va = Vec::new();
    for delta in [0.005, 0.01, 0.02] {
        let mut cfg = table1(4.0);
        cfg.contract.guarantee_rate = delta;
        va.push(price(&cfg).total);
    }
    let up = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0]);
    let down = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
    Outcome {
        pass: up(&sb) && down(&gmab) && up(&va),
        detail: format!("T=4 beta_s 0,0.05,0.1: SB={sb:.4?} GMAB={gmab:.4?}; delta 0.005,0.01,0.02: VA={va:.4?}"),
    }
}

fn criterion8(runs: &[OracleRun]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for r in runs {
        let o = [r.oracle.w2.gmab, r.oracle.w2.db, r.oracle.w2.sb];
        for (((name, f, _), o), bound) in components(r).into_iter().zip(o).zip(r.bound) {
            let gap = (o.value - f).abs();
            pass &= gap <= bound;
            detail.push(format!("T={} {name}: |W2-W1|={gap:.5} bound={bound:.5}", r.t));
        }
        let ex = r.oracle.exceedance;
        let se = (EPS * (1.0 - EPS) / r.oracle.paths as f64).sqrt().max(ex.std_error);
        pass &= ex.value <= EPS + 3.0 * se;
        detail.push(format!("T={} exceedance={:.2e}", r.t, ex.value));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn criterion9() -> Outcome {
    let mut cfg = table1(3.0);
    cfg.integration.batches = 2;
    cfg.integration.samples_per_batch = 5_000;
    cfg.integration.oracle_paths = 10_000;
    cfg.integration.oracle_step = 1.0 / 64.0;
    let mut fails = Vec::new();
    for cmd in [Command::Price, Command::Sweep, Command::Benchmark, Command::Oracle] {
        let a = in_pool(1, || run(cmd, &cfg, None, Some(&root())).unwrap().to_bytes().unwrap());
        let b = in_pool(3, || run(cmd, &cfg, None, Some(&root())).unwrap().to_bytes().unwrap());
        let c = in_pool(3, || run(cmd, &cfg, None, Some(&root())).unwrap().to_bytes().unwrap());
        if a != b || b != c {
            fails.push(cmd.name());
        }
    }
    // The binary, with the worker count from the environment.
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, cfg.to_toml().unwrap()).unwrap();
    let mut outs = Vec::new();
    for workers in ["1", "4"] {
        let out = dir.path().join(format!("price{workers}.csv"));
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_levy-va"))
            .args(["price", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .env("VA_WORKERS", workers)
            .status()
            .unwrap();
        assert!(status.success());
        outs.push(std::fs::read(&out).unwrap());
    }
    if outs[0] != outs[1] {
        fails.push("binary price");
    }
    Outcome {
        pass: fails.is_empty(),
        detail: if fails.is_empty() {
            "price, sweep, benchmark, oracle and the binary rerun byte-identically across worker counts".into()
        } else {
            format!("differs: {}", fails.join(", "))
        },
    }
}

fn timed(n: usize, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    report(n, &o, t.elapsed().as_secs_f64());
    o.pass
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags; a name filter that excludes us means skip.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return ExitCode::SUCCESS;
    }
    let mut ok = true;
    ok &= timed(1, criterion1);
    ok &= timed(2, criterion2);
    let t = Instant::now();
    let runs = oracle_runs();
    println!("oracle runs done in {:.1}s", t.elapsed().as_secs_f64());
    ok &= timed(3, || criterion3(&runs));
    ok &= timed(4, criterion4);
    ok &= timed(5, criterion5);
    ok &= timed(6, || criterion6(&runs));
    ok &= timed(7, criterion7);
    ok &= timed(8, || criterion8(&runs));
    ok &= timed(9, criterion9);
    println!("acceptance: {}", if ok { "all criteria pass" } else { "some criteria FAIL" });
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
