//! The four commands and their CSV output.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use levy_va::actuarial::approximation_error_bounds;
use levy_va::integrate::{adaptive_quadrature, IntegrandBundle};
use levy_va::oracle::simulate_contract;
use levy_va::pricing::{
    bound_constants, build_db_integrands, build_gmab_integrands, build_sb_integrands, fingerprint,
    gmab_c2, integrate_bundle, price_va, IntegralEstimate, IntegratorConfig, Method,
};

use crate::config::{Built, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Price,
    Sweep,
    Benchmark,
    Oracle,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Price => "price",
            Command::Sweep => "sweep",
            Command::Benchmark => "benchmark",
            Command::Oracle => "oracle",
        }
    }
}

/// Command-line overrides of the [integration] section.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub batches: Option<usize>,
    pub samples: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.seed {
            cfg.integration.seed = s;
        }
        if let Some(b) = self.batches {
            cfg.integration.batches = b;
        }
        if let Some(n) = self.samples {
            cfg.integration.samples_per_batch = n;
        }
    }
}

/// A CSV result with a `# fingerprint=` comment line in front.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub fingerprint: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Table {
    fn new(fingerprint: String, header: &[&str]) -> Self {
        Self {
            fingerprint,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(out, "# fingerprint={}", self.fingerprint)?;
        {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut out);
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)
            .with_context(|| format!("writing {}", path.display()))
    }

    /// Value of `column` in the first row whose first field is `key`.
    pub fn lookup(&self, key: &str, column: &str) -> Option<&str> {
        let c = self.header.iter().position(|h| h == column)?;
        self.rows
            .iter()
            .find(|r| r[0] == key)
            .map(|r| r[c].as_str())
    }
}

pub fn run(cmd: Command, cfg: &RunConfig, text: Option<&str>, base_dir: Option<&Path>) -> Result<Table> {
    let built = cfg.build(text, base_dir)?;
    let fp = fingerprint(&[&cmd.name(), cfg]);
    match cmd {
        Command::Price => price(&built, cfg, fp),
        Command::Sweep => sweep(cfg, base_dir, fp),
        Command::Benchmark => benchmark(&built, fp),
        Command::Oracle => oracle(&built, cfg, fp),
    }
}

fn mc_columns(e: &IntegralEstimate, cfg: &RunConfig) -> [String; 3] {
    match e.method {
        Method::MonteCarlo => [
            cfg.integration.batches.to_string(),
            cfg.integration.samples_per_batch.to_string(),
            cfg.integration.seed.to_string(),
        ],
        _ => ["0".into(), "0".into(), cfg.integration.seed.to_string()],
    }
}

fn price(built: &Built, cfg: &RunConfig, fp: String) -> Result<Table> {
    let r = price_va(&built.contract, &built.model, &built.actuarial, &built.integrator)?;
    let mut t = Table::new(fp, &["component", "value", "std_error", "batches", "samples", "seed"]);
    let i = &cfg.integration;
    let agg = |name: &str, v: f64, se: f64| {
        vec![
            name.to_string(),
            num(v),
            num(se),
            i.batches.to_string(),
            i.samples_per_batch.to_string(),
            i.seed.to_string(),
        ]
    };
    t.push(agg("GMAB", r.gmab, r.std_errors.gmab));
    t.push(agg("DB", r.db, r.std_errors.db));
    t.push(agg("SB", r.sb, r.std_errors.sb));
    t.push(agg("VA", r.total, r.std_errors.total));
    for e in &r.components {
        let [b, s, seed] = mc_columns(e, cfg);
        t.push(vec![e.label.clone(), num(e.value), num(e.std_error), b, s, seed]);
    }
    Ok(t)
}

fn sweep(cfg: &RunConfig, base_dir: Option<&Path>, fp: String) -> Result<Table> {
    let Some(sw) = &cfg.sweep else {
        bail!("the sweep command needs a [sweep] section");
    };
    let ys: Vec<Option<f64>> = match &sw.y_values {
        Some(v) => v.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let y_param = sw.y_param.clone().unwrap_or_default();
    let mut t = Table::new(
        fp,
        &["x_param", "x_value", "y_param", "y_value", "component", "value", "std_error"],
    );
    for &x in &sw.x_values {
        for &y in &ys {
            let mut c = cfg.clone();
            c.set(&sw.x_param, x)?;
            if let Some(y) = y {
                c.set(&y_param, y)?;
            }
            let b = c
                .build(None, base_dir)
                .with_context(|| format!("sweep point {}={x}", sw.x_param))?;
            let r = price_va(&b.contract, &b.model, &b.actuarial, &b.integrator)?;
            let y_str = y.map(num).unwrap_or_default();
            for (name, v, se) in [
                ("GMAB", r.gmab, r.std_errors.gmab),
                ("DB", r.db, r.std_errors.db),
                ("SB", r.sb, r.std_errors.sb),
                ("VA", r.total, r.std_errors.total),
            ] {
                t.push(vec![
                    sw.x_param.clone(),
                    num(x),
                    y_param.clone(),
                    y_str.clone(),
                    name.to_string(),
                    num(v),
                    num(se),
                ]);
            }
        }
    }
    Ok(t)
}

/// Every integral of the contract, in pricing order.
pub fn all_bundles(built: &Built) -> Result<Vec<IntegrandBundle>> {
    let s = &built.actuarial.surrender;
    let (a1, a2) = build_gmab_integrands(&built.contract, &built.model, s)?;
    let mut out = vec![a1, a2];
    for d in build_db_integrands(&built.contract, &built.model, s)? {
        out.extend(d.a1);
        out.push(d.a2);
    }
    for b in build_sb_integrands(&built.contract, &built.model, s)? {
        out.extend(b.b1);
        out.push(b.b2);
    }
    Ok(out)
}

fn benchmark(built: &Built, fp: String) -> Result<Table> {
    let bundles = all_bundles(built)?;
    if let Some(b) = bundles.iter().find(|b| b.dimension() > 3) {
        bail!(
            "benchmark needs quadrature, which is limited to dimension 3; {} has dimension {}",
            b.label,
            b.dimension()
        );
    }
    let mc_cfg = IntegratorConfig {
        method: Method::MonteCarlo,
        ..built.integrator.clone()
    };
    let mut t = Table::new(
        fp,
        &[
            "integral",
            "dimension",
            "quadrature",
            "quad_error",
            "mc",
            "mc_std_error",
            "rel_diff",
            "z_score",
        ],
    );
    for b in &bundles {
        let q = adaptive_quadrature(b, &built.integrator.quad)
            .with_context(|| format!("quadrature of {}", b.label))?;
        let m = integrate_bundle(b, &mc_cfg)?;
        let qv = q.value.re;
        let comb = (m.std_error.powi(2) + q.error_estimate.powi(2)).sqrt();
        t.push(vec![
            b.label.clone(),
            b.dimension().to_string(),
            num(qv),
            num(q.error_estimate),
            num(m.value),
            num(m.std_error),
            num((m.value - qv) / qv),
            num(if comb > 0.0 { (m.value - qv) / comb } else { 0.0 }),
        ]);
    }
    Ok(t)
}

fn oracle(built: &Built, cfg: &RunConfig, fp: String) -> Result<Table> {
    let (c, m, a) = (&built.contract, &built.model, &built.actuarial);
    let fourier = price_va(c, m, a, &built.integrator)?;
    let sim = simulate_contract(c, m, a, &built.oracle)?;
    let eps = cfg.surrender.eps_tail;
    let bounds = approximation_error_bounds(eps, &bound_constants(c, m, &a.survival)?)?;
    let mut t = Table::new(fp, &["metric", "value", "std_error"]);
    let mut row = |name: String, v: f64, se: f64| t.push(vec![name, num(v), num(se)]);
    let comps = [
        ("gmab", fourier.gmab, fourier.std_errors.gmab, sim.w1.gmab, sim.w2.gmab, bounds.gmab),
        ("db", fourier.db, fourier.std_errors.db, sim.w1.db, sim.w2.db, bounds.db),
        ("sb", fourier.sb, fourier.std_errors.sb, sim.w1.sb, sim.w2.sb, bounds.sb),
        (
            "total",
            fourier.total,
            fourier.std_errors.total,
            sim.w1.total,
            sim.w2.total,
            bounds.gmab + bounds.db + bounds.sb,
        ),
    ];
    for (name, f, fse, w1, w2, bound) in comps {
        row(format!("fourier_w1.{name}"), f, fse);
        row(format!("oracle_w1.{name}"), w1.value, w1.std_error);
        row(format!("oracle_w2.{name}"), w2.value, w2.std_error);
        row(format!("bound.{name}"), bound, 0.0);
    }
    row("trunc_level".into(), a.surrender.trunc_l, 0.0);
    row("exceedance".into(), sim.exceedance.value, sim.exceedance.std_error);
    row("c2.closed_form".into(), gmab_c2(c, m)?, 0.0);
    row("c2.oracle".into(), sim.c2.value, sim.c2.std_error);
    for mc in &sim.martingale {
        row(
            format!("martingale.stock[t={}]", mc.time),
            mc.discounted_stock.value,
            mc.discounted_stock.std_error,
        );
        row(
            format!("martingale.bond[t={}]", mc.time),
            mc.discount_ratio.value,
            mc.discount_ratio.std_error,
        );
    }
    Ok(t)
}
