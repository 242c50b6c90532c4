//! Fourier prices of the GMAB, death benefit and surrender benefit.

mod integrand;

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::actuarial::{
    tail_level, BoundConstants, DbBoundTerm, GmabBoundTerm, SbBoundTerm, SurrenderParams,
    SurvivalModel,
};
use crate::error::{invalid, Result, VaError};
use crate::integrate::{
    adaptive_quadrature, mc_importance_integrate, rng::derive_seed, Integrand, McSettings,
    QuadSettings,
};
use crate::market_model::{spread_offset, w_coefficient, ContractSpec, HybridMarketModel, WKind};

pub use crate::integrate::IntegrandBundle;
pub use integrand::{
    damped_call_transform, gaussian_log_transform, BaseMeasure, CoordKind, Coordinate,
    SpreadIntegrand,
};

/// Proposal variances: surrender coordinates and the damped payoff coordinate
/// for the GMAB and DB, one common value for the SB.
pub const GAUSS_PROPOSAL_VAR: f64 = 0.25;
pub const DAMPED_PROPOSAL_VAR: f64 = 1.0;
pub const SB_PROPOSAL_VAR: f64 = 0.16;
pub const DAMPED_TRUNCATION: f64 = 40.0;

const ENVELOPE_DROP: f64 = 1e-12;
const ENVELOPE_STEP: f64 = 0.25;

const RESIDUE_REL: f64 = 1e-10;
const RESIDUE_ABS: f64 = 1e-14;

/// Mortality and surrender assumptions.
#[derive(Debug, Clone, PartialEq)]
pub struct Actuarial {
    pub survival: SurvivalModel,
    pub surrender: SurrenderParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Quadrature up to `quadrature_max_dim`, Monte Carlo above.
    Auto,
    MonteCarlo,
    Quadrature,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::MonteCarlo => "mc",
            Method::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub mc: McSettings,
    pub quad: QuadSettings,
    pub quadrature_max_dim: usize,
    pub method: Method,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            mc: McSettings::default(),
            quad: QuadSettings::default(),
            quadrature_max_dim: 1,
            method: Method::Auto,
        }
    }
}

/// One integral, already multiplied by its prefactor.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralEstimate {
    pub label: String,
    pub dimension: usize,
    pub value: f64,
    /// Batch standard error for Monte Carlo, error estimate for quadrature.
    pub std_error: f64,
    pub method: Method,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentPrice {
    pub value: f64,
    pub std_error: f64,
    pub integrals: Vec<IntegralEstimate>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentErrors {
    pub gmab: f64,
    pub db: f64,
    pub sb: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceReport {
    pub gmab: f64,
    pub db: f64,
    pub sb: f64,
    pub total: f64,
    pub std_errors: ComponentErrors,
    pub components: Vec<IntegralEstimate>,
    pub fingerprint: String,
}

/// Hex sha256 of the Debug rendering of the parts.
pub fn fingerprint(parts: &[&dyn Debug]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(format!("{p:?}").as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn check_real(label: &str, v: Complex64) -> Result<f64> {
    if v.im.abs() > (RESIDUE_REL * v.re.abs()).max(RESIDUE_ABS) {
        return Err(VaError::ImaginaryResidue {
            label: label.to_string(),
            real: v.re,
            imag: v.im,
        });
    }
    Ok(v.re)
}

/// Integrate one bundle with the configured method. Monte Carlo seeds are
/// derived from the base seed and the bundle label.
pub fn integrate_bundle(bundle: &IntegrandBundle, cfg: &IntegratorConfig) -> Result<IntegralEstimate> {
    let d = bundle.dimension();
    let method = match cfg.method {
        Method::Auto if d <= cfg.quadrature_max_dim => Method::Quadrature,
        Method::Auto => Method::MonteCarlo,
        m => m,
    };
    let (value, std_error, evaluations) = match method {
        Method::Quadrature => {
            let q = adaptive_quadrature(bundle, &cfg.quad)?;
            (q.value, q.error_estimate, q.evaluations)
        }
        _ => {
            let settings = McSettings {
                seed: derive_seed(cfg.mc.seed, &bundle.label),
                ..cfg.mc.clone()
            };
            let e = mc_importance_integrate(bundle, &settings)?;
            (e.value, e.std_error, e.evaluations)
        }
    };
    Ok(IntegralEstimate {
        label: bundle.label.clone(),
        dimension: d,
        value: check_real(&bundle.label, value)?,
        std_error,
        method,
        evaluations,
    })
}

fn damping(c_base: f64, span: f64, dim: usize) -> f64 {
    (-c_base * span).exp() / (2.0 * PI).powi(dim as i32)
}

/// Surrender coordinates l = 1..=count for the spread D(t_l) built on the bond
/// maturing at `horizon`. With β_s = 0 the surrender factors are constant, so
/// the coordinates are pinned at 0 and dropped unless `keep_all` is set.
fn surrender_coords(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    surrender: &SurrenderParams,
    count: usize,
    horizon: f64,
    keep_all: bool,
) -> Result<Vec<Coordinate>> {
    if surrender.beta_s == 0.0 && !keep_all {
        return Ok(Vec::new());
    }
    let grid = &contract.surrender_grid;
    (1..=count)
        .map(|l| {
            let c = surrender.beta_s * (grid[l + 1] - grid[l]);
            Ok(Coordinate {
                kind: CoordKind::Gaussian {
                    c: if c > 0.0 { c } else { 1.0 },
                },
                window: grid[l],
                phase: spread_offset(contract, model, horizon, grid[l], true)?,
                maturity: horizon,
            })
        })
        .collect()
}

fn proposal(coords: &[Coordinate], common: Option<f64>) -> (Vec<f64>, Vec<f64>) {
    coords
        .iter()
        .map(|c| match c.kind {
            CoordKind::Gaussian { c } => (
                common.unwrap_or(GAUSS_PROPOSAL_VAR).sqrt(),
                8.0 * (2.0 * c).sqrt(),
            ),
            CoordKind::Damped { .. } => (
                common.unwrap_or(DAMPED_PROPOSAL_VAR).sqrt(),
                DAMPED_TRUNCATION,
            ),
        })
        .unzip()
}

/// Widest point along axis k where |f| stays above ENVELOPE_DROP·|f(0)|.
fn envelope_edge(integrand: &SpreadIntegrand, k: usize, limit: f64) -> f64 {
    let mut x = vec![0.0; integrand.dim()];
    let f0 = integrand.eval(&x).norm();
    let mut edge = 0.0;
    let steps = (limit / ENVELOPE_STEP).ceil() as usize;
    for n in 1..=steps {
        x[k] = n as f64 * ENVELOPE_STEP;
        if integrand.eval(&x).norm() > ENVELOPE_DROP * f0 {
            edge = x[k];
        }
    }
    edge
}

fn bundle(
    label: String,
    prefactor: f64,
    integrand: SpreadIntegrand,
    common_var: Option<f64>,
) -> IntegrandBundle {
    let (mut std, trunc) = proposal(integrand.coords(), common_var);
    // The damped integrand decays like the characteristic function of the
    // spread, slowly for short horizons. Keep the proposal at least as wide
    // as that envelope, otherwise the weights are unbounded.
    let width = (-2.0 * ENVELOPE_DROP.ln()).sqrt();
    for (k, c) in integrand.coords().iter().enumerate() {
        if matches!(c.kind, CoordKind::Damped { .. }) {
            std[k] = std[k].max(envelope_edge(&integrand, k, trunc[k]) / width);
        }
    }
    IntegrandBundle::new(label, prefactor, Arc::new(integrand), std, trunc)
}

fn forward_integrand(
    model: &HybridMarketModel,
    horizon: f64,
    coords: Vec<Coordinate>,
) -> Result<SpreadIntegrand> {
    let log_const = -model.integrated_drift(horizon, horizon)?;
    SpreadIntegrand::new(model, BaseMeasure::Bond(horizon), horizon, log_const, coords)
}

fn spot_integrand(
    model: &HybridMarketModel,
    horizon: f64,
    coords: Vec<Coordinate>,
) -> Result<SpreadIntegrand> {
    let log_const = -model.equity_drift_omega(horizon)?;
    SpreadIntegrand::new(model, BaseMeasure::Spot, horizon, log_const, coords)
}

fn validate_inputs(contract: &ContractSpec, model: &HybridMarketModel, surrender: &SurrenderParams) -> Result<()> {
    contract.validate()?;
    model.validate()?;
    surrender.validate()
}

/// The A₁ (survival of surrender) and A₂ (damped call) integrands of the GMAB.
pub fn build_gmab_integrands(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    surrender: &SurrenderParams,
) -> Result<(IntegrandBundle, IntegrandBundle)> {
    validate_inputs(contract, model, surrender)?;
    gmab_like("gmab", contract, model, surrender, contract.maturity, contract.k(), 0.0)
}

/// GMAB integrands with maturity `horizon`, the surrender factors of dates
/// 1..k−1, and damped-coordinate shift `shift`.
fn gmab_like(
    tag: &str,
    contract: &ContractSpec,
    model: &HybridMarketModel,
    surrender: &SurrenderParams,
    horizon: f64,
    k: usize,
    shift: f64,
) -> Result<(IntegrandBundle, IntegrandBundle)> {
    let grid = &contract.surrender_grid;
    let span = grid[k] - grid[1];
    let gauss = surrender_coords(contract, model, surrender, k - 1, horizon, false)?;
    let d = gauss.len();
    let m = forward_integrand(model, horizon, gauss.clone())?;
    let mut ncoords = gauss;
    ncoords.push(Coordinate {
        kind: CoordKind::Damped {
            r: contract.dampening_r,
            shift,
        },
        window: horizon,
        phase: spread_offset(contract, model, horizon, horizon, false)?,
        maturity: horizon,
    });
    let n = forward_integrand(model, horizon, ncoords)?;
    Ok((
        bundle(format!("{tag}.A1"), damping(surrender.c_base, span, d), m, None),
        bundle(format!("{tag}.A2"), damping(surrender.c_base, span, d + 1), n, None),
    ))
}

/// One mortality date of the death benefit. `a1 = None` stands for the
/// constant 1 (no surrender date strictly before t̄ᵢ).
#[derive(Debug, Clone)]
pub struct DbTerm {
    pub i: usize,
    pub j: usize,
    pub time: f64,
    pub a1: Option<IntegrandBundle>,
    pub a2: IntegrandBundle,
}

/// j(i): the number of interior surrender dates strictly before t̄ᵢ.
pub fn db_block(contract: &ContractSpec, i: usize) -> usize {
    contract.surrender_dates_before(contract.mortality_grid[i])
}

pub fn build_db_integrands(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    surrender: &SurrenderParams,
) -> Result<Vec<DbTerm>> {
    validate_inputs(contract, model, surrender)?;
    let grid = &contract.surrender_grid;
    let t_mat = contract.maturity;
    let mut out = Vec::new();
    for i in 1..=contract.n() {
        let tb = contract.mortality_grid[i];
        let j = db_block(contract, i);
        let damped = Coordinate {
            kind: CoordKind::Damped {
                r: contract.dampening_r,
                shift: contract.penalty.log_penalty(tb),
            },
            window: tb,
            phase: w_coefficient(contract, model, WKind::Death(i))?,
            maturity: tb,
        };
        if j == 0 {
            let n = forward_integrand(model, tb, vec![damped])?;
            out.push(DbTerm {
                i,
                j,
                time: tb,
                a1: None,
                a2: bundle(format!("db.A0[i={i}]"), damping(0.0, 0.0, 1), n, None),
            });
            continue;
        }
        let span = grid[j + 1] - grid[1];
        let gauss = surrender_coords(contract, model, surrender, j, t_mat, false)?;
        let d = gauss.len();
        let m = forward_integrand(model, tb, gauss.clone())?;
        let mut ncoords = gauss;
        ncoords.push(damped);
        let n = forward_integrand(model, tb, ncoords)?;
        out.push(DbTerm {
            i,
            j,
            time: tb,
            a1: Some(bundle(
                format!("db.A1[j={j},i={i}]"),
                damping(surrender.c_base, span, d),
                m,
                None,
            )),
            a2: bundle(
                format!("db.A2[j={j},i={i}]"),
                damping(surrender.c_base, span, d + 1),
                n,
                None,
            ),
        });
    }
    Ok(out)
}

/// The GMAB-style approximation of each death-benefit term: the GMAB
/// integrands with maturity t̄ᵢ and surrender dates t₁..t_{j+1}.
pub fn build_db_approx_integrands(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    surrender: &SurrenderParams,
) -> Result<Vec<DbTerm>> {
    validate_inputs(contract, model, surrender)?;
    let mut out = Vec::new();
    for i in 1..=contract.n() {
        let tb = contract.mortality_grid[i];
        let j = db_block(contract, i);
        let (a1, a2) = gmab_like(
            &format!("dbx[i={i}]"),
            contract,
            model,
            surrender,
            tb,
            j + 1,
            0.0,
        )?;
        out.push(DbTerm {
            i,
            j,
            time: tb,
            a1: if j == 0 { None } else { Some(a1) },
            a2,
        });
    }
    Ok(out)
}

/// One surrender date of the SB. `b1 = None` stands for B₁¹ = 1.
#[derive(Debug, Clone)]
pub struct SbTerm {
    pub i: usize,
    pub time: f64,
    pub b1: Option<IntegrandBundle>,
    pub b2: IntegrandBundle,
}

pub fn build_sb_integrands(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    surrender: &SurrenderParams,
) -> Result<Vec<SbTerm>> {
    validate_inputs(contract, model, surrender)?;
    let grid = &contract.surrender_grid;
    let t_mat = contract.maturity;
    let c = surrender.c_base;
    let mut out = Vec::new();
    for i in 1..contract.k() {
        let ti = grid[i];
        let b1 = if i == 1 {
            None
        } else {
            let gauss = surrender_coords(contract, model, surrender, i - 1, t_mat, false)?;
            let d = gauss.len();
            let m = spot_integrand(model, ti, gauss)?;
            Some(bundle(
                format!("sb.B1[i={i}]"),
                damping(c, ti - grid[1], d),
                m,
                Some(SB_PROPOSAL_VAR),
            ))
        };
        let gauss = surrender_coords(contract, model, surrender, i, t_mat, false)?;
        let d = gauss.len();
        let n = spot_integrand(model, ti, gauss)?;
        out.push(SbTerm {
            i,
            time: ti,
            b1,
            b2: bundle(
                format!("sb.B2[i={i}]"),
                damping(c, grid[i + 1] - grid[1], d),
                n,
                Some(SB_PROPOSAL_VAR),
            ),
        });
    }
    Ok(out)
}

fn combine(terms: impl IntoIterator<Item = (f64, Vec<IntegralEstimate>)>) -> ComponentPrice {
    let mut value = 0.0;
    let mut var = 0.0;
    let mut integrals = Vec::new();
    for (coef, ests) in terms {
        for e in ests {
            value += coef * e.value;
            var += (coef * e.std_error).powi(2);
            integrals.push(e);
        }
    }
    ComponentPrice {
        value,
        std_error: var.sqrt(),
        integrals,
    }
}

fn optional(b: &Option<IntegrandBundle>, cfg: &IntegratorConfig) -> Result<Option<IntegralEstimate>> {
    b.as_ref().map(|b| integrate_bundle(b, cfg)).transpose()
}

pub fn price_gmab(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    actuarial: &Actuarial,
    cfg: &IntegratorConfig,
) -> Result<ComponentPrice> {
    let (m, n) = build_gmab_integrands(contract, model, &actuarial.surrender)?;
    let t = contract.maturity;
    let coef = actuarial.survival.survival_probability(t) * model.zero_bond_price(t) * contract.guarantee(t);
    let a1 = integrate_bundle(&m, cfg)?;
    let a2 = integrate_bundle(&n, cfg)?;
    Ok(combine([(coef, vec![a1, a2])]))
}

fn price_db_terms(
    terms: Vec<DbTerm>,
    contract: &ContractSpec,
    model: &HybridMarketModel,
    actuarial: &Actuarial,
    cfg: &IntegratorConfig,
) -> Result<ComponentPrice> {
    let mut parts = Vec::new();
    for t in &terms {
        let q = actuarial.survival.death_interval_probability(t.i, contract)?;
        let coef = q * model.zero_bond_price(t.time) * contract.guarantee(t.time);
        let mut ests = Vec::new();
        match optional(&t.a1, cfg)? {
            Some(e) => ests.push(e),
            None => parts.push((coef, vec![unit_estimate(&t.a2.label)])),
        }
        ests.push(integrate_bundle(&t.a2, cfg)?);
        parts.push((coef, ests));
    }
    Ok(combine(parts))
}

fn unit_estimate(label: &str) -> IntegralEstimate {
    IntegralEstimate {
        label: format!("{label}:one"),
        dimension: 0,
        value: 1.0,
        std_error: 0.0,
        method: Method::Quadrature,
        evaluations: 0,
    }
}

pub fn price_db(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    actuarial: &Actuarial,
    cfg: &IntegratorConfig,
) -> Result<ComponentPrice> {
    let terms = build_db_integrands(contract, model, &actuarial.surrender)?;
    price_db_terms(terms, contract, model, actuarial, cfg)
}

pub fn price_db_approx(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    actuarial: &Actuarial,
    cfg: &IntegratorConfig,
) -> Result<ComponentPrice> {
    let terms = build_db_approx_integrands(contract, model, &actuarial.surrender)?;
    price_db_terms(terms, contract, model, actuarial, cfg)
}

pub fn price_sb(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    actuarial: &Actuarial,
    cfg: &IntegratorConfig,
) -> Result<ComponentPrice> {
    let terms = build_sb_integrands(contract, model, &actuarial.surrender)?;
    let mut parts = Vec::new();
    for t in &terms {
        let coef = contract.notional
            * contract.penalty.value(t.time)
            * actuarial.survival.survival_probability(t.time);
        let b1 = optional(&t.b1, cfg)?.unwrap_or_else(|| IntegralEstimate {
            label: "sb.B1[i=1]".into(),
            dimension: 0,
            value: 1.0,
            std_error: 0.0,
            method: Method::Quadrature,
            evaluations: 0,
        });
        let b2 = integrate_bundle(&t.b2, cfg)?;
        parts.push((coef, vec![b1]));
        parts.push((-coef, vec![b2]));
    }
    Ok(combine(parts))
}

pub fn price_va(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    actuarial: &Actuarial,
    cfg: &IntegratorConfig,
) -> Result<PriceReport> {
    let g = price_gmab(contract, model, actuarial, cfg)?;
    let d = price_db(contract, model, actuarial, cfg)?;
    let s = price_sb(contract, model, actuarial, cfg)?;
    let total = g.value + d.value + s.value;
    let std_errors = ComponentErrors {
        gmab: g.std_error,
        db: d.std_error,
        sb: s.std_error,
        total: (g.std_error.powi(2) + d.std_error.powi(2) + s.std_error.powi(2)).sqrt(),
    };
    let mut components = g.integrals;
    components.extend(d.integrals);
    components.extend(s.integrals);
    Ok(PriceReport {
        gmab: g.value,
        db: d.value,
        sb: s.value,
        total,
        std_errors,
        components,
        fingerprint: fingerprint(&[contract, model, actuarial, cfg]),
    })
}

/// E[e^{c·D}] for a single coordinate k of `integrand` at real c.
fn real_moment(integrand: &SpreadIntegrand, k: usize, c: f64) -> Result<f64> {
    let mut z = vec![Complex64::new(0.0, 0.0); integrand.coords().len()];
    z[k] = Complex64::new(c, 0.0);
    Ok(integrand.log_moment(&z)?.re.exp())
}

/// Σ_l (E[e^{D(t_l)}] + E[e^{−D(t_l)}]) under each measure that prices a
/// surrender factor: the T-forward measure, the spot measures of t₁..t_{K−1},
/// and the forward measures of the mortality dates after t₁.
pub fn tail_moment_sums(contract: &ContractSpec, model: &HybridMarketModel) -> Result<Vec<(String, f64)>> {
    let dummy = SurrenderParams::new(1.0, 0.0, 1.0, 0.1)?;
    let t_mat = contract.maturity;
    let k = contract.k();
    let sum = |ig: &SpreadIntegrand| -> Result<f64> {
        let mut s = 0.0;
        for l in 0..ig.coords().len() {
            s += real_moment(ig, l, 1.0)? + real_moment(ig, l, -1.0)?;
        }
        Ok(s)
    };
    let mut out = Vec::new();
    if k < 2 {
        return Ok(out);
    }
    let gauss = surrender_coords(contract, model, &dummy, k - 1, t_mat, true)?;
    out.push(("forward(T)".to_string(), sum(&forward_integrand(model, t_mat, gauss)?)?));
    for j in 1..k {
        let gauss = surrender_coords(contract, model, &dummy, j, t_mat, true)?;
        let ig = spot_integrand(model, contract.surrender_grid[j], gauss)?;
        out.push((format!("spot(t_{j})"), sum(&ig)?));
    }
    for i in 1..=contract.n() {
        let j = db_block(contract, i);
        if j == 0 {
            continue;
        }
        let tb = contract.mortality_grid[i];
        let gauss = surrender_coords(contract, model, &dummy, j, t_mat, true)?;
        out.push((format!("forward(tbar_{i})"), sum(&forward_integrand(model, tb, gauss)?)?));
    }
    Ok(out)
}

/// The truncation level L for tail budget ε: the largest level any measure needs.
pub fn tail_level_for(contract: &ContractSpec, model: &HybridMarketModel, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return invalid("tail probability eps must be > 0");
    }
    let mut l = 0.0f64;
    for (_, s) in tail_moment_sums(contract, model)? {
        l = l.max(tail_level(eps, s)?);
    }
    Ok(l)
}

/// E[(e^{X} − 1)²]^{1/2} where X is the terminal spread at `horizon`.
fn second_moment_constant(contract: &ContractSpec, model: &HybridMarketModel, horizon: f64) -> Result<f64> {
    let coord = Coordinate {
        kind: CoordKind::Damped {
            r: contract.dampening_r,
            shift: 0.0,
        },
        window: horizon,
        phase: spread_offset(contract, model, horizon, horizon, false)?,
        maturity: horizon,
    };
    let ig = forward_integrand(model, horizon, vec![coord])?;
    let m1 = real_moment(&ig, 0, 1.0)?;
    let m2 = real_moment(&ig, 0, 2.0)?;
    Ok((m2 - 2.0 * m1 + 1.0).max(0.0).sqrt())
}

/// C₂ = E^T[(e^{D(T)} − 1)²]^{1/2}.
pub fn gmab_c2(contract: &ContractSpec, model: &HybridMarketModel) -> Result<f64> {
    second_moment_constant(contract, model, contract.maturity)
}

/// C₂,ᵢ = E^{t̄ᵢ}[(e^{D(t̄ᵢ,t̄ᵢ) + p(t̄ᵢ)} − 1)²]^{1/2}.
pub fn db_c2(contract: &ContractSpec, model: &HybridMarketModel, i: usize) -> Result<f64> {
    if i == 0 || i > contract.n() {
        return Err(VaError::IndexOutOfRange {
            index: i,
            what: "mortality date (1..N)",
        });
    }
    second_moment_constant(contract, model, contract.mortality_grid[i])
}

/// Inputs of the W₁ → W₂ replacement bounds.
pub fn bound_constants(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    survival: &SurvivalModel,
) -> Result<BoundConstants> {
    let t = contract.maturity;
    let gmab = GmabBoundTerm {
        survival: survival.survival_probability(t),
        bond: model.zero_bond_price(t),
        guarantee: contract.guarantee(t),
        c2: gmab_c2(contract, model)?,
    };
    let mut db = Vec::new();
    for i in 1..=contract.n() {
        let tb = contract.mortality_grid[i];
        if db_block(contract, i) == 0 {
            continue;
        }
        db.push(DbBoundTerm {
            death_probability: survival.death_interval_probability(i, contract)?,
            bond: model.zero_bond_price(tb),
            guarantee: contract.guarantee(tb),
            c2: db_c2(contract, model, i)?,
        });
    }
    let sb = (1..contract.k())
        .map(|j| {
            let tj = contract.surrender_grid[j];
            SbBoundTerm {
                penalty: contract.penalty.value(tj),
                survival: survival.survival_probability(tj),
            }
        })
        .collect();
    Ok(BoundConstants {
        notional: contract.notional,
        gmab,
        db,
        sb,
    })
}
