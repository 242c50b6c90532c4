//! Mortality (Gompertz-Makeham baseline times an OU improvement factor),
//! surrender intensities, and the truncation-error machinery for the bounded
//! surrender intensity.

use crate::error::{invalid, Result, VaError};
use crate::market_model::ContractSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MortalityParams {
    pub gm_b: f64,
    pub gm_z: f64,
    pub ou_kappa: f64,
    pub ou_lambda: f64,
    pub ou_sigma: f64,
    pub age_x: f64,
}

impl MortalityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gm_b > 0.0) {
            return invalid(format!("Gompertz b must be > 0, got {}", self.gm_b));
        }
        if !(self.ou_kappa >= 0.0) || !(self.ou_sigma >= 0.0) {
            return invalid("OU kappa and sigma must be >= 0");
        }
        if ![self.gm_z, self.ou_lambda, self.age_x]
            .iter()
            .all(|v| v.is_finite())
        {
            return invalid("mortality parameters must be finite");
        }
        Ok(())
    }

    /// Reference mortality parameters at age x.
    pub fn table1(age_x: f64) -> Self {
        Self {
            gm_b: 12.1104,
            gm_z: 76.139,
            ou_kappa: 0.4806,
            ou_lambda: 0.0195,
            ou_sigma: 0.0254,
            age_x,
        }
    }
}

/// λ^{m,0}(age) = (1/b)·exp((age − z)/b).
pub fn base_mortality(age: f64, params: &MortalityParams) -> f64 {
    ((age - params.gm_z) / params.gm_b).exp() / params.gm_b
}

/// (1 − e^{−ct})/c, continuous at c = 0.
fn phi(c: f64, t: f64) -> f64 {
    if c == 0.0 {
        t
    } else {
        -(-c * t).exp_m1() / c
    }
}

/// Closed-form survival probabilities with the constants c₁…c₅ cached.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalModel {
    pub params: MortalityParams,
    c: [f64; 5],
    lambda0: f64,
}

impl SurvivalModel {
    pub fn new(params: MortalityParams) -> Result<Self> {
        params.validate()?;
        let e = ((params.age_x - params.gm_z) / params.gm_b).exp();
        let b = params.gm_b;
        let c = [
            params.ou_kappa / b * e,
            1.0 / b - params.ou_lambda,
            params.ou_kappa - 1.0 / b,
            params.ou_sigma / b * e,
            1.0 / b,
        ];
        if c[2].abs() < 1e-8 {
            return invalid("survival closed form is singular for kappa = 1/b");
        }
        Ok(Self {
            params,
            c,
            lambda0: base_mortality(params.age_x, &params),
        })
    }

    pub fn constants(&self) -> [f64; 5] {
        self.c
    }

    /// Q(τ^m(x) > t) = exp(A_x(t) + B_x(t)·λ^{m,0}(x)).
    pub fn survival_probability(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let [c1, c2, c3, c4, c5] = self.c;
        let q = (c4 / c3).powi(2);
        let e2 = (2.0 * c5 * t).exp();
        let a = c1 / c3 * (c2 * t).exp() * phi(c2 + c3, t)
            + 0.5 * q * e2 * phi(2.0 * c5, t)
            - q * e2 * phi(2.0 * c5 + c3, t)
            - c1 / c3 * (c2 * t).exp() * phi(c2, t)
            + 0.5 * q * e2 * phi(2.0 * (c3 + c5), t);
        let bx = -phi(c3, t);
        (a + bx * self.lambda0).exp()
    }

    /// Q(τ^m ∈ [t̄_{i−1}, t̄_i)) on the contract's mortality grid.
    pub fn death_interval_probability(&self, i: usize, contract: &ContractSpec) -> Result<f64> {
        let g = &contract.mortality_grid;
        if i == 0 || i >= g.len() {
            return Err(VaError::IndexOutOfRange {
                index: i,
                what: "mortality interval (1..N)",
            });
        }
        Ok(self.survival_probability(g[i - 1]) - self.survival_probability(g[i]))
    }
}

pub fn survival_probability(t: f64, params: &MortalityParams) -> Result<f64> {
    Ok(SurvivalModel::new(*params)?.survival_probability(t))
}

pub fn death_interval_probability(
    i: usize,
    contract: &ContractSpec,
    params: &MortalityParams,
) -> Result<f64> {
    SurvivalModel::new(*params)?.death_interval_probability(i, contract)
}

/// Surrender parameters: λ^s = β·D² + C, with truncation level L and tail
/// budget ε for the bounded variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrenderParams {
    pub beta_s: f64,
    pub c_base: f64,
    pub trunc_l: f64,
    pub eps_tail: f64,
}

impl SurrenderParams {
    pub fn new(beta_s: f64, c_base: f64, trunc_l: f64, eps_tail: f64) -> Result<Self> {
        let p = Self {
            beta_s,
            c_base,
            trunc_l,
            eps_tail,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_s >= 0.0) || !(self.c_base >= 0.0) {
            return invalid("surrender beta and C must be >= 0");
        }
        if !(self.trunc_l > 0.0) {
            return invalid(format!("truncation level L must be > 0, got {}", self.trunc_l));
        }
        if !(self.eps_tail > 0.0 && self.eps_tail < 1.0) {
            return invalid(format!("tail budget eps must be in (0,1), got {}", self.eps_tail));
        }
        Ok(())
    }

    pub fn with_trunc_level(mut self, l: f64) -> Result<Self> {
        self.trunc_l = l;
        self.validate()?;
        Ok(self)
    }
}

/// W₁(d) = β·d² + C.
pub fn surrender_intensity(d_value: f64, params: &SurrenderParams) -> f64 {
    params.beta_s * d_value * d_value + params.c_base
}

/// W₂: W₁ on [−L, L], W₁(L) above L, (βL² + C)·e^{L+d} below −L.
pub fn bounded_surrender_intensity(d_value: f64, params: &SurrenderParams) -> f64 {
    let l = params.trunc_l;
    let cap = params.beta_s * l * l + params.c_base;
    if d_value > l {
        cap
    } else if d_value < -l {
        cap * (l + d_value).exp()
    } else {
        surrender_intensity(d_value, params)
    }
}

/// Smallest L ≥ 0 with e^{−L}·Σ(Cᵢ + Cᵢ′) ≤ ε.
pub fn tail_level(eps: f64, moment_sums: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return invalid(format!("tail probability eps must be > 0, got {eps}"));
    }
    if !(moment_sums > 0.0) {
        return invalid(format!("moment sum must be > 0, got {moment_sums}"));
    }
    Ok((-eps.ln() + moment_sums.ln()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmabBoundTerm {
    pub survival: f64,
    pub bond: f64,
    pub guarantee: f64,
    pub c2: f64,
}

/// One death date t̄ᵢ > t₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbBoundTerm {
    pub death_probability: f64,
    pub bond: f64,
    pub guarantee: f64,
    pub c2: f64,
}

/// One surrender date tⱼ, j = 1..K−1, in order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbBoundTerm {
    pub penalty: f64,
    pub survival: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundConstants {
    pub notional: f64,
    pub gmab: GmabBoundTerm,
    pub db: Vec<DbBoundTerm>,
    pub sb: Vec<SbBoundTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBounds {
    pub gmab: f64,
    pub db: f64,
    pub sb: f64,
}

/// Bounds on |P̄ − P| per component when W₁ is replaced by W₂ at tail budget ε.
pub fn approximation_error_bounds(eps: f64, k: &BoundConstants) -> Result<ErrorBounds> {
    if !(eps >= 0.0) {
        return invalid("eps must be >= 0");
    }
    let g = &k.gmab;
    let mut all = vec![k.notional, g.survival, g.bond, g.guarantee, g.c2];
    for d in &k.db {
        all.extend([d.death_probability, d.bond, d.guarantee, d.c2]);
    }
    for s in &k.sb {
        all.extend([s.penalty, s.survival]);
    }
    if all.iter().any(|v| !(*v >= 0.0)) {
        return invalid("bound constants must be non-negative");
    }
    let root = eps.sqrt();
    let gmab = 2.0 * g.survival * g.bond * g.guarantee * (eps + g.c2 * root);
    let db = 2.0
        * k.db
            .iter()
            .map(|d| d.death_probability * d.bond * d.guarantee * (eps + d.c2 * root))
            .sum::<f64>();
    let sb = match k.sb.split_first() {
        None => 0.0,
        Some((first, rest)) => {
            2.0 * k.notional * first.penalty * first.survival * eps
                + 4.0 * k.notional * eps * rest.iter().map(|s| s.penalty * s.survival).sum::<f64>()
        }
    };
    Ok(ErrorBounds { gmab, db, sb })
}
