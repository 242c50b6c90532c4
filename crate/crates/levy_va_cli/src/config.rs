//! Run configuration: a sectioned TOML file.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use levy_va::actuarial::{MortalityParams, SurrenderParams, SurvivalModel};
use levy_va::integrate::{McSettings, QuadSettings};
use levy_va::levy_core::{MomentBudget, NigParams, TimeQuadrature};
use levy_va::market_model::{ContractSpec, Driver, ForwardCurve, HybridMarketModel, PenaltySchedule};
use levy_va::oracle::OracleSettings;
use levy_va::pricing::{tail_level_for, Actuarial, IntegratorConfig, Method};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub contract: ContractSection,
    pub market: MarketSection,
    pub mortality: MortalitySection,
    pub surrender: SurrenderSection,
    pub integration: IntegrationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractSection {
    pub maturity: f64,
    pub guarantee_rate: f64,
    pub notional: f64,
    pub penalty_floor: f64,
    pub surrender_step: f64,
    pub mortality_step: f64,
    pub dampening_r: f64,
    /// Explicit grids override the steps. Both start at 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrender_dates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mortality_dates: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub a: f64,
    pub sigma2: f64,
    pub b: f64,
    /// "flat-zero", "flat:<rate>" or the path of a maturity,rate CSV file.
    pub forward_curve: String,
    pub l1_alpha: f64,
    pub l1_beta: f64,
    pub l1_delta: f64,
    #[serde(default)]
    pub l1_mu: f64,
    pub l1_moment_bound: f64,
    pub l1_moment_slack: f64,
    pub l2_alpha: f64,
    pub l2_beta: f64,
    pub l2_delta: f64,
    #[serde(default)]
    pub l2_mu: f64,
    pub l2_moment_bound: f64,
    pub l2_moment_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MortalitySection {
    pub gm_b: f64,
    pub gm_z: f64,
    pub ou_kappa: f64,
    pub ou_lambda: f64,
    pub ou_sigma: f64,
    pub age: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrenderSection {
    pub beta: f64,
    pub c: f64,
    /// Tail budget ε for the bounded intensity.
    pub eps_tail: f64,
    /// Truncation level L; derived from `eps_tail` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trunc_level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    pub samples_per_batch: usize,
    pub batches: usize,
    pub seed: u64,
    pub quadrature_max_dim: usize,
    pub quad_tolerance: f64,
    pub quad_max_subdivisions: usize,
    pub nodes_per_year: usize,
    pub oracle_paths: usize,
    pub oracle_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub x_param: String,
    pub x_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_param: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_values: Option<Vec<f64>>,
}

/// Parameters a sweep may vary.
pub const SWEEP_PARAMS: &[&str] = &[
    "surrender.beta",
    "surrender.c",
    "market.b",
    "market.sigma2",
    "contract.guarantee_rate",
    "contract.notional",
];

/// Everything a command needs, validated.
#[derive(Debug, Clone)]
pub struct Built {
    pub contract: ContractSpec,
    pub model: HybridMarketModel,
    pub actuarial: Actuarial,
    pub integrator: IntegratorConfig,
    pub oracle: OracleSettings,
}

/// 1-based line of `[section]`, or of `key = ` inside it when given.
pub fn locate(text: &str, section: &str, key: Option<&str>) -> Option<usize> {
    let header = format!("[{section}]");
    let mut in_section = false;
    let mut header_line = None;
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            in_section = t == header;
            if in_section {
                header_line = Some(n + 1);
            }
            continue;
        }
        if in_section {
            if let Some(k) = key {
                if let Some((lhs, _)) = t.split_once('=') {
                    if lhs.trim() == k {
                        return Some(n + 1);
                    }
                }
            }
        }
    }
    header_line
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            match line {
                Some(l) => anyhow!("config line {l}: {}", e.message()),
                None => anyhow!("config: {}", e.message()),
            }
        })
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg = Self::parse(&text)?;
        Ok((cfg, text))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Set a sweepable parameter.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "surrender.beta" => self.surrender.beta = value,
            "surrender.c" => self.surrender.c = value,
            "market.b" => self.market.b = value,
            "market.sigma2" => self.market.sigma2 = value,
            "contract.guarantee_rate" => self.contract.guarantee_rate = value,
            "contract.notional" => self.contract.notional = value,
            _ => bail!(
                "unknown sweep parameter `{name}` (expected one of {})",
                SWEEP_PARAMS.join(", ")
            ),
        }
        Ok(())
    }

    fn curve(&self, base_dir: Option<&Path>) -> Result<ForwardCurve> {
        let spec = self.market.forward_curve.trim();
        if spec == "flat-zero" {
            return Ok(ForwardCurve::flat_zero());
        }
        if let Some(rate) = spec.strip_prefix("flat:") {
            let r: f64 = rate
                .trim()
                .parse()
                .with_context(|| format!("bad flat rate `{rate}`"))?;
            if !r.is_finite() {
                bail!("flat forward rate must be finite");
            }
            return Ok(ForwardCurve::Flat(r));
        }
        let mut path = PathBuf::from(spec);
        if path.is_relative() {
            if let Some(d) = base_dir {
                path = d.join(path);
            }
        }
        Ok(ForwardCurve::from_csv_path(&path)?)
    }

    /// Validate every section and assemble the model objects. `text` is the
    /// source the config came from, used to point diagnostics at a line.
    pub fn build(&self, text: Option<&str>, base_dir: Option<&Path>) -> Result<Built> {
        let at = |section: &str, key: Option<&str>, e: anyhow::Error| -> anyhow::Error {
            match text.and_then(|t| locate(t, section, key)) {
                Some(l) => anyhow!("config line {l} [{section}]: {e:#}"),
                None => anyhow!("config [{section}]: {e:#}"),
            }
        };
        let c = &self.contract;
        let contract = (|| -> levy_va::Result<ContractSpec> {
            let regular = || {
                ContractSpec::regular(
                    c.maturity,
                    c.guarantee_rate,
                    c.notional,
                    c.penalty_floor,
                    c.surrender_step,
                    c.mortality_step,
                    c.dampening_r,
                )
            };
            if c.surrender_dates.is_none() && c.mortality_dates.is_none() {
                return regular();
            }
            let surrender = match &c.surrender_dates {
                Some(g) => g.clone(),
                None => regular()?.surrender_grid,
            };
            let mortality = match &c.mortality_dates {
                Some(g) => g.clone(),
                None => regular()?.mortality_grid,
            };
            ContractSpec::new(
                c.maturity,
                c.guarantee_rate,
                c.notional,
                PenaltySchedule::new(c.penalty_floor, c.maturity)?,
                surrender,
                mortality,
                c.dampening_r,
            )
        })()
        .map_err(|e| {
            let msg = e.to_string();
            let key = if msg.contains("surrender") && c.surrender_dates.is_some() {
                Some("surrender_dates")
            } else if msg.contains("mortality") && c.mortality_dates.is_some() {
                Some("mortality_dates")
            } else {
                None
            };
            at("contract", key, e.into())
        })?;

        let m = &self.market;
        let curve = self
            .curve(base_dir)
            .map_err(|e| at("market", Some("forward_curve"), e))?;
        let driver = |alpha, beta, delta, mu, bound, slack| -> levy_va::Result<Driver> {
            Ok(Driver {
                params: NigParams::new(alpha, beta, delta, mu)?,
                budget: MomentBudget::new(bound, slack)?,
            })
        };
        let i = &self.integration;
        let model = (|| {
            let d1 = driver(m.l1_alpha, m.l1_beta, m.l1_delta, m.l1_mu, m.l1_moment_bound, m.l1_moment_slack)?;
            let d2 = driver(m.l2_alpha, m.l2_beta, m.l2_delta, m.l2_mu, m.l2_moment_bound, m.l2_moment_slack)?;
            HybridMarketModel::new(
                m.a,
                m.sigma2,
                m.b,
                curve,
                d1,
                d2,
                TimeQuadrature::new(i.nodes_per_year)?,
                contract.maturity,
            )
        })()
        .map_err(|e| at("market", None, e.into()))?;

        let mo = &self.mortality;
        let survival = SurvivalModel::new(MortalityParams {
            gm_b: mo.gm_b,
            gm_z: mo.gm_z,
            ou_kappa: mo.ou_kappa,
            ou_lambda: mo.ou_lambda,
            ou_sigma: mo.ou_sigma,
            age_x: mo.age,
        })
        .map_err(|e| at("mortality", None, e.into()))?;

        let s = &self.surrender;
        let trunc = match s.trunc_level {
            Some(l) => l,
            None => tail_level_for(&contract, &model, s.eps_tail)
                .map_err(|e| at("surrender", Some("eps_tail"), e.into()))?,
        };
        let surrender = SurrenderParams::new(s.beta, s.c, trunc, s.eps_tail)
            .map_err(|e| at("surrender", None, e.into()))?;

        let mc = McSettings {
            samples_per_batch: i.samples_per_batch,
            batches: i.batches,
            seed: i.seed,
            proposal_std: None,
        };
        mc.validate().map_err(|e| at("integration", None, e.into()))?;
        if !(i.quad_tolerance > 0.0) {
            return Err(at("integration", Some("quad_tolerance"), anyhow!("quad_tolerance must be > 0")));
        }
        if i.oracle_paths == 0 {
            return Err(at("integration", Some("oracle_paths"), anyhow!("oracle_paths must be > 0")));
        }
        if !(i.oracle_step > 0.0) {
            return Err(at("integration", Some("oracle_step"), anyhow!("oracle_step must be > 0")));
        }
        if let Some(sw) = &self.sweep {
            if sw.x_values.is_empty() {
                return Err(at("sweep", Some("x_values"), anyhow!("sweep grid is empty")));
            }
            if !SWEEP_PARAMS.contains(&sw.x_param.as_str()) {
                return Err(at("sweep", Some("x_param"), anyhow!("unknown sweep parameter `{}`", sw.x_param)));
            }
            match (&sw.y_param, &sw.y_values) {
                (None, None) => {}
                (Some(p), Some(v)) => {
                    if v.is_empty() {
                        return Err(at("sweep", Some("y_values"), anyhow!("sweep grid is empty")));
                    }
                    if !SWEEP_PARAMS.contains(&p.as_str()) {
                        return Err(at("sweep", Some("y_param"), anyhow!("unknown sweep parameter `{p}`")));
                    }
                }
                _ => return Err(at("sweep", None, anyhow!("y_param and y_values go together"))),
            }
        }
        Ok(Built {
            contract,
            model,
            actuarial: Actuarial { survival, surrender },
            integrator: IntegratorConfig {
                mc,
                quad: QuadSettings {
                    truncation_radius: None,
                    tolerance: i.quad_tolerance,
                    max_subdivisions: i.quad_max_subdivisions,
                },
                quadrature_max_dim: i.quadrature_max_dim,
                method: Method::Auto,
            },
            oracle: OracleSettings {
                paths: i.oracle_paths,
                step: i.oracle_step,
                seed: i.seed,
                coarsen: 1,
            },
        })
    }
}
