//! Path-simulation pricer. The drivers are sampled exactly on a fine grid;
//! stochastic integrals against L¹ use left-point sums. Mortality and
//! surrender enter by conditioning: paths carry the no-surrender weight
//! e^{−∫λˢ} and the closed-form mortality probabilities.

use rand::Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};
use rayon::prelude::*;

use crate::actuarial::{
    base_mortality, bounded_surrender_intensity, surrender_intensity, MortalityParams,
};
use crate::error::{invalid, Result};
use crate::integrate::rng::stream_rng;
use crate::levy_core::NigParams;
use crate::market_model::{spread_offset, ContractSpec, HybridMarketModel};
use crate::pricing::{db_block, Actuarial};

/// One NIG(α, β, δ·dt, μ·dt) increment: μ·dt + βV + √V·Z with V inverse
/// Gaussian of mean δ·dt/γ and shape (δ·dt)².
pub fn sample_nig_increment<R: Rng + ?Sized>(params: &NigParams, dt: f64, rng: &mut R) -> f64 {
    let dh = params.delta_scale * dt;
    let ig = InverseGaussian::new(dh / params.gamma(), dh * dh).expect("positive IG parameters");
    let v: f64 = ig.sample(rng);
    let z: f64 = StandardNormal.sample(rng);
    params.mu * dt + params.beta_skew * v + v.sqrt() * z
}

const GRID_TOL: f64 = 1e-9;

/// Uniform simulation grid on [0, T] that hits every contract date.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    pub step: f64,
    pub horizon: f64,
    pub steps: usize,
    /// Contract dates (mortality grid, which contains the surrender dates),
    /// as step indices.
    pub node_times: Vec<f64>,
    node_index: Vec<usize>,
}

impl PathGrid {
    pub fn new(contract: &ContractSpec, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return invalid("path step must be positive");
        }
        let horizon = contract.maturity;
        let steps = (horizon / step).round() as usize;
        let mut node_times = contract.mortality_grid.clone();
        node_times.extend_from_slice(&contract.surrender_grid);
        node_times.extend([1.0f64.min(horizon), 0.5 * horizon]);
        node_times.sort_by(f64::total_cmp);
        node_times.dedup_by(|a, b| (*a - *b).abs() <= GRID_TOL);
        let mut node_index = Vec::with_capacity(node_times.len());
        for &t in &node_times {
            let k = (t / step).round();
            if (k * step - t).abs() > GRID_TOL * horizon.max(1.0) {
                return invalid(format!(
                    "grid misalignment: date {t} is not a multiple of the path step {step}"
                ));
            }
            node_index.push(k as usize);
        }
        Ok(Self {
            step,
            horizon,
            steps,
            node_times,
            node_index,
        })
    }

    pub fn index_of(&self, t: f64) -> usize {
        self.node_times
            .iter()
            .position(|&s| (s - t).abs() <= GRID_TOL)
            .expect("date is on the path grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub paths: usize,
    pub step: f64,
    pub seed: u64,
    /// Left points of the stochastic integrals sit on a grid `coarsen` times
    /// coarser than the sampling grid. With coarsen = 2 and step h/2 the run
    /// reproduces the step-h scheme on the same increments.
    pub coarsen: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            paths: 100_000,
            step: 1.0 / 256.0,
            seed: 0,
            coarsen: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComponentEstimates {
    pub gmab: Estimate,
    pub db: Estimate,
    pub sb: Estimate,
    pub total: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleCheck {
    pub time: f64,
    /// E[e^{−∫r}S_t], equal to 1.
    pub discounted_stock: Estimate,
    /// E[e^{−∫r}]/B(0,t), equal to 1.
    pub discount_ratio: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub paths: usize,
    pub w1: ComponentEstimates,
    pub w2: ComponentEstimates,
    /// Path-wise W₂ − W₁, sharing the paths.
    pub w2_minus_w1: ComponentEstimates,
    pub gmab_a1: Estimate,
    pub gmab_a2: Estimate,
    /// E^T[(e^{D(T)} − 1)²]^{1/2}, with the delta-method SE.
    pub c2: Estimate,
    /// Q^T(max_l |D(t_l)| > L) at the surrender parameters' L.
    pub exceedance: Estimate,
    pub martingale: Vec<MartingaleCheck>,
    pub min_weight: f64,
    pub max_weight: f64,
}

// Per-path statistics, in a fixed order.
const N_PRICE: usize = 12;
const I_A1: usize = N_PRICE;
const I_A2: usize = N_PRICE + 1;
const I_C2: usize = N_PRICE + 2;
const I_EXC: usize = N_PRICE + 3;
const I_MART: usize = N_PRICE + 4;
const CHUNK: usize = 256;

#[derive(Clone)]
struct Moments {
    sum: Vec<f64>,
    sq: Vec<f64>,
    min_w: f64,
    max_w: f64,
}

impl Moments {
    fn new(n: usize) -> Self {
        Self {
            sum: vec![0.0; n],
            sq: vec![0.0; n],
            min_w: f64::INFINITY,
            max_w: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, v: &[f64]) {
        for (k, x) in v.iter().enumerate() {
            self.sum[k] += x;
            self.sq[k] += x * x;
        }
    }

    fn merge(mut self, o: &Moments) -> Self {
        for k in 0..self.sum.len() {
            self.sum[k] += o.sum[k];
            self.sq[k] += o.sq[k];
        }
        self.min_w = self.min_w.min(o.min_w);
        self.max_w = self.max_w.max(o.max_w);
        self
    }

    fn estimate(&self, k: usize, n: usize) -> Estimate {
        let nf = n as f64;
        let mean = self.sum[k] / nf;
        let var = ((self.sq[k] - nf * mean * mean) / (nf - 1.0)).max(0.0);
        Estimate {
            value: mean,
            std_error: (var / nf).sqrt(),
        }
    }
}

/// Deterministic per-contract inputs.
struct Plan {
    grid: PathGrid,
    k: usize,
    /// Node index of each surrender date t_1..t_{K−1}.
    surr_node: Vec<usize>,
    dt_next: Vec<f64>,
    w: Vec<f64>,
    /// Node index, q_i, G, j(i) and B(0, t̄_i) per mortality date.
    death: Vec<(usize, f64, f64, usize)>,
    /// Per node: B(0,t), e^{−∫₀ᵗA(s,t)ds}, e^{−a t}, ω(t).
    bond: Vec<f64>,
    drift: Vec<f64>,
    decay: Vec<f64>,
    omega: Vec<f64>,
    sb: Vec<(usize, f64)>,
    gmab_coef: f64,
    guarantee_t: f64,
    mart_nodes: Vec<usize>,
    left_exp: Vec<f64>,
}

fn plan(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    actuarial: &Actuarial,
    settings: &OracleSettings,
) -> Result<Plan> {
    contract.validate()?;
    if settings.paths < 2 || settings.coarsen == 0 {
        return invalid("oracle needs at least 2 paths and coarsen >= 1");
    }
    let grid = PathGrid::new(contract, settings.step)?;
    let coarse = settings.step * settings.coarsen as f64;
    let k = contract.k();
    let sg = &contract.surrender_grid;
    let t_mat = contract.maturity;
    let surr_node: Vec<usize> = (1..k).map(|l| grid.index_of(sg[l])).collect();
    let dt_next: Vec<f64> = (1..k).map(|l| sg[l + 1] - sg[l]).collect();
    let w = (1..k)
        .map(|l| spread_offset(contract, model, t_mat, sg[l], true))
        .collect::<Result<Vec<_>>>()?;
    let surv = &actuarial.survival;
    let mut death = Vec::new();
    for i in 1..=contract.n() {
        let tb = contract.mortality_grid[i];
        death.push((
            grid.index_of(tb),
            surv.death_interval_probability(i, contract)?,
            contract.guarantee(tb),
            db_block(contract, i),
        ));
    }
    let mut bond = Vec::new();
    let mut drift = Vec::new();
    let mut decay = Vec::new();
    let mut omega = Vec::new();
    for &t in &grid.node_times {
        bond.push(model.zero_bond_price(t));
        drift.push((-model.integrated_drift(t, t)?).exp());
        decay.push((-model.a * t).exp());
        omega.push(model.equity_drift_omega(t)?);
    }
    let sb = (1..k)
        .map(|i| {
            let ti = sg[i];
            (
                grid.index_of(ti),
                contract.notional * contract.penalty.value(ti) * surv.survival_probability(ti),
            )
        })
        .collect();
    let gmab_coef = surv.survival_probability(t_mat);
    let mut mart_nodes = vec![grid.index_of(1.0f64.min(t_mat)), grid.index_of(0.5 * t_mat), grid.index_of(t_mat)];
    mart_nodes.dedup();
    let left_exp = (0..grid.steps)
        .map(|n| {
            let s = n as f64 * settings.step;
            let left = (s / coarse + 1e-9).floor() * coarse;
            (model.a * left).exp()
        })
        .collect();
    Ok(Plan {
        grid,
        k,
        surr_node,
        dt_next,
        w,
        death,
        bond,
        drift,
        decay,
        omega,
        sb,
        gmab_coef,
        guarantee_t: contract.guarantee(t_mat),
        mart_nodes,
        left_exp,
    })
}

/// Simulate the contract under both surrender maps on shared paths.
pub fn simulate_contract(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    actuarial: &Actuarial,
    settings: &OracleSettings,
) -> Result<OracleReport> {
    if settings.paths < 10_000 {
        return invalid(format!(
            "oracle needs at least 10^4 paths, got {}",
            settings.paths
        ));
    }
    simulate_unchecked(contract, model, actuarial, settings)
}

/// As [`simulate_contract`] without the path-count floor, for quick checks.
pub fn simulate_unchecked(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    actuarial: &Actuarial,
    settings: &OracleSettings,
) -> Result<OracleReport> {
    let p = plan(contract, model, actuarial, settings)?;
    let n_stats = I_MART + 2 * p.mart_nodes.len();
    let chunks = settings.paths.div_ceil(CHUNK);
    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::new(n_stats);
            let mut vals = vec![0.0; n_stats];
            let lo = c * CHUNK;
            let hi = settings.paths.min(lo + CHUNK);
            for path in lo..hi {
                simulate_path(&p, contract, model, actuarial, settings, path as u64, &mut vals, &mut m);
                m.add(&vals);
            }
            m
        })
        .collect();
    let total = partial
        .iter()
        .fold(Moments::new(n_stats), |acc, m| acc.merge(m));
    let n = settings.paths;
    let comp = |base: usize| ComponentEstimates {
        gmab: total.estimate(base, n),
        db: total.estimate(base + 1, n),
        sb: total.estimate(base + 2, n),
        total: total.estimate(base + 3, n),
    };
    let c2sq = total.estimate(I_C2, n);
    let c2 = c2sq.value.max(0.0).sqrt();
    let martingale = p
        .mart_nodes
        .iter()
        .enumerate()
        .map(|(m, &node)| MartingaleCheck {
            time: p.grid.node_times[node],
            discounted_stock: total.estimate(I_MART + 2 * m, n),
            discount_ratio: total.estimate(I_MART + 2 * m + 1, n),
        })
        .collect();
    Ok(OracleReport {
        paths: n,
        w1: comp(0),
        w2: comp(4),
        w2_minus_w1: comp(8),
        gmab_a1: total.estimate(I_A1, n),
        gmab_a2: total.estimate(I_A2, n),
        c2: Estimate {
            value: c2,
            std_error: if c2 > 0.0 { c2sq.std_error / (2.0 * c2) } else { 0.0 },
        },
        exceedance: total.estimate(I_EXC, n),
        martingale,
        min_weight: total.min_w,
        max_weight: total.max_w,
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate_path(
    p: &Plan,
    contract: &ContractSpec,
    model: &HybridMarketModel,
    actuarial: &Actuarial,
    settings: &OracleSettings,
    path: u64,
    out: &mut [f64],
    m: &mut Moments,
) {
    let mut r1 = stream_rng(settings.seed, path << 1);
    let mut r2 = stream_rng(settings.seed, (path << 1) | 1);
    let d1 = model.theta1();
    let d2 = model.theta2();
    let nodes = p.grid.node_times.len();
    let mut l1_at = vec![0.0; nodes];
    let mut l2_at = vec![0.0; nodes];
    let mut s1_at = vec![0.0; nodes];
    let (mut l1, mut l2, mut s1) = (0.0, 0.0, 0.0);
    let mut next = 1;
    for n in 0..p.grid.steps {
        let x1 = sample_nig_increment(d1, settings.step, &mut r1);
        let x2 = sample_nig_increment(d2, settings.step, &mut r2);
        l1 += x1;
        l2 += x2;
        s1 += p.left_exp[n] * x1;
        while next < nodes && p.grid.node_index[next] == n + 1 {
            l1_at[next] = l1;
            l2_at[next] = l2;
            s1_at[next] = s1;
            next += 1;
        }
    }
    let (b, s2) = (model.b_loading, model.sigma2);
    let last = nodes - 1;
    let t_decay = p.decay[last];
    // Discount factor e^{−∫₀ᵗ r} and discounted stock e^{−∫₀ᵗ r}S_t at node k.
    let disc = |k: usize| p.bond[k] * p.drift[k] * (l1_at[k] - p.decay[k] * s1_at[k]).exp();
    let disc_s = |k: usize| (s2 * l2_at[k] + b * l1_at[k] - p.omega[k]).exp();
    let spread: Vec<f64> = (0..p.k - 1)
        .map(|l| {
            let k = p.surr_node[l];
            p.w[l] + b * l1_at[k] - (l1_at[k] - t_decay * s1_at[k]) + s2 * l2_at[k]
        })
        .collect();
    let sp = &actuarial.surrender;
    let mut price = [[0.0; 4]; 2];
    let mut weights1 = Vec::new();
    for (v, pr) in price.iter_mut().enumerate() {
        // cum[m] = e^{−Λ_m}, Λ_m = Σ_{l≤m} W(D(t_l))Δt_{l+1}.
        let mut cum = vec![1.0; p.k];
        for l in 0..p.k - 1 {
            let wv = if v == 0 {
                surrender_intensity(spread[l], sp)
            } else {
                bounded_surrender_intensity(spread[l], sp)
            };
            cum[l + 1] = cum[l] * (-wv * p.dt_next[l]).exp();
        }
        m.min_w = m.min_w.min(cum[p.k - 1]);
        m.max_w = m.max_w.max(cum[0]);
        let g = p.gmab_coef
            * cum[p.k - 1]
            * (contract.notional * disc_s(last)).max(p.guarantee_t * disc(last));
        let mut db = 0.0;
        for &(node, q, gi, j) in &p.death {
            db += q * cum[j] * (contract.notional * disc_s(node)).max(gi * disc(node));
        }
        let mut sb = 0.0;
        for (i, &(node, coef)) in p.sb.iter().enumerate() {
            sb += coef * disc_s(node) * (cum[i] - cum[i + 1]);
        }
        *pr = [g, db, sb, g + db + sb];
        if v == 0 {
            weights1 = cum;
        }
    }
    out[..4].copy_from_slice(&price[0]);
    out[4..8].copy_from_slice(&price[1]);
    for c in 0..4 {
        out[8 + c] = price[1][c] - price[0][c];
    }
    // T-forward density and terminal spread.
    let dens = disc(last) / p.bond[last];
    let d_t = (contract.notional * disc_s(last) / (p.guarantee_t * disc(last))).ln();
    out[I_A1] = dens * weights1[p.k - 1];
    out[I_A2] = dens * weights1[p.k - 1] * d_t.exp_m1().max(0.0);
    out[I_C2] = dens * d_t.exp_m1().powi(2);
    let exceeds = spread.iter().any(|d| d.abs() > sp.trunc_l);
    out[I_EXC] = if exceeds { dens } else { 0.0 };
    for (mi, &node) in p.mart_nodes.iter().enumerate() {
        out[I_MART + 2 * mi] = disc_s(node);
        out[I_MART + 2 * mi + 1] = disc(node) / p.bond[node];
    }
}

/// Q(τ^m > t) by simulating ξ with exact Gaussian transitions and integrating
/// λ^{m,0}(x+u)ξ_u by the trapezoid rule.
pub fn simulate_survival(
    params: &MortalityParams,
    t: f64,
    n_paths: usize,
    seed: u64,
    step: f64,
) -> Result<Estimate> {
    params.validate()?;
    if !(t > 0.0) || !(step > 0.0) || n_paths < 2 {
        return invalid("survival simulation needs t > 0, step > 0 and at least 2 paths");
    }
    let steps = (t / step).ceil() as usize;
    let h = t / steps as f64;
    let (kappa, lam, sigma) = (params.ou_kappa, params.ou_lambda, params.ou_sigma);
    let mean = |u: f64| {
        let e = (-kappa * u).exp();
        if (kappa - lam).abs() < 1e-12 {
            e + kappa * e * u
        } else {
            e + kappa * e * ((kappa - lam) * u).exp_m1() / (kappa - lam)
        }
    };
    let decay = (-kappa * h).exp();
    let sd = sigma * ((1.0 - (-2.0 * kappa * h).exp()) / (2.0 * kappa)).sqrt();
    let means: Vec<f64> = (0..=steps).map(|n| mean(n as f64 * h)).collect();
    let base: Vec<f64> = (0..=steps)
        .map(|n| base_mortality(params.age_x + n as f64 * h, params))
        .collect();
    let chunks = n_paths.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (mut s, mut sq) = (0.0, 0.0);
            for path in c * CHUNK..n_paths.min((c + 1) * CHUNK) {
                let mut rng = stream_rng(seed, path as u64);
                let mut xi = 1.0;
                let mut integral = 0.5 * base[0] * xi;
                for n in 1..=steps {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    xi = means[n] + (xi - means[n - 1]) * decay + sd * z;
                    let wt = if n == steps { 0.5 } else { 1.0 };
                    integral += wt * base[n] * xi;
                }
                let v = (-integral * h).exp();
                s += v;
                sq += v * v;
            }
            (s, sq)
        })
        .collect();
    let (s, sq) = partial
        .iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = n_paths as f64;
    let m = s / nf;
    let var = ((sq - nf * m * m) / (nf - 1.0)).max(0.0);
    Ok(Estimate {
        value: m,
        std_error: (var / nf).sqrt(),
    })
}
