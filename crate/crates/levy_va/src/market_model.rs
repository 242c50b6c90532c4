//! Hybrid HJM/equity model with a Vasiček volatility shape, the contract's
//! economic terms, and the deterministic w-coefficients of the spread process.

use std::io::Read;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{invalid, Result, VaError};
use crate::levy_core::{verify_moment_budget, Cumulant, MomentBudget, NigParams, TimeQuadrature};

/// Initial forward curve f(0, ·).
#[derive(Debug, Clone, PartialEq)]
pub enum ForwardCurve {
    Flat(f64),
    /// Linear between knots, flat beyond the first and last knot.
    PiecewiseLinear { maturities: Vec<f64>, rates: Vec<f64> },
}

impl ForwardCurve {
    pub fn flat_zero() -> Self {
        ForwardCurve::Flat(0.0)
    }

    pub fn piecewise_linear(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.is_empty() {
            return invalid("forward curve needs at least one knot");
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return invalid("forward curve maturities must be strictly increasing");
            }
        }
        if knots.iter().any(|k| !k.0.is_finite() || !k.1.is_finite()) {
            return invalid("forward curve knots must be finite");
        }
        Ok(ForwardCurve::PiecewiseLinear {
            maturities: knots.iter().map(|k| k.0).collect(),
            rates: knots.iter().map(|k| k.1).collect(),
        })
    }

    /// Two-column CSV `maturity,rate` with a header row.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut knots = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| VaError::Io(format!("forward curve csv: {e}")))?;
            if rec.len() != 2 {
                return invalid(format!(
                    "forward curve csv row {} must have 2 columns, found {}",
                    row + 2,
                    rec.len()
                ));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    VaError::InvalidParameter(format!(
                        "forward curve csv row {}: cannot parse `{s}`",
                        row + 2
                    ))
                })
            };
            knots.push((parse(&rec[0])?, parse(&rec[1])?));
        }
        Self::piecewise_linear(&knots)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|e| VaError::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(f)
    }

    pub fn rate(&self, t: f64) -> f64 {
        match self {
            ForwardCurve::Flat(r) => *r,
            ForwardCurve::PiecewiseLinear { maturities, rates } => {
                let n = maturities.len();
                if t <= maturities[0] {
                    return rates[0];
                }
                if t >= maturities[n - 1] {
                    return rates[n - 1];
                }
                let k = maturities.partition_point(|&m| m <= t);
                let (m0, m1) = (maturities[k - 1], maturities[k]);
                let (r0, r1) = (rates[k - 1], rates[k]);
                r0 + (r1 - r0) * (t - m0) / (m1 - m0)
            }
        }
    }

    /// ∫₀ᵗ f(0,s) ds, exact for this representation.
    pub fn integral(&self, t: f64) -> f64 {
        match self {
            ForwardCurve::Flat(r) => r * t,
            ForwardCurve::PiecewiseLinear { maturities, .. } => {
                let mut cuts = vec![0.0];
                cuts.extend(maturities.iter().copied().filter(|&m| m > 0.0 && m < t));
                cuts.push(t);
                cuts.windows(2)
                    .map(|w| 0.5 * (w[1] - w[0]) * (self.rate(w[0]) + self.rate(w[1])))
                    .sum()
            }
        }
    }
}

/// One Lévy driver with its exponential-moment budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Driver {
    pub params: NigParams,
    pub budget: MomentBudget,
}

/// Market model: Vasiček reversion `a`, equity loadings σ₂ on L² and b on L¹.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridMarketModel {
    pub a: f64,
    pub sigma2: f64,
    pub b_loading: f64,
    pub forward_curve: ForwardCurve,
    pub driver1: Driver,
    pub driver2: Driver,
    pub quad: TimeQuadrature,
    /// Longest maturity the bounds were checked for.
    pub horizon: f64,
}

impl HybridMarketModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        sigma2: f64,
        b_loading: f64,
        forward_curve: ForwardCurve,
        driver1: Driver,
        driver2: Driver,
        quad: TimeQuadrature,
        horizon: f64,
    ) -> Result<Self> {
        let m = Self {
            a,
            sigma2,
            b_loading,
            forward_curve,
            driver1,
            driver2,
            quad,
            horizon,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.driver1.params.validate()?;
        self.driver2.params.validate()?;
        if !(self.a >= 0.0) || !self.a.is_finite() {
            return invalid(format!("reversion speed a must be >= 0, got {}", self.a));
        }
        if !(self.horizon > 0.0) {
            return invalid("model horizon must be positive");
        }
        for (name, d) in [("L1", &self.driver1), ("L2", &self.driver2)] {
            if !verify_moment_budget(&d.params, &d.budget) {
                return invalid(format!(
                    "{name}: moment budget (1+eps)M = {} must be < alpha - |beta| = {}",
                    (1.0 + d.budget.epsilon_slack) * d.budget.m_bound,
                    d.params.alpha - d.params.beta_skew.abs()
                ));
            }
        }
        let m1 = self.driver1.budget.m_bound;
        let m2 = self.driver2.budget.m_bound;
        let steps = 200;
        for k in 0..=steps {
            let t = self.horizon * k as f64 / steps as f64;
            let s = self.sigma_bond(0.0, t);
            if s > m1 / 3.0 {
                return invalid(format!(
                    "Sigma(0,{t}) = {s} exceeds M1/3 = {}",
                    m1 / 3.0
                ));
            }
        }
        if !(self.sigma2 >= 0.0) || self.sigma2 > m2 / 2.0 {
            return invalid(format!(
                "equity volatility sigma2 = {} must lie in [0, M2/2 = {}]",
                self.sigma2,
                m2 / 2.0
            ));
        }
        if self.b_loading.abs() > m1 / 3.0 || !self.b_loading.is_finite() {
            return invalid(format!(
                "equity loading |b| = {} exceeds M1/3 = {}",
                self.b_loading.abs(),
                m1 / 3.0
            ));
        }
        Ok(())
    }

    pub fn theta1(&self) -> &NigParams {
        &self.driver1.params
    }

    pub fn theta2(&self) -> &NigParams {
        &self.driver2.params
    }

    /// Σ(s,T) = 1 − e^{−a(T−s)} for s ≤ T, else 0.
    pub fn sigma_bond(&self, s: f64, t: f64) -> f64 {
        if s >= t {
            0.0
        } else {
            -(-self.a * (t - s)).exp_m1()
        }
    }

    /// A(s,T) = θ¹(Σ(s,T)).
    pub fn drift_a(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self
            .theta1()
            .eval(Complex64::new(self.sigma_bond(s, t), 0.0))?
            .re)
    }

    /// ∫₀^{min(t,T)} A(s,T) ds.
    pub fn integrated_drift(&self, t: f64, maturity: f64) -> Result<f64> {
        let upper = t.min(maturity);
        let mut acc = 0.0;
        for (s, w) in self.quad.nodes(0.0, upper, &[]) {
            acc += w * self.drift_a(s, maturity)?;
        }
        Ok(acc)
    }

    /// ω(t) = t·(θ²(σ₂) + θ¹(b)) for constant loadings.
    pub fn equity_drift_omega(&self, t: f64) -> Result<f64> {
        let th2 = self.theta2().eval(Complex64::new(self.sigma2, 0.0))?.re;
        let th1 = self.theta1().eval(Complex64::new(self.b_loading, 0.0))?.re;
        Ok(t * (th2 + th1))
    }

    /// B(0,T) = exp(−∫₀ᵀ f(0,s) ds).
    pub fn zero_bond_price(&self, t: f64) -> f64 {
        (-self.forward_curve.integral(t)).exp()
    }
}

/// P(t) = floor + (1 − floor)·t/T, so P(T) = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySchedule {
    pub floor: f64,
    pub maturity: f64,
}

impl PenaltySchedule {
    pub fn new(floor: f64, maturity: f64) -> Result<Self> {
        if !(floor > 0.0 && floor <= 1.0) {
            return invalid(format!("penalty floor must be in (0,1], got {floor}"));
        }
        if !(maturity > 0.0) {
            return invalid("penalty maturity must be positive");
        }
        Ok(Self { floor, maturity })
    }

    pub fn value(&self, t: f64) -> f64 {
        self.floor + (1.0 - self.floor) * t / self.maturity
    }

    /// p(t) = −log P(t).
    pub fn log_penalty(&self, t: f64) -> f64 {
        -self.value(t).ln()
    }
}

/// Economic terms of the annuity.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractSpec {
    pub maturity: f64,
    pub guarantee_rate: f64,
    pub notional: f64,
    pub penalty: PenaltySchedule,
    /// t₀ = 0 < t₁ < … < t_K < T.
    pub surrender_grid: Vec<f64>,
    /// t̄₀ = 0 < … < t̄_N = T.
    pub mortality_grid: Vec<f64>,
    pub dampening_r: f64,
}

const GRID_TOL: f64 = 1e-9;

impl ContractSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        maturity: f64,
        guarantee_rate: f64,
        notional: f64,
        penalty: PenaltySchedule,
        surrender_grid: Vec<f64>,
        mortality_grid: Vec<f64>,
        dampening_r: f64,
    ) -> Result<Self> {
        let c = Self {
            maturity,
            guarantee_rate,
            notional,
            penalty,
            surrender_grid,
            mortality_grid,
            dampening_r,
        };
        c.validate()?;
        Ok(c)
    }

    /// Evenly spaced grids: surrender dates every `surrender_step` strictly
    /// before T, mortality dates every `mortality_step` up to T.
    pub fn regular(
        maturity: f64,
        guarantee_rate: f64,
        notional: f64,
        penalty_floor: f64,
        surrender_step: f64,
        mortality_step: f64,
        dampening_r: f64,
    ) -> Result<Self> {
        if !(surrender_step > 0.0) || !(mortality_step > 0.0) || !(maturity > 0.0) {
            return invalid("maturity and grid steps must be positive");
        }
        let mut surrender_grid = vec![0.0];
        let mut l = 1;
        while (l as f64) * surrender_step < maturity - GRID_TOL {
            surrender_grid.push(l as f64 * surrender_step);
            l += 1;
        }
        let n = (maturity / mortality_step).round();
        if ((n * mortality_step) - maturity).abs() > GRID_TOL || n < 1.0 {
            return invalid(format!(
                "mortality step {mortality_step} does not divide maturity {maturity}"
            ));
        }
        let mortality_grid = (0..=n as usize).map(|i| i as f64 * mortality_step).collect();
        Self::new(
            maturity,
            guarantee_rate,
            notional,
            PenaltySchedule::new(penalty_floor, maturity)?,
            surrender_grid,
            mortality_grid,
            dampening_r,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.maturity;
        if !(t > 0.0) {
            return invalid("maturity T must be positive");
        }
        if !(self.guarantee_rate >= 0.0) || !self.guarantee_rate.is_finite() {
            return invalid("guarantee rate delta must be >= 0");
        }
        if !(self.notional >= 0.0) || !self.notional.is_finite() {
            return invalid("notional I must be >= 0");
        }
        if !(self.dampening_r > 1.0 && self.dampening_r < 2.0) {
            return invalid(format!(
                "dampening r must lie strictly inside (1,2), got {}",
                self.dampening_r
            ));
        }
        if (self.penalty.maturity - t).abs() > GRID_TOL {
            return invalid("penalty schedule maturity must equal the contract maturity");
        }
        let sg = &self.surrender_grid;
        if sg.len() < 2 || sg[0] != 0.0 {
            return invalid("surrender grid must start at t_0 = 0 and contain t_1");
        }
        if sg.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("surrender grid must be strictly increasing");
        }
        if !(*sg.last().unwrap() < t) {
            return invalid(format!(
                "surrender grid violates t_K< T (t_K = {}, T = {t})",
                sg.last().unwrap()
            ));
        }
        let mg = &self.mortality_grid;
        if mg.len() < 2 || mg[0] != 0.0 {
            return invalid("mortality grid must start at 0 and contain at least one date");
        }
        if mg.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("mortality grid must be strictly increasing");
        }
        if (mg.last().unwrap() - t).abs() > GRID_TOL {
            return invalid("mortality grid must end at T");
        }
        for &s in &sg[1..] {
            if !mg.iter().any(|&m| (m - s).abs() <= GRID_TOL) {
                return invalid(format!(
                    "surrender date {s} is not on the mortality grid"
                ));
            }
        }
        Ok(())
    }

    /// K, the index of the last surrender-grid point.
    pub fn k(&self) -> usize {
        self.surrender_grid.len() - 1
    }

    /// N, the number of mortality dates after 0.
    pub fn n(&self) -> usize {
        self.mortality_grid.len() - 1
    }

    /// Δt_l = t_l − t_{l−1}, with t_{K+1} read as T for l = K+1 never needed.
    pub fn dt(&self, l: usize) -> f64 {
        self.surrender_grid[l] - self.surrender_grid[l - 1]
    }

    pub fn guarantee(&self, t: f64) -> f64 {
        self.notional * (self.guarantee_rate * t).exp()
    }

    /// Number of interior surrender dates t_l (1 ≤ l ≤ K−1) strictly before t.
    pub fn surrender_dates_before(&self, t: f64) -> usize {
        let k = self.k();
        (1..k).filter(|&l| self.surrender_grid[l] < t - GRID_TOL).count()
    }
}

/// Which w-coefficient to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WKind {
    /// w_l for 1 ≤ l ≤ K−1.
    Interior(usize),
    /// w_K.
    Terminal,
    /// w_{t̄_i} for 1 ≤ i ≤ N.
    Death(usize),
}

/// ∫₀ᵗ A(s,H)ds + ∫₀ᴴ f(0,s)ds − δH − ω(t) − p(t)·[penalised].
pub fn spread_offset(
    contract: &ContractSpec,
    model: &HybridMarketModel,
    horizon: f64,
    t: f64,
    penalised: bool,
) -> Result<f64> {
    let pen = if penalised {
        contract.penalty.log_penalty(t)
    } else {
        0.0
    };
    Ok(model.integrated_drift(t, horizon)? + model.forward_curve.integral(horizon)
        - contract.guarantee_rate * horizon
        - model.equity_drift_omega(t)?
        - pen)
}

pub fn w_coefficient(contract: &ContractSpec, model: &HybridMarketModel, kind: WKind) -> Result<f64> {
    let t_mat = contract.maturity;
    match kind {
        WKind::Interior(l) => {
            if l == 0 || l >= contract.k() {
                return Err(VaError::IndexOutOfRange {
                    index: l,
                    what: "interior surrender date (1..K-1)",
                });
            }
            spread_offset(contract, model, t_mat, contract.surrender_grid[l], true)
        }
        WKind::Terminal => spread_offset(contract, model, t_mat, t_mat, false),
        WKind::Death(i) => {
            if i == 0 || i > contract.n() {
                return Err(VaError::IndexOutOfRange {
                    index: i,
                    what: "mortality date (1..N)",
                });
            }
            let tb = contract.mortality_grid[i];
            spread_offset(contract, model, tb, tb, true)
        }
    }
}

/// Reference model with the given moment budgets (M₁ = 0.15, M₂ = 3, ε = 0.1).
pub fn table1_model(horizon: f64, curve: ForwardCurve) -> HybridMarketModel {
    let d1 = Driver {
        params: NigParams::new(4.0, -3.8, 1.34, 0.0).unwrap(),
        budget: MomentBudget::new(0.15, 0.1).unwrap(),
    };
    let d2 = Driver {
        params: NigParams::new(5.73, -2.13, 8.3, 0.0).unwrap(),
        budget: MomentBudget::new(3.0, 0.1).unwrap(),
    };
    HybridMarketModel::new(
        0.0020898,
        0.1818,
        0.0065,
        curve,
        d1,
        d2,
        TimeQuadrature::default(),
        horizon,
    )
    .expect("reference parameters satisfy the model bounds")
}

/// Reference contract: δ = 0.01, I = 100, P(t) = 0.95 + 0.05 t/T, yearly surrender
/// dates, half-yearly mortality dates, r = 1.5.
pub fn table1_contract(maturity: f64) -> ContractSpec {
    ContractSpec::regular(maturity, 0.01, 100.0, 0.95, 1.0, 0.5, 1.5)
        .expect("reference contract is valid")
}
