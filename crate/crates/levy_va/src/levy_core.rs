//! Cumulant functions of the Lévy drivers and deterministic time quadrature.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{invalid, Result, VaError};

/// A cumulant function θ(z) = log E[exp(z L_1)], analytic on a vertical strip.
pub trait Cumulant: Send + Sync + std::fmt::Debug {
    /// Open interval of admissible real parts.
    fn strip(&self) -> (f64, f64);

    /// Evaluate without checking the strip.
    fn eval_unchecked(&self, z: Complex64) -> Complex64;

    fn in_strip(&self, re: f64) -> bool {
        let (lo, hi) = self.strip();
        re > lo && re < hi
    }

    fn check(&self, re: f64) -> Result<()> {
        if self.in_strip(re) {
            Ok(())
        } else {
            let (lo, hi) = self.strip();
            Err(VaError::StripViolation { re, lo, hi })
        }
    }

    fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.check(z.re)?;
        Ok(self.eval_unchecked(z))
    }
}

/// Normal inverse Gaussian parameters (α, β, δ, μ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigParams {
    pub alpha: f64,
    pub beta_skew: f64,
    pub delta_scale: f64,
    pub mu: f64,
}

impl NigParams {
    pub fn new(alpha: f64, beta_skew: f64, delta_scale: f64, mu: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta_skew,
            delta_scale,
            mu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return invalid(format!("NIG alpha must be > 0, got {}", self.alpha));
        }
        if !(self.delta_scale > 0.0) {
            return invalid(format!("NIG delta must be > 0, got {}", self.delta_scale));
        }
        if !(self.beta_skew.abs() < self.alpha) {
            return invalid(format!(
                "NIG requires |beta| < alpha, got beta={} alpha={}",
                self.beta_skew, self.alpha
            ));
        }
        if !self.mu.is_finite() {
            return invalid("NIG mu must be finite");
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        (self.alpha * self.alpha - self.beta_skew * self.beta_skew).sqrt()
    }

    /// θ'(0), the mean of L_1.
    pub fn mean(&self) -> f64 {
        self.mu + self.delta_scale * self.beta_skew / self.gamma()
    }

    /// θ''(0), the variance of L_1.
    pub fn variance(&self) -> f64 {
        self.delta_scale * self.alpha * self.alpha / self.gamma().powi(3)
    }
}

impl Cumulant for NigParams {
    fn strip(&self) -> (f64, f64) {
        (-self.alpha - self.beta_skew, self.alpha - self.beta_skew)
    }

    #[inline]
    fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let w = z + self.beta_skew;
        let q = Complex64::new(self.alpha * self.alpha, 0.0) - w * w;
        self.mu * z + self.delta_scale * (self.gamma() - principal_sqrt(q))
    }
}

/// NIG cumulant θ(z) = μz + δ(√(α²−β²) − √(α²−(β+z)²)).
pub fn nig_cumulant(params: &NigParams, z: Complex64) -> Result<Complex64> {
    params.eval(z)
}

/// Principal square root, branch cut on the negative real axis.
#[inline]
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    if y == 0.0 {
        return if x >= 0.0 {
            Complex64::new(x.sqrt(), y)
        } else {
            Complex64::new(0.0, (-x).sqrt().copysign(y))
        };
    }
    let r = (x * x + y * y).sqrt();
    if x >= 0.0 {
        let t = (0.5 * (r + x)).sqrt();
        Complex64::new(t, 0.5 * y / t)
    } else {
        let t = (0.5 * (r - x)).sqrt();
        Complex64::new(0.5 * y.abs() / t, t.copysign(y))
    }
}

/// Exponential-moment budget (M, ε) for one driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBudget {
    pub m_bound: f64,
    pub epsilon_slack: f64,
}

impl MomentBudget {
    pub fn new(m_bound: f64, epsilon_slack: f64) -> Result<Self> {
        if !(m_bound > 0.0) || !(epsilon_slack > 0.0) {
            return invalid(format!(
                "moment budget needs M > 0 and eps > 0, got M={m_bound} eps={epsilon_slack}"
            ));
        }
        Ok(Self {
            m_bound,
            epsilon_slack,
        })
    }
}

/// True iff (1+ε)M < α − |β|, which puts ±(1+ε)M inside the NIG strip.
pub fn verify_moment_budget(params: &NigParams, budget: &MomentBudget) -> bool {
    (1.0 + budget.epsilon_slack) * budget.m_bound < params.alpha - params.beta_skew.abs()
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared cached rule with `n` points.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("rule cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
            .clone()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule for time integrals: each panel between
/// breakpoints gets `ceil(nodes_per_year * length)` points (at least 8).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeQuadrature {
    pub nodes_per_year: usize,
}

impl Default for TimeQuadrature {
    fn default() -> Self {
        Self { nodes_per_year: 8 }
    }
}

impl TimeQuadrature {
    pub fn new(nodes_per_year: usize) -> Result<Self> {
        if nodes_per_year == 0 {
            return invalid("nodes_per_year must be positive");
        }
        Ok(Self { nodes_per_year })
    }

    fn points_for(&self, len: f64) -> usize {
        ((self.nodes_per_year as f64 * len).ceil() as usize).max(8)
    }

    /// Nodes and weights on [a, b], split at any breakpoints inside.
    pub fn nodes(&self, a: f64, b: f64, breakpoints: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if !(b > a) {
            return out;
        }
        let mut cuts = vec![a];
        let mut inner: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&p| p > a && p < b)
            .collect();
        inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
        inner.dedup();
        cuts.extend(inner);
        cuts.push(b);
        for pair in cuts.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let rule = GaussLegendre::cached(self.points_for(hi - lo));
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                out.push((mid + half * x, half * w));
            }
        }
        out
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, breakpoints: &[f64]) -> f64 {
        self.nodes(a, b, breakpoints)
            .iter()
            .map(|&(s, w)| w * f(s))
            .sum()
    }
}

/// ∫₀^t_end θ(f(s)) ds by composite Gauss-Legendre. Every node is strip-checked.
pub fn time_integrated_cumulant<F>(
    cumulant: &dyn Cumulant,
    integrand: F,
    t_end: f64,
    quad: &TimeQuadrature,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    time_integrated_cumulant_split(cumulant, integrand, t_end, quad, &[])
}

/// As [`time_integrated_cumulant`], with panel breakpoints where the integrand jumps.
pub fn time_integrated_cumulant_split<F>(
    cumulant: &dyn Cumulant,
    integrand: F,
    t_end: f64,
    quad: &TimeQuadrature,
    breakpoints: &[f64],
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if t_end < 0.0 {
        return invalid(format!("t_end must be non-negative, got {t_end}"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, w) in quad.nodes(0.0, t_end, breakpoints) {
        acc += w * cumulant.eval(integrand(s))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1() -> NigParams {
        NigParams::new(4.0, -3.8, 1.34, 0.0).unwrap()
    }

    #[test]
    fn theta_zero_is_zero() {
        assert_eq!(l1().eval(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn symmetric_case_on_imaginary_axis() {
        let p = NigParams::new(2.0, 0.0, 1.0, 0.0).unwrap();
        for u in [0.3, 1.0, 7.5] {
            let v = p.eval(Complex64::new(0.0, u)).unwrap();
            assert!((v.re - (2.0 - (4.0 + u * u).sqrt())).abs() < 1e-14);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn strip_violation_is_reported() {
        let err = l1().eval(Complex64::new(-0.25, 0.0)).unwrap_err();
        assert!(matches!(err, VaError::StripViolation { .. }));
        assert!(err.to_string().contains("strip"));
    }

    #[test]
    fn moment_budget_examples() {
        let p = l1();
        assert!(verify_moment_budget(&p, &MomentBudget::new(0.15, 0.1).unwrap()));
        let tight = MomentBudget {
            m_bound: 0.19,
            epsilon_slack: 0.1,
        };
        assert!(!verify_moment_budget(&p, &tight));
        let p2 = NigParams::new(5.73, -2.13, 8.3, 0.0).unwrap();
        assert!(verify_moment_budget(&p2, &MomentBudget::new(3.0, 0.1).unwrap()));
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let r = GaussLegendre::new(10);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn principal_sqrt_matches_num_complex() {
        for &(x, y) in &[(1.0, 2.0), (-3.0, 0.5), (-3.0, -0.5), (0.0, -2.0), (4.0, 0.0), (-4.0, 0.0)] {
            let z = Complex64::new(x, y);
            let a = principal_sqrt(z);
            let b = z.sqrt();
            assert!((a - b).norm() < 1e-14, "{z}: {a} vs {b}");
        }
    }
}
