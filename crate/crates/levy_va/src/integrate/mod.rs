//! d-dimensional integration of complex integrands: importance-sampled Monte
//! Carlo with batch statistics, and adaptive tensor Gauss-Kronrod cubature
//! for d ≤ 3.

mod quad;
pub mod rng;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result, VaError};

pub use quad::{adaptive_quadrature, QuadEstimate, QuadSettings};

/// A complex-valued function on ℝᵈ.
pub trait Integrand: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Complex64;
}

/// Closure adapter.
pub struct FnIntegrand<F> {
    dim: usize,
    f: F,
}

impl<F> FnIntegrand<F>
where
    F: Fn(&[f64]) -> Complex64 + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Integrand for FnIntegrand<F>
where
    F: Fn(&[f64]) -> Complex64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> Complex64 {
        (self.f)(x)
    }
}

/// An integrand with its prefactor and the sampling/truncation scales that
/// suit it. The integral of interest is `prefactor · ∫ evaluator`.
#[derive(Clone)]
pub struct IntegrandBundle {
    pub label: String,
    pub prefactor: f64,
    pub evaluator: Arc<dyn Integrand>,
    pub proposal_std: Vec<f64>,
    pub truncation: Vec<f64>,
}

impl std::fmt::Debug for IntegrandBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IntegrandBundle")
            .field("label", &self.label)
            .field("dimension", &self.dimension())
            .field("prefactor", &self.prefactor)
            .field("proposal_std", &self.proposal_std)
            .field("truncation", &self.truncation)
            .finish()
    }
}

impl IntegrandBundle {
    pub fn new(
        label: impl Into<String>,
        prefactor: f64,
        evaluator: Arc<dyn Integrand>,
        proposal_std: Vec<f64>,
        truncation: Vec<f64>,
    ) -> Self {
        Self {
            label: label.into(),
            prefactor,
            evaluator,
            proposal_std,
            truncation,
        }
    }

    pub fn dimension(&self) -> usize {
        self.evaluator.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.evaluator.eval(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSettings {
    /// Proposal draws per batch. Each draw x is evaluated at x and −x.
    pub samples_per_batch: usize,
    pub batches: usize,
    pub seed: u64,
    /// Overrides the bundle's proposal when set.
    pub proposal_std: Option<Vec<f64>>,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            samples_per_batch: 1_000_000,
            batches: 100,
            seed: 0,
            proposal_std: None,
        }
    }
}

impl McSettings {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_batch < 1 {
            return invalid("samples_per_batch must be >= 1");
        }
        if self.batches < 2 {
            return invalid("batches must be >= 2 for an unbiased variance");
        }
        if let Some(p) = &self.proposal_std {
            if p.iter().any(|s| !(*s > 0.0)) {
                return invalid("proposal standard deviations must be > 0");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    /// prefactor · mean of batch means.
    pub value: Complex64,
    /// prefactor · sd(batch means) / √batches, from the real parts.
    pub std_error: f64,
    pub batch_means: Vec<Complex64>,
    pub evaluations: usize,
}

const CHUNK_PAIRS: usize = 512;

/// Importance-sampled Monte Carlo with a zero-mean independent Gaussian
/// proposal. Each draw x is paired with −x.
pub fn mc_importance_integrate(bundle: &IntegrandBundle, settings: &McSettings) -> Result<McEstimate> {
    settings.validate()?;
    let d = bundle.dimension();
    if d == 0 {
        let v = bundle.prefactor * bundle.eval(&[]);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(VaError::NonFinite { point: vec![] });
        }
        return Ok(McEstimate {
            value: v,
            std_error: 0.0,
            batch_means: vec![v; settings.batches],
            evaluations: 1,
        });
    }
    let std = settings
        .proposal_std
        .clone()
        .unwrap_or_else(|| bundle.proposal_std.clone());
    if std.len() != d {
        return invalid(format!(
            "proposal has {} dimensions, integrand `{}` has {d}",
            std.len(),
            bundle.label
        ));
    }
    if std.iter().any(|s| !(*s > 0.0)) {
        return invalid("proposal standard deviations must be > 0");
    }
    let pairs = settings.samples_per_batch;
    let chunks = pairs.div_ceil(CHUNK_PAIRS);
    let log_norm: f64 = std.iter().map(|s| s.ln()).sum::<f64>() + 0.5 * d as f64 * (2.0 * PI).ln();

    let tasks: Vec<(usize, usize)> = (0..settings.batches)
        .flat_map(|b| (0..chunks).map(move |c| (b, c)))
        .collect();
    let partial: Vec<Complex64> = tasks
        .par_iter()
        .map(|&(b, c)| {
            let mut r = rng::stream_rng(settings.seed, rng::batch_stream(b, c));
            let n = CHUNK_PAIRS.min(pairs - c * CHUNK_PAIRS);
            let mut x = vec![0.0; d];
            let mut xm = vec![0.0; d];
            let mut acc = Complex64::new(0.0, 0.0);
            for _ in 0..n {
                let mut q = 0.0;
                for k in 0..d {
                    let z: f64 = StandardNormal.sample(&mut r);
                    q += z * z;
                    x[k] = std[k] * z;
                    xm[k] = -x[k];
                }
                let inv_p = (0.5 * q + log_norm).exp();
                let fp = bundle.eval(&x);
                let fm = bundle.eval(&xm);
                let v = 0.5 * (fp + fm) * inv_p;
                if !v.re.is_finite() || !v.im.is_finite() {
                    let point = if fp.re.is_finite() && fp.im.is_finite() { xm } else { x };
                    return Err(VaError::NonFinite { point });
                }
                acc += v;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;

    let batch_means: Vec<Complex64> = partial
        .chunks(chunks)
        .map(|cs| bundle.prefactor * cs.iter().sum::<Complex64>() / pairs as f64)
        .collect();
    let nb = batch_means.len() as f64;
    let mean = batch_means.iter().sum::<Complex64>() / nb;
    let var = batch_means
        .iter()
        .map(|m| (m.re - mean.re).powi(2))
        .sum::<f64>()
        / (nb - 1.0);
    Ok(McEstimate {
        value: mean,
        std_error: (var / nb).sqrt(),
        batch_means,
        evaluations: 2 * pairs * settings.batches,
    })
}
