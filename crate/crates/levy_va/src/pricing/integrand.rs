//! The exponential-affine Fourier integrand shared by every benefit.
//!
//! A coordinate k carries a complex frequency z_k (z = iu for a surrender
//! factor, z = r + iv for the damped call payoff) and loads both drivers on
//! [0, window_k]: L¹ through b − Σ(s, m_k) and L² through σ₂. The integrand is
//!
//!   exp(Σ z_k w_k + c + ∫₀ᴴ θ¹(e₀(s) + Σ_k z_k 1{s≤τ_k}(b − Σ(s,m_k))) ds
//!                     + ∫₀ᴴ θ²(f₀ + σ₂ Σ_k z_k 1{s≤τ_k}) ds) · Π kernels,
//!
//! where (e₀, f₀) is (Σ(·,m), 0) under a bond-forward measure and (b, σ₂) under
//! the spot measure.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::integrate::Integrand;
use crate::levy_core::{Cumulant, NigParams};
use crate::market_model::HybridMarketModel;

const TOL: f64 = 1e-12;
const MAX_FAMILIES: usize = 4;

/// ln ∫ e^{−c y²} e^{−ixy} dy = ln √(π/c) − x²/(4c).
pub fn gaussian_log_transform(c: f64, x: f64) -> f64 {
    0.5 * (std::f64::consts::PI / c).ln() - x * x / (4.0 * c)
}

/// ∫ (eʸ − 1)⁺ e^{−(r+ix)y} dy = 1/((z − 1) z) with z = r + ix, for r > 1.
pub fn damped_call_transform(r: f64, x: f64) -> Complex64 {
    let z = Complex64::new(r, x);
    ((z - 1.0) * z).inv()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordKind {
    /// Surrender factor e^{−c x²}, c = β_s·Δt; kernel √(π/c)·e^{−u²/(4c)}.
    Gaussian { c: f64 },
    /// (eˣ − 1)⁺ damped by e^{−rx}; kernel e^{shift·z}/((z − 1) z).
    Damped { r: f64, shift: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinate {
    pub kind: CoordKind,
    pub window: f64,
    pub phase: f64,
    /// Bond maturity in the L¹ loading b − Σ(s, maturity).
    pub maturity: f64,
}

impl Coordinate {
    pub fn frequency(&self, x: f64) -> Complex64 {
        match self.kind {
            CoordKind::Gaussian { .. } => Complex64::new(0.0, x),
            CoordKind::Damped { r, .. } => Complex64::new(r, x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseMeasure {
    /// Forward measure of the bond maturing at the given date.
    Bond(f64),
    /// Stock as numeraire.
    Spot,
}

#[derive(Debug, Clone)]
struct Piece {
    nodes: std::ops::Range<usize>,
    len: f64,
    active: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SpreadIntegrand {
    coords: Vec<Coordinate>,
    family: Vec<usize>,
    n_fam: usize,
    theta1: NigParams,
    theta2: NigParams,
    sigma2: f64,
    f0: f64,
    log_const: f64,
    const_part: Complex64,
    pieces: Vec<Piece>,
    e0: Vec<f64>,
    weight: Vec<f64>,
    load: Vec<f64>,
}

impl SpreadIntegrand {
    /// `log_const` is added to the exponent; pass −∫₀ᴴA(s,H)ds for a bond
    /// measure and −ω(H) for the spot measure so that the zero frequency
    /// evaluates to 1.
    pub fn new(
        model: &HybridMarketModel,
        base: BaseMeasure,
        horizon: f64,
        log_const: f64,
        coords: Vec<Coordinate>,
    ) -> Result<Self> {
        if !(horizon > 0.0) {
            return invalid(format!("integrand horizon must be positive, got {horizon}"));
        }
        let mut maturities: Vec<f64> = Vec::new();
        let mut family = Vec::with_capacity(coords.len());
        for c in &coords {
            if !(c.window > 0.0) || c.window > horizon + TOL {
                return invalid(format!(
                    "coordinate window {} must lie in (0, {horizon}]",
                    c.window
                ));
            }
            match c.kind {
                CoordKind::Gaussian { c } if !(c > 0.0) => {
                    return invalid("Gaussian kernel scale must be > 0");
                }
                CoordKind::Damped { r, .. } if !(r > 1.0 && r < 2.0) => {
                    return invalid(format!("dampening r must lie in (1,2), got {r}"));
                }
                _ => {}
            }
            let f = match maturities.iter().position(|m| (m - c.maturity).abs() <= TOL) {
                Some(f) => f,
                None => {
                    maturities.push(c.maturity);
                    maturities.len() - 1
                }
            };
            family.push(f);
        }
        if maturities.len() > MAX_FAMILIES {
            return invalid("too many distinct loading maturities in one integrand");
        }
        let n_fam = maturities.len();
        let b = model.b_loading;
        let (f0, e0_of): (f64, Box<dyn Fn(f64) -> f64>) = match base {
            BaseMeasure::Bond(m) => (0.0, Box::new(move |s| model.sigma_bond(s, m))),
            BaseMeasure::Spot => (model.sigma2, Box::new(move |_| b)),
        };

        let mut cuts = vec![0.0];
        let mut inner: Vec<f64> = coords
            .iter()
            .map(|c| c.window)
            .filter(|&w| w < horizon - TOL)
            .collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup_by(|a, b| (*a - *b).abs() <= TOL);
        cuts.extend(inner);
        cuts.push(horizon);

        let mut out = Self {
            coords,
            family,
            n_fam,
            theta1: *model.theta1(),
            theta2: *model.theta2(),
            sigma2: model.sigma2,
            f0,
            log_const,
            const_part: Complex64::new(0.0, 0.0),
            pieces: Vec::new(),
            e0: Vec::new(),
            weight: Vec::new(),
            load: Vec::new(),
        };
        for pair in cuts.windows(2) {
            let (a, z) = (pair[0], pair[1]);
            let active: Vec<usize> = (0..out.coords.len())
                .filter(|&k| out.coords[k].window >= z - TOL)
                .collect();
            let nodes = model.quad.nodes(a, z, &[]);
            if active.is_empty() {
                for (s, w) in nodes {
                    out.const_part += w * out.theta1.eval(Complex64::new(e0_of(s), 0.0))?;
                }
                out.const_part += (z - a) * out.theta2.eval(Complex64::new(f0, 0.0))?;
                continue;
            }
            let start = out.e0.len();
            for (s, w) in nodes {
                out.e0.push(e0_of(s));
                out.weight.push(w);
                for m in &maturities {
                    out.load.push(b - model.sigma_bond(s, *m));
                }
            }
            out.pieces.push(Piece {
                nodes: start..out.e0.len(),
                len: z - a,
                active,
            });
        }
        // Real parts of the cumulant arguments do not depend on the integration
        // variable, so one check covers the whole domain.
        let z0: Vec<Complex64> = out.coords.iter().map(|c| c.frequency(0.0)).collect();
        out.exponent(&z0, true)?;
        Ok(out)
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    fn exponent(&self, z: &[Complex64], checked: bool) -> Result<Complex64> {
        let mut acc = self.const_part + self.log_const;
        for (c, zk) in self.coords.iter().zip(z) {
            acc += zk * c.phase;
        }
        let nf = self.n_fam;
        for p in &self.pieces {
            let mut zf = [Complex64::new(0.0, 0.0); MAX_FAMILIES];
            let mut zall = Complex64::new(0.0, 0.0);
            for &k in &p.active {
                zf[self.family[k]] += z[k];
                zall += z[k];
            }
            for n in p.nodes.clone() {
                let mut arg = Complex64::new(self.e0[n], 0.0);
                for (f, zv) in zf.iter().enumerate().take(nf) {
                    arg += zv * self.load[n * nf + f];
                }
                let th = if checked {
                    self.theta1.eval(arg)?
                } else {
                    self.theta1.eval_unchecked(arg)
                };
                acc += self.weight[n] * th;
            }
            let arg2 = self.f0 + self.sigma2 * zall;
            let th2 = if checked {
                self.theta2.eval(arg2)?
            } else {
                self.theta2.eval_unchecked(arg2)
            };
            acc += p.len * th2;
        }
        Ok(acc)
    }

    /// log E[exp(Σ z_k D_k)] under the base measure, strip-checked. The
    /// kernels are not included.
    pub fn log_moment(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.coords.len() {
            return invalid(format!(
                "expected {} frequencies, got {}",
                self.coords.len(),
                z.len()
            ));
        }
        self.exponent(z, true)
    }
}

impl Integrand for SpreadIntegrand {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn eval(&self, x: &[f64]) -> Complex64 {
        let z: Vec<Complex64> = self.coords.iter().zip(x).map(|(c, &x)| c.frequency(x)).collect();
        let mut e = self
            .exponent(&z, false)
            .expect("unchecked exponent is infallible");
        let mut kernel = Complex64::new(1.0, 0.0);
        for (k, c) in self.coords.iter().enumerate() {
            match c.kind {
                CoordKind::Gaussian { c } => {
                    e += gaussian_log_transform(c, x[k]);
                }
                CoordKind::Damped { r, shift } => {
                    e += shift * z[k];
                    kernel *= damped_call_transform(r, x[k]);
                }
            }
        }
        e.exp() * kernel
    }
}
