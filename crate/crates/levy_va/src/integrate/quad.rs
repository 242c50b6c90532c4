//! Global adaptive cubature on [−R₁,R₁]×…×[−R_d,R_d] with a tensor 15-point
//! Kronrod rule and its embedded 7-point Gauss rule.
//!
//! The box is folded along the first axis: cells live in x₀ ≥ 0 and each node
//! evaluates f(x) + f(−x). Mirror-image contributions then always enter
//! together, so a conjugate-symmetric integrand yields an exactly real sum.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::IntegrandBundle;
use crate::error::{invalid, Result, VaError};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Rule {
    x: [f64; 15],
    wk: [f64; 15],
    wg: [f64; 15],
}

fn rule() -> Rule {
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for j in 0..7 {
        x[j] = -XGK[j];
        x[14 - j] = XGK[j];
        wk[j] = WGK[j];
        wk[14 - j] = WGK[j];
        if j % 2 == 1 {
            wg[j] = WG[j / 2];
            wg[14 - j] = WG[j / 2];
        }
    }
    wk[7] = WGK[7];
    wg[7] = WG[3];
    Rule { x, wk, wg }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadSettings {
    /// Half-widths per dimension; the bundle's own truncation when `None`.
    pub truncation_radius: Option<Vec<f64>>,
    /// Absolute tolerance on prefactor · integral.
    pub tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            truncation_radius: None,
            tolerance: 1e-8,
            max_subdivisions: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadEstimate {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: Complex64,
    error: f64,
    split: usize,
    order: usize,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.order.cmp(&self.order))
    }
}

fn eval_cell(bundle: &IntegrandBundle, r: &Rule, lo: &[f64], hi: &[f64], scale: f64) -> Result<(Complex64, f64, usize)> {
    let d = lo.len();
    let n = 15usize.pow(d as u32);
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let vol: f64 = half.iter().product();
    let mut kron = Complex64::new(0.0, 0.0);
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut mixed = vec![Complex64::new(0.0, 0.0); d];
    let mut x = vec![0.0; d];
    let mut xm = vec![0.0; d];
    let mut idx = vec![0usize; d];
    for flat in 0..n {
        let mut rem = flat;
        for k in 0..d {
            idx[k] = rem % 15;
            rem /= 15;
            x[k] = mid[k] + half[k] * r.x[idx[k]];
            xm[k] = -x[k];
        }
        let fp = bundle.eval(&x);
        let fm = bundle.eval(&xm);
        if !(fp.re.is_finite() && fp.im.is_finite()) {
            return Err(VaError::NonFinite { point: x });
        }
        if !(fm.re.is_finite() && fm.im.is_finite()) {
            return Err(VaError::NonFinite { point: xm });
        }
        let f = fp + fm;
        let wk: f64 = idx.iter().map(|&i| r.wk[i]).product();
        let wg: f64 = idx.iter().map(|&i| r.wg[i]).product();
        kron += wk * f;
        gauss += wg * f;
        for k in 0..d {
            if r.wg[idx[k]] != 0.0 {
                mixed[k] += wk / r.wk[idx[k]] * r.wg[idx[k]] * f;
            }
        }
    }
    let kron = scale * vol * kron;
    let gauss = scale * vol * gauss;
    let mut split = 0;
    let mut worst = -1.0;
    for (k, m) in mixed.iter().enumerate() {
        let diff = (kron - scale * vol * m).norm();
        if diff > worst {
            worst = diff;
            split = k;
        }
    }
    Ok((kron, (kron - gauss).norm(), split))
}

/// Adaptive cubature of `prefactor · ∫ evaluator` over the truncation box.
pub fn adaptive_quadrature(bundle: &IntegrandBundle, settings: &QuadSettings) -> Result<QuadEstimate> {
    let d = bundle.dimension();
    if d == 0 {
        return Ok(QuadEstimate {
            value: bundle.prefactor * bundle.eval(&[]),
            error_estimate: 0.0,
            evaluations: 1,
            subdivisions: 0,
        });
    }
    if d > 3 {
        return invalid(format!(
            "adaptive quadrature supports dimension <= 3, `{}` has {d}",
            bundle.label
        ));
    }
    let radius = settings
        .truncation_radius
        .clone()
        .unwrap_or_else(|| bundle.truncation.clone());
    if radius.len() != d || radius.iter().any(|r| !(*r > 0.0)) {
        return invalid("truncation radius must be positive in every dimension");
    }
    if !(settings.tolerance > 0.0) {
        return invalid("quadrature tolerance must be positive");
    }
    let r = rule();
    let per_cell = 2 * 15usize.pow(d as u32);
    let mut lo: Vec<f64> = radius.iter().map(|x| -x).collect();
    lo[0] = 0.0;
    let hi = radius.clone();
    let (value, error, split) = eval_cell(bundle, &r, &lo, &hi, bundle.prefactor)?;
    let mut heap = BinaryHeap::new();
    heap.push(Cell {
        lo,
        hi,
        value,
        error,
        split,
        order: 0,
    });
    let mut total_err = error;
    let mut evaluations = per_cell;
    let mut order = 1;
    let mut subdivisions = 0;
    while total_err > settings.tolerance {
        if subdivisions >= settings.max_subdivisions {
            return Err(VaError::QuadratureNotConverged {
                label: bundle.label.clone(),
                estimate: total_err,
                tolerance: settings.tolerance,
                subdivisions,
            });
        }
        let cell = heap.pop().expect("heap is never empty");
        let k = cell.split;
        let m = 0.5 * (cell.lo[k] + cell.hi[k]);
        let mut hi_a = cell.hi.clone();
        hi_a[k] = m;
        let mut lo_b = cell.lo.clone();
        lo_b[k] = m;
        let halves = [(cell.lo.clone(), hi_a), (lo_b, cell.hi.clone())];
        total_err -= cell.error;
        for (lo, hi) in halves {
            let (value, error, split) = eval_cell(bundle, &r, &lo, &hi, bundle.prefactor)?;
            total_err += error;
            heap.push(Cell {
                lo,
                hi,
                value,
                error,
                split,
                order,
            });
            order += 1;
        }
        evaluations += 2 * per_cell;
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            total_err = heap.iter().map(|c| c.error).sum();
        }
    }
    let mut cells = heap.into_vec();
    cells.sort_by_key(|c| c.order);
    let value = cells.iter().map(|c| c.value).sum();
    let error_estimate = cells.iter().map(|c| c.error).sum();
    Ok(QuadEstimate {
        value,
        error_estimate,
        evaluations,
        subdivisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::FnIntegrand;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn gaussian_density_over_eight_sigma() {
        let s = 0.3;
        let f = FnIntegrand::new(1, move |x: &[f64]| {
            Complex64::new((-(x[0] * x[0]) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt()), 0.0)
        });
        let b = IntegrandBundle::new("g", 1.0, Arc::new(f), vec![s], vec![8.0 * s]);
        let q = adaptive_quadrature(
            &b,
            &QuadSettings {
                tolerance: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((q.value.re - 1.0).abs() < 1e-10, "{}", q.value.re);
    }

    #[test]
    fn rejects_high_dimension() {
        let f = FnIntegrand::new(4, |_: &[f64]| Complex64::new(1.0, 0.0));
        let b = IntegrandBundle::new("x", 1.0, Arc::new(f), vec![1.0; 4], vec![1.0; 4]);
        assert!(adaptive_quadrature(&b, &QuadSettings::default()).is_err());
    }

    #[test]
    fn kronrod_weights_sum_to_two() {
        let r = rule();
        assert!((r.wk.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!((r.wg.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
