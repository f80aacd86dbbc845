//! Gaussian product kernel, bandwidth rule and box weighting function.
//!
//! Every estimator in the crate works with the unscaled kernel
//! `K(u) = prod_i phi(u_i)` and divides by `h^p` where a density is needed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default rate exponent in `h = c * scale * n^(-1/delta)`.
pub const DEFAULT_DELTA: f64 = 4.25;
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-10;
pub const DEFAULT_MIN_REGIME_OBS: usize = 10;

/// Kernel order, bandwidth and the numerical guards shared by all estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Kernel order. Only the second-order Gaussian kernel is evaluated.
    pub order: u32,
    pub c: f64,
    pub delta: f64,
    /// Resolved bandwidth.
    pub h: f64,
    /// Covariate dimension.
    pub dim: usize,
    /// Lower clamp for any estimated density used as a denominator.
    pub density_floor: f64,
    /// Minimum number of observations a regime (or sub-regime) must hold.
    pub min_regime_obs: usize,
}

impl KernelConfig {
    /// Resolves `h = c * scale * n^(-1/delta)` and fills the remaining fields with defaults.
    pub fn from_rule(c: f64, scale: f64, n: usize, delta: f64, dim: usize) -> Result<Self> {
        let h = resolve_bandwidth(c, scale, n, delta)?;
        let mut cfg = Self::with_bandwidth(h, dim)?;
        cfg.c = c;
        cfg.delta = delta;
        Ok(cfg)
    }

    /// Config with an explicit bandwidth.
    pub fn with_bandwidth(h: f64, dim: usize) -> Result<Self> {
        let cfg = Self {
            order: 2,
            c: 1.0,
            delta: DEFAULT_DELTA,
            h,
            dim,
            density_floor: DEFAULT_DENSITY_FLOOR,
            min_regime_obs: DEFAULT_MIN_REGIME_OBS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::Domain(format!("bandwidth must be positive, got {}", self.h)));
        }
        if self.dim == 0 {
            return Err(Error::Domain("covariate dimension must be at least 1".into()));
        }
        if self.order < 2 || self.order % 2 != 0 {
            return Err(Error::Domain(format!("kernel order must be even and >= 2, got {}", self.order)));
        }
        if self.order != 2 {
            return Err(Error::Domain("only the second-order Gaussian kernel is implemented".into()));
        }
        if !(self.density_floor.is_finite() && self.density_floor > 0.0) {
            return Err(Error::Domain("density floor must be positive".into()));
        }
        Ok(())
    }

    /// `h^p`, the volume factor of the scaled kernel.
    pub fn h_pow_p(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }
}

/// `c * scale * n^(-1/delta)`.
pub fn resolve_bandwidth(c: f64, scale: f64, n: usize, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    for (name, v) in [("c", c), ("scale", scale), ("delta", delta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(c * scale * (-(n as f64).ln() / delta).exp())
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Product Gaussian kernel at `u` (unscaled).
pub fn kernel_value(u: &[f64], config: &KernelConfig) -> Result<f64> {
    if u.len() != config.dim {
        return Err(Error::Domain(format!(
            "kernel argument has length {}, expected {}",
            u.len(),
            config.dim
        )));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite kernel argument".into()));
    }
    Ok(gauss_product(u))
}

#[inline]
pub(crate) fn gauss_product(u: &[f64]) -> f64 {
    let sq: f64 = u.iter().map(|v| v * v).sum();
    INV_SQRT_2PI.powi(u.len() as i32) * (-0.5 * sq).exp()
}

/// Kernel weight between two covariate rows, `K((a - b) / h)`.
#[inline]
pub(crate) fn pair_weight(a: &[f64], b: &[f64], h: f64) -> f64 {
    if a.len() == 1 {
        let u = (a[0] - b[0]) / h;
        return INV_SQRT_2PI * (-0.5 * u * u).exp();
    }
    let mut sq = 0.0;
    for (x, y) in a.iter().zip(b) {
        let u = (x - y) / h;
        sq += u * u;
    }
    INV_SQRT_2PI.powi(a.len() as i32) * (-0.5 * sq).exp()
}

/// `int K(u)^2 du` for the Gaussian product kernel, `1 / (2 sqrt(pi))^p`.
pub fn roughness_constant(dim: usize) -> f64 {
    (2.0 * PI.sqrt()).powi(-(dim as i32))
}

/// `int (int K(u) K(u + w) du)^2 dw` for the Gaussian product kernel, `1 / (2 sqrt(2 pi))^p`.
pub fn convolution_constant(dim: usize) -> f64 {
    (2.0 * (2.0 * PI).sqrt()).powi(-(dim as i32))
}

/// Closed box `C` of the weighting function `a(x) = 1{x in C}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl WeightBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Domain(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::Domain(format!("box dimension {i}: need lower < upper, got [{lo}, {hi}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Symmetric box `[-half_width, half_width]^dim`.
    pub fn symmetric(half_width: f64, dim: usize) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    /// Box covering the whole space.
    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Unchecked membership test for rows already known to have the right length.
    #[inline]
    pub(crate) fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }
}

/// `a(x)`: 1 when `x` lies in the closed box, 0 otherwise.
pub fn weight(x: &[f64], weight_box: &WeightBox) -> Result<f64> {
    if x.len() != weight_box.dim() {
        return Err(Error::Domain(format!(
            "point has dimension {}, box has {}",
            x.len(),
            weight_box.dim()
        )));
    }
    Ok(if weight_box.contains(x) { 1.0 } else { 0.0 })
}
