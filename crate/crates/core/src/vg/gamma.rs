//! Inverse of the gamma distribution function.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Relative tolerance of the root find.
pub const QUANTILE_RTOL: f64 = 1e-10;
const MAX_ITER: usize = 200;

/// Gamma law with shape `k` and scale `θ` (mean `kθ`, variance `kθ²`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLaw {
    shape: f64,
    scale: f64,
    ln_gamma_shape: f64,
}

impl GammaLaw {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "shape",
                value: shape,
                reason: "must be positive and finite",
            });
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: scale,
                reason: "must be positive and finite",
            });
        }
        Ok(Self {
            shape,
            scale,
            ln_gamma_shape: ln_gamma(shape),
        })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gamma_lr(self.shape, x / self.scale)
        }
    }

    /// Smallest `x` with `F(x) ≥ p`.
    ///
    /// Halley steps on the regularized incomplete gamma function, kept inside
    /// a bisection bracket. For `p > 1/2` the upper tail is matched instead
    /// to keep relative accuracy.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if p == 0.0 {
            return Ok(0.0);
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::GammaInversion { p });
        }
        let a = self.shape;
        let upper = p > 0.5;
        let q = 1.0 - p;
        let residual = |x: f64| {
            if upper {
                q - gamma_ur(a, x)
            } else {
                gamma_lr(a, x) - p
            }
        };

        let mut x = self.initial_guess(p);
        if x == 0.0 {
            // the quantile is below the smallest positive double
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        for _ in 0..MAX_ITER {
            let r = residual(x);
            if r == 0.0 {
                return Ok(x * self.scale);
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let log_pdf = (a - 1.0) * x.ln() - x - self.ln_gamma_shape;
            let pdf = log_pdf.exp();
            let mut next = if pdf > 0.0 && pdf.is_finite() {
                let u = r / pdf;
                let corr = (u * ((a - 1.0) / x - 1.0)).min(1.0);
                x - u / (1.0 - 0.5 * corr)
            } else {
                f64::NAN
            };
            if next.is_finite() && (next - x).abs() <= QUANTILE_RTOL * x {
                return Ok(next.max(0.0) * self.scale);
            }
            if !(next > lo && next < hi) {
                next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(lo) };
            }
            if hi - lo <= QUANTILE_RTOL * lo {
                return Ok(next * self.scale);
            }
            x = next;
        }
        Err(Error::GammaInversion { p })
    }

    fn initial_guess(&self, p: f64) -> f64 {
        let a = self.shape;
        if a > 1.0 {
            // Wilson–Hilferty with a rational approximation of the normal quantile.
            let pp = if p < 0.5 { p } else { 1.0 - p };
            let t = (-2.0 * pp.ln()).sqrt();
            let mut z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
            if p >= 0.5 {
                z = -z;
            }
            let s = 1.0 / (9.0 * a);
            (a * (1.0 - s + z * s.sqrt()).powi(3)).max(1e-3)
        } else {
            let t = 1.0 - a * (0.253 + a * 0.12);
            if p < t {
                (p / t).powf(1.0 / a)
            } else {
                1.0 - (1.0 - (p - t) / (1.0 - t)).ln()
            }
        }
    }
}

/// Quantiles at the stratum midpoints `(k + 1/2)/n`, shared between
/// replications that use the same `(shape, scale, n)`.
#[derive(Debug, Default)]
pub struct QuantileCache {
    tables: RwLock<HashMap<(u64, u64, usize), Arc<Vec<f64>>>>,
}

impl QuantileCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn midpoints(&self, law: &GammaLaw, n: usize) -> Result<Arc<Vec<f64>>> {
        let key = (law.shape.to_bits(), law.scale.to_bits(), n);
        if let Some(t) = self.tables.read().expect("cache lock").get(&key) {
            return Ok(t.clone());
        }
        let table = (0..n)
            .map(|k| law.quantile((k as f64 + 0.5) / n as f64))
            .collect::<Result<Vec<_>>>()?;
        let table = Arc::new(table);
        self.tables
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| table.clone());
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.tables.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
