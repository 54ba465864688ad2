//! Variance-gamma basket dynamics.
//!
//! Each asset's log-return process is written as the difference of two
//! independent gamma processes `G⁺ − G⁻`. Within a monitoring step the `d`
//! positive increments are coupled by the copula `C⁺` and the negative ones
//! by `C⁻`; steps and signs are mutually independent.

mod gamma;
mod paths;

use std::fmt;

use crate::copula::CopulaModel;
use crate::error::{Error, Result};

pub use gamma::{GammaLaw, QuantileCache, QUANTILE_RTOL};
pub use paths::{
    asset_paths, draw_uniforms, invert_uniforms, simulate_increments, uniform_column, Increments,
    Sign,
};

/// Parameters of the two gamma processes whose difference is the VG process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPair {
    pub mu_plus: f64,
    pub nu_plus: f64,
    pub mu_minus: f64,
    pub nu_minus: f64,
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

/// `μ± = (√(θ² + 2σ²/c) ± θ)/2`, `ν± = μ±² c`.
pub fn derive_gamma_params(theta: f64, sigma: f64, c: f64) -> Result<GammaPair> {
    check_positive("sigma", sigma)?;
    check_positive("c", c)?;
    if !theta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "theta",
            value: theta,
            reason: "must be finite",
        });
    }
    let root = (theta * theta + 2.0 * sigma * sigma / c).sqrt();
    let mu_plus = (root + theta) / 2.0;
    let mu_minus = (root - theta) / 2.0;
    Ok(GammaPair {
        mu_plus,
        nu_plus: mu_plus * mu_plus * c,
        mu_minus,
        nu_minus: mu_minus * mu_minus * c,
    })
}

/// `w = log(1 − θc − σ²c/2)/c`, so that `E[exp(X_t + w t)] = 1`.
pub fn martingale_drift(theta: f64, sigma: f64, c: f64) -> Result<f64> {
    check_positive("sigma", sigma)?;
    check_positive("c", c)?;
    let arg = 1.0 - theta * c - sigma * sigma * c / 2.0;
    if !(arg > 0.0) {
        return Err(Error::InvalidParameter {
            name: "theta",
            value: theta,
            reason: "1 - theta c - sigma^2 c / 2 must be positive",
        });
    }
    Ok(arg.ln() / c)
}

/// One asset's VG parameters and the quantities derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VgAsset {
    pub theta: f64,
    pub sigma: f64,
    pub c: f64,
    pub s0: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub nu_plus: f64,
    pub nu_minus: f64,
    pub w: f64,
}

impl VgAsset {
    pub fn new(theta: f64, sigma: f64, c: f64, s0: f64) -> Result<Self> {
        check_positive("s0", s0)?;
        let g = derive_gamma_params(theta, sigma, c)?;
        let w = martingale_drift(theta, sigma, c)?;
        Ok(Self {
            theta,
            sigma,
            c,
            s0,
            mu_plus: g.mu_plus,
            mu_minus: g.mu_minus,
            nu_plus: g.nu_plus,
            nu_minus: g.nu_minus,
            w,
        })
    }

    /// Law of the `sign` gamma increment over a step of length `dt`:
    /// shape `μ²/ν · dt`, scale `ν/μ`.
    pub fn increment_law(&self, sign: Sign, dt: f64) -> Result<GammaLaw> {
        let (mu, nu) = match sign {
            Sign::Plus => (self.mu_plus, self.nu_plus),
            Sign::Minus => (self.mu_minus, self.nu_minus),
        };
        GammaLaw::new(mu * mu / nu * dt, nu / mu)
    }
}

/// How the deterministic drift enters `S_t = S_0 exp(drift · t + X_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftConvention {
    /// `drift = r + w`: discounted prices are martingales.
    #[default]
    RiskNeutral,
    /// `drift = w − r`, the exponent as printed next to the model.
    Literal,
}

impl DriftConvention {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "risk_neutral" | "risk-neutral" => Ok(Self::RiskNeutral),
            "literal" => Ok(Self::Literal),
            _ => Err(Error::UnknownName {
                kind: "drift convention",
                name: s.to_string(),
            }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::RiskNeutral => "risk_neutral",
            Self::Literal => "literal",
        }
    }

    pub fn drift(&self, rate: f64, w: f64) -> f64 {
        match self {
            Self::RiskNeutral => rate + w,
            Self::Literal => w - rate,
        }
    }
}

/// Assets, the two increment copulas and the monitoring grid.
#[derive(Debug, Clone)]
pub struct BasketModel {
    assets: Vec<VgAsset>,
    copula_plus: CopulaModel,
    copula_minus: CopulaModel,
    /// `t_1 < … < t_m`; `t_0 = 0` is implicit.
    times: Vec<f64>,
}

impl BasketModel {
    pub fn new(
        assets: Vec<VgAsset>,
        copula_plus: CopulaModel,
        copula_minus: CopulaModel,
        times: Vec<f64>,
    ) -> Result<Self> {
        let d = assets.len();
        if d == 0 {
            return Err(Error::Invalid("basket needs at least one asset".into()));
        }
        for cop in [&copula_plus, &copula_minus] {
            if cop.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: cop.dim(),
                });
            }
        }
        if times.is_empty() {
            return Err(Error::Invalid("monitoring grid is empty".into()));
        }
        let mut prev = 0.0;
        for &t in &times {
            if !(t > prev) || !t.is_finite() {
                return Err(Error::Invalid(format!(
                    "monitoring grid must be strictly increasing from 0, got {times:?}"
                )));
            }
            prev = t;
        }
        Ok(Self {
            assets,
            copula_plus,
            copula_minus,
            times,
        })
    }

    /// `m` equally spaced dates `dt, 2dt, …, m dt`.
    pub fn uniform_grid(steps: usize, dt: f64) -> Vec<f64> {
        (1..=steps).map(|k| k as f64 * dt).collect()
    }

    pub fn assets(&self) -> &[VgAsset] {
        &self.assets
    }

    pub fn copula(&self, sign: Sign) -> &CopulaModel {
        match sign {
            Sign::Plus => &self.copula_plus,
            Sign::Minus => &self.copula_minus,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.assets.len()
    }

    pub fn steps(&self) -> usize {
        self.times.len()
    }

    pub fn maturity(&self) -> f64 {
        *self.times.last().expect("grid is nonempty")
    }

    pub fn step_length(&self, k: usize) -> f64 {
        if k == 0 {
            self.times[0]
        } else {
            self.times[k] - self.times[k - 1]
        }
    }

    /// Number of uniform coordinates per path, `2 m d`.
    pub fn uniform_dim(&self) -> usize {
        2 * self.steps() * self.dim()
    }
}

impl fmt::Display for BasketModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} assets, {} steps to T = {}, C+ = {}, C- = {}",
            self.dim(),
            self.steps(),
            self.maturity(),
            self.copula_plus,
            self.copula_minus
        )
    }
}
