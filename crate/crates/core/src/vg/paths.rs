use ndarray::{Array2, Array3, Array4};
use rand::RngCore;

use super::{BasketModel, DriftConvention, QuantileCache};
use crate::error::Result;
use crate::lhsd::SamplingScheme;

/// Positive (`G⁺`) or negative (`G⁻`) movement part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus = 0,
    Minus = 1,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

/// Column of the uniform array holding step `k`, sign `s`, asset `j`.
pub fn uniform_column(k: usize, sign: Sign, j: usize, d: usize) -> usize {
    (k * 2 + sign as usize) * d + j
}

/// Gamma increments, shape `n × m × d × 2` with the sign as last axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    pub data: Array4<f64>,
}

impl Increments {
    pub fn n(&self) -> usize {
        self.data.shape()[0]
    }

    pub fn get(&self, path: usize, step: usize, asset: usize, sign: Sign) -> f64 {
        self.data[[path, step, asset, sign as usize]]
    }

    pub fn zeros(n: usize, steps: usize, d: usize) -> Self {
        Self {
            data: Array4::zeros((n, steps, d, 2)),
        }
    }
}

/// Raw `n × 2md` uniforms: one independent copula draw per step and sign.
pub fn draw_uniforms(basket: &BasketModel, n: usize, rng: &mut dyn RngCore) -> Result<Array2<f64>> {
    let d = basket.dim();
    let mut out = Array2::zeros((n, basket.uniform_dim()));
    for mut row in out.rows_mut() {
        let row = row.as_slice_mut().expect("standard layout");
        for k in 0..basket.steps() {
            for sign in Sign::BOTH {
                let start = uniform_column(k, sign, 0, d);
                basket
                    .copula(sign)
                    .family()
                    .sample_into(rng, &mut row[start..start + d])?;
            }
        }
    }
    Ok(out)
}

/// Maps design points through the per-asset inverse gamma distribution
/// functions. With `midpoint_strata` every coordinate is a stratum midpoint
/// and the quantile is looked up in `cache`.
pub fn invert_uniforms(
    basket: &BasketModel,
    points: &Array2<f64>,
    midpoint_strata: bool,
    cache: &QuantileCache,
) -> Result<Increments> {
    let n = points.nrows();
    let d = basket.dim();
    let mut inc = Increments::zeros(n, basket.steps(), d);
    for k in 0..basket.steps() {
        let dt = basket.step_length(k);
        for sign in Sign::BOTH {
            for (j, asset) in basket.assets().iter().enumerate() {
                let law = asset.increment_law(sign, dt)?;
                let col = points.column(uniform_column(k, sign, j, d));
                if midpoint_strata {
                    let table = cache.midpoints(&law, n)?;
                    let nf = n as f64;
                    for (i, &v) in col.iter().enumerate() {
                        let idx = ((v * nf) as usize).min(n - 1);
                        inc.data[[i, k, j, sign as usize]] = table[idx];
                    }
                } else {
                    for (i, &v) in col.iter().enumerate() {
                        inc.data[[i, k, j, sign as usize]] = law.quantile(v)?;
                    }
                }
            }
        }
    }
    Ok(inc)
}

/// Draws raw uniforms, applies `scheme` across the `n` paths and inverts.
pub fn simulate_increments(
    basket: &BasketModel,
    n: usize,
    scheme: &dyn SamplingScheme,
    rng: &mut dyn RngCore,
    cache: &QuantileCache,
) -> Result<Increments> {
    let raw = draw_uniforms(basket, n, rng)?;
    let points = scheme.design(raw, rng);
    invert_uniforms(basket, &points, scheme.midpoint_strata(), cache)
}

/// Prices `S_{t_k} = S_0 exp(drift · t_k + Σ_{l≤k} (ΔG⁺ − ΔG⁻))`,
/// shape `n × m × d`.
pub fn asset_paths(
    basket: &BasketModel,
    inc: &Increments,
    rate: f64,
    convention: DriftConvention,
) -> Array3<f64> {
    let n = inc.n();
    let d = basket.dim();
    let m = basket.steps();
    let mut out = Array3::zeros((n, m, d));
    for (j, asset) in basket.assets().iter().enumerate() {
        let drift = convention.drift(rate, asset.w);
        for i in 0..n {
            let mut x = 0.0;
            for (k, &t) in basket.times().iter().enumerate() {
                x += inc.get(i, k, j, Sign::Plus) - inc.get(i, k, j, Sign::Minus);
                out[[i, k, j]] = asset.s0 * (drift * t + x).exp();
            }
        }
    }
    out
}
