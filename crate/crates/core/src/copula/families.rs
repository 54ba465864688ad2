use rand::{Rng, RngCore};

use super::{check_alpha, CopulaFamily};
use crate::error::{Error, Result};
use crate::grid;

fn product(u: &[f64]) -> f64 {
    u.iter().product()
}

fn product_except(u: &[f64], j: usize) -> f64 {
    u.iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, x)| x)
        .product()
}

fn co_product(u: &[f64]) -> f64 {
    u.iter().map(|x| 1.0 - x).product()
}

fn co_product_except(u: &[f64], j: usize) -> f64 {
    u.iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, x)| 1.0 - x)
        .product()
}

fn check_dim(dim: usize, min: usize) -> Result<()> {
    if dim < min {
        return Err(Error::InvalidParameter {
            name: "dim",
            value: dim as f64,
            reason: if min == 1 {
                "must be positive"
            } else {
                "one-parameter families need at least two dimensions"
            },
        });
    }
    Ok(())
}

/// `C(u) = ∏ u_i`.
#[derive(Debug, Clone)]
pub struct Independence {
    dim: usize,
}

impl Independence {
    pub fn new(dim: usize) -> Result<Self> {
        check_dim(dim, 1)?;
        Ok(Self { dim })
    }
}

impl CopulaFamily for Independence {
    fn name(&self) -> &'static str {
        "independence"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn alpha(&self) -> f64 {
        0.0
    }
    fn cdf(&self, u: &[f64]) -> f64 {
        product(u)
    }
    fn partial(&self, u: &[f64], j: usize) -> f64 {
        product_except(u, j)
    }
    fn density(&self, _u: &[f64]) -> f64 {
        1.0
    }
    fn density_bound(&self) -> Option<f64> {
        Some(1.0)
    }
    fn sample_into(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> Result<()> {
        for x in out.iter_mut() {
            *x = rng.random();
        }
        Ok(())
    }
}

/// Multivariate Farlie–Gumbel–Morgenstern copula
/// `C(u) = ∏ u_i · (1 + α ∏ (1 − u_i))`.
///
/// Lower-dimensional margins are independent; only the full d-dimensional
/// law carries dependence.
#[derive(Debug, Clone)]
pub struct Fgm {
    dim: usize,
    alpha: f64,
}

impl Fgm {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        check_alpha(alpha)?;
        check_dim(dim, 2)?;
        Ok(Self { dim, alpha })
    }
}

impl CopulaFamily for Fgm {
    fn name(&self) -> &'static str {
        "fgm"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn cdf(&self, u: &[f64]) -> f64 {
        product(u) * (1.0 + self.alpha * co_product(u))
    }
    fn partial(&self, u: &[f64], j: usize) -> f64 {
        // d/du_j [P (1 + αQ)] = P_j (1 + αQ) − α P Q_j
        let pj = product_except(u, j);
        let qj = co_product_except(u, j);
        pj * (1.0 + self.alpha * qj * (1.0 - u[j])) - self.alpha * pj * u[j] * qj
    }
    fn density(&self, u: &[f64]) -> f64 {
        1.0 + self.alpha * u.iter().map(|x| 1.0 - 2.0 * x).product::<f64>()
    }
    fn density_bound(&self) -> Option<f64> {
        Some(1.0 + self.alpha.abs())
    }
}

/// Multivariate Ali–Mikhail–Haq form
/// `C(u) = ∏ u_i / (1 − α ∏ (1 − u_i))`.
///
/// For d > 2 this is not the Archimedean AMH extension. Construction checks
/// that the density is nonnegative on a grid and rejects the parameter
/// otherwise.
#[derive(Debug, Clone)]
pub struct Amh {
    dim: usize,
    alpha: f64,
    bound: Option<f64>,
}

/// Safety factor applied to the grid maximum of the density.
const AMH_BOUND_FACTOR: f64 = 1.5;
/// Evaluations spent locating the density maximum at construction.
const AMH_SCAN_POINTS: usize = 200_000;

impl Amh {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        check_alpha(alpha)?;
        check_dim(dim, 2)?;
        let mut amh = Self {
            dim,
            alpha,
            bound: None,
        };
        amh.bound = amh.scan_density()?;
        Ok(amh)
    }

    /// Checks nonnegativity and returns the envelope bound (`None` when the
    /// density blows up at the origin, i.e. α = 1).
    fn scan_density(&self) -> Result<Option<f64>> {
        let g = ((AMH_SCAN_POINTS as f64).powf(1.0 / self.dim as f64).floor() as usize).max(4);
        let nodes = grid::midpoint_nodes(g);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        grid::for_each_point(self.dim, &nodes, |u| {
            let c = self.density(u);
            min = min.min(c);
            max = max.max(c);
        });
        if min < -1e-12 {
            return Err(Error::InvalidCopula(format!(
                "amh density negative ({min:e}) for alpha = {}, dim = {}",
                self.alpha, self.dim
            )));
        }
        if self.alpha >= 1.0 {
            return Ok(None);
        }
        // Extremes of this family sit on the corners of the cube.
        grid::for_each_point(self.dim, &[0.0, 1.0], |u| {
            max = max.max(self.density(u));
        });
        Ok(Some(max * AMH_BOUND_FACTOR))
    }
}

/// Eulerian polynomial `A_m(x)` with `Σ_{k≥1} k^m x^k = x A_m(x) / (1 − x)^{m+1}`.
fn eulerian(m: usize, x: f64) -> f64 {
    // Row m of the Eulerian number triangle.
    let mut row = vec![1.0];
    for n in 2..=m {
        let mut next = vec![0.0; n];
        for (k, slot) in next.iter_mut().enumerate() {
            let keep = if k < row.len() { (k + 1) as f64 * row[k] } else { 0.0 };
            let shift = if k >= 1 && k - 1 < row.len() {
                (n - k) as f64 * row[k - 1]
            } else {
                0.0
            };
            *slot = keep + shift;
        }
        row = next;
    }
    row.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl CopulaFamily for Amh {
    fn name(&self) -> &'static str {
        "amh"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn cdf(&self, u: &[f64]) -> f64 {
        let p = product(u);
        if p == 0.0 {
            return 0.0;
        }
        p / (1.0 - self.alpha * co_product(u))
    }
    fn partial(&self, u: &[f64], j: usize) -> f64 {
        // C = P / D with D = 1 − αQ; ∂_j D = α Q_j.
        let pj = product_except(u, j);
        if pj == 0.0 {
            return 0.0;
        }
        let qj = co_product_except(u, j);
        let denom = 1.0 - self.alpha * qj * (1.0 - u[j]);
        (pj * denom - self.alpha * pj * u[j] * qj) / (denom * denom)
    }
    fn density(&self, u: &[f64]) -> f64 {
        // Expanding 1/(1 − αQ) as a geometric series and differentiating
        // termwise gives Σ_m e_m S_m, where e_m are the coefficients of
        // ∏ ((1 − u_i) − t u_i) in t and S_m are polylog-type sums in αQ.
        let x = self.alpha * co_product(u);
        let mut coeffs = vec![1.0];
        for &ui in u {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (m, c) in coeffs.iter().enumerate() {
                next[m] += c * (1.0 - ui);
                next[m + 1] -= c * ui;
            }
            coeffs = next;
        }
        // e_0 = Q cancels the 1/Q carried by every term of the series.
        let one_minus = 1.0 - x;
        let mut total = 1.0 / one_minus;
        let mut pow = one_minus;
        for (m, e) in coeffs.iter().enumerate().skip(1) {
            pow *= one_minus;
            total += e * self.alpha * eulerian(m, x) / pow;
        }
        total
    }
    fn density_bound(&self) -> Option<f64> {
        self.bound
    }
}
