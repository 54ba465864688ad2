//! Tensor midpoint rule with a Richardson check.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid;

/// Largest acceptable gap between the `g` and `2g` rules.
pub const REFINEMENT_TOLERANCE: f64 = 1e-3;

/// Compensated (Neumaier) sum; the order of `values` fixes the result.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Midpoint rule with `g` nodes per axis over `[0,1]^dim`.
///
/// The first axis is split across threads; partial sums are combined in
/// index order so the result does not depend on scheduling.
pub fn midpoint<F>(dim: usize, g: usize, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if dim == 0 {
        return f(&[]);
    }
    let nodes = grid::midpoint_nodes(g);
    let weight = (g as f64).powi(dim as i32);
    let partials: Vec<f64> = nodes
        .par_iter()
        .map(|&x0| {
            let mut point = vec![x0; dim];
            let mut acc = Vec::with_capacity(g.pow((dim - 1) as u32));
            grid::for_each_point(dim - 1, &nodes, |rest| {
                point[1..].copy_from_slice(rest);
                acc.push(f(&point));
            });
            neumaier_sum(acc)
        })
        .collect();
    neumaier_sum(partials) / weight
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub coarse: f64,
    pub fine: f64,
    /// `(4 fine − coarse)/3`.
    pub extrapolated: f64,
}

impl Refined {
    pub fn from_pair(coarse: f64, fine: f64) -> Self {
        Self {
            coarse,
            fine,
            extrapolated: (4.0 * fine - coarse) / 3.0,
        }
    }

    /// Error estimate of the extrapolated value.
    pub fn error_estimate(&self) -> f64 {
        (self.fine - self.coarse).abs() / 3.0
    }

    pub fn check(&self, g: usize) -> Result<()> {
        let diff = (self.fine - self.coarse).abs();
        if diff > REFINEMENT_TOLERANCE || !diff.is_finite() {
            return Err(Error::ResolutionTooLow {
                coarse: g,
                fine: 2 * g,
                diff,
            });
        }
        Ok(())
    }
}

/// Midpoint rules at `g` and `2g` plus the extrapolated value.
pub fn refined<F>(dim: usize, g: usize, f: F) -> Result<Refined>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if g == 0 {
        return Err(Error::InvalidParameter {
            name: "quadrature_resolution",
            value: 0.0,
            reason: "must be positive",
        });
    }
    let r = Refined::from_pair(midpoint(dim, g, &f), midpoint(dim, 2 * g, &f));
    r.check(g)?;
    Ok(r)
}
