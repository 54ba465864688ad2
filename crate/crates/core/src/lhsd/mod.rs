//! Rank statistics, the LHSD point transform, the independent-LHS and plain
//! Monte Carlo baselines, and empirical copula functions.

mod empirical;
mod scheme;

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

pub use empirical::{empirical_copulas, EmpiricalCopula};
pub use scheme::{
    IndependentLhs, Lhsd, PlainMonteCarlo, SamplingScheme, SchemeRegistry,
};

/// `r_i = #{k : x_k ≤ x_i}` (1-based). Ties share the higher rank.
pub fn rank_statistics(x: &[f64]) -> Vec<usize> {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    x.iter()
        .map(|xi| sorted.partition_point(|s| s.total_cmp(xi).is_le()))
        .collect()
}

fn column_ranks(col: ArrayView1<'_, f64>) -> Vec<usize> {
    match col.as_slice() {
        Some(s) => rank_statistics(s),
        None => rank_statistics(&col.to_vec()),
    }
}

/// An `n × d` matrix of i.i.d. copula draws, one row per draw.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    u: Array2<f64>,
}

impl RawSample {
    pub fn new(u: Array2<f64>) -> Result<Self> {
        if u.nrows() == 0 || u.ncols() == 0 {
            return Err(Error::Invalid("raw sample must be nonempty".into()));
        }
        if let Some(&value) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::OutsideUnitCube { value });
        }
        Ok(Self { u })
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn d(&self) -> usize {
        self.u.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.u
    }
}

/// Offset of each point inside its stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaPolicy {
    /// Stratum midpoint.
    #[default]
    Half,
    /// Independent uniform offset per entry.
    IidUniform,
}

impl EtaPolicy {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "half" | "0.5" => Ok(EtaPolicy::Half),
            "iid" | "iid_uniform" | "uniform" => Ok(EtaPolicy::IidUniform),
            _ => Err(Error::UnknownName {
                kind: "eta policy",
                name: s.to_string(),
            }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EtaPolicy::Half => "half",
            EtaPolicy::IidUniform => "iid_uniform",
        }
    }
}

/// LHSD points: column `j` holds `(r_ij − 1 + η_ij)/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LhsdSample {
    pub v: Array2<f64>,
    pub eta_policy: EtaPolicy,
}

/// Replaces every column by its ranks, placing each point in its stratum.
/// Rows stay paired, so the cross-column rank dependence is preserved.
pub fn lhsd_transform<R: Rng + ?Sized>(
    raw: &RawSample,
    eta_policy: EtaPolicy,
    rng: &mut R,
) -> LhsdSample {
    LhsdSample {
        v: lhsd_points(raw.values(), eta_policy, rng),
        eta_policy,
    }
}

pub(crate) fn lhsd_points<R: Rng + ?Sized>(
    u: &Array2<f64>,
    eta_policy: EtaPolicy,
    rng: &mut R,
) -> Array2<f64> {
    let (n, d) = u.dim();
    let nf = n as f64;
    let mut v = Array2::zeros((n, d));
    for j in 0..d {
        let ranks = column_ranks(u.column(j));
        let mut out = v.column_mut(j);
        for (i, r) in ranks.into_iter().enumerate() {
            let eta = match eta_policy {
                EtaPolicy::Half => 0.5,
                EtaPolicy::IidUniform => rng.random::<f64>(),
            };
            out[i] = (r as f64 - 1.0) / nf + eta / nf;
        }
    }
    v
}

/// Independent Latin hypercube sample: `(π_j(i) − 1 + U_ij)/n` with `d`
/// independent uniform permutations.
pub fn lhs_transform<R: Rng + ?Sized>(raw: &RawSample, rng: &mut R) -> Array2<f64> {
    lhs_points(raw.values(), rng)
}

pub(crate) fn lhs_points<R: Rng + ?Sized>(u: &Array2<f64>, rng: &mut R) -> Array2<f64> {
    let (n, d) = u.dim();
    let nf = n as f64;
    let mut v = Array2::zeros((n, d));
    let mut perm: Vec<usize> = (1..=n).collect();
    for j in 0..d {
        perm.shuffle(rng);
        for i in 0..n {
            v[[i, j]] = (perm[i] as f64 - 1.0) / nf + u[[i, j]] / nf;
        }
    }
    v
}

/// Mean of `f` over the rows of `points`.
pub fn estimate<F: Fn(&[f64]) -> f64>(points: &Array2<f64>, f: F) -> f64 {
    let n = points.nrows();
    let mut row = vec![0.0; points.ncols()];
    let mut sum = 0.0;
    for r in points.axis_iter(Axis(0)) {
        row.iter_mut().zip(r.iter()).for_each(|(a, b)| *a = *b);
        sum += f(&row);
    }
    sum / n as f64
}

/// Fallible variant of [`estimate`]; the first error is returned.
pub fn try_estimate<E, F: Fn(&[f64]) -> Result<f64, E>>(
    points: &Array2<f64>,
    f: F,
) -> Result<f64, E> {
    let n = points.nrows();
    let mut row = vec![0.0; points.ncols()];
    let mut sum = 0.0;
    for r in points.axis_iter(Axis(0)) {
        row.iter_mut().zip(r.iter()).for_each(|(a, b)| *a = *b);
        sum += f(&row)?;
    }
    Ok(sum / n as f64)
}

/// LHSD estimator of `E f(U)`.
pub fn lhsd_estimate<R: Rng + ?Sized, F: Fn(&[f64]) -> f64>(
    raw: &RawSample,
    f: F,
    eta_policy: EtaPolicy,
    rng: &mut R,
) -> f64 {
    estimate(&lhsd_points(raw.values(), eta_policy, rng), f)
}

/// Plain Monte Carlo estimator of `E f(U)`.
pub fn mc_estimate<F: Fn(&[f64]) -> f64>(raw: &RawSample, f: F) -> f64 {
    estimate(raw.values(), f)
}
