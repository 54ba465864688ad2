//! Limit variances of the plain Monte Carlo and LHSD estimators.
//!
//! `σ²_MC` is a moment integral against the copula density. `σ²_LHSD` is the
//! double integral of the limit-field covariance against `df̂ ⊗ df̂`, and
//! [`variance_gap`] evaluates the correction `σ²_LHSD − σ²_MC` from its own
//! closed-form kernel, so the two routes can be checked against each other.
//! All three use the tensor midpoint rule at `g` and `2g` nodes per axis with
//! Richardson extrapolation.

mod field;
mod integrand;
pub mod quadrature;

use std::fmt;

use crate::copula::{CopulaFamily, CopulaModel};
use crate::error::{Error, Result};

pub use field::{brownian_sheet_cov, gc_cov};
pub use integrand::{
    BvIntegrand, Constant, FaceComponent, FirstCoordinate, HatMeasure, IntegrandRegistry,
    NegProduct, Product, Zero,
};
pub use quadrature::{Refined, REFINEMENT_TOLERANCE};

use field::{field_cov, Buf};

/// Largest dimension for the moment quadrature.
pub const MAX_DIM_MC: usize = 3;
/// Largest dimension for the `2d`-dimensional double integrals.
pub const MAX_DIM_LHSD: usize = 2;

fn check_dims(model: &CopulaModel, f_dim: usize, max: usize) -> Result<()> {
    if f_dim != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: f_dim,
        });
    }
    if model.dim() > max {
        return Err(Error::DimensionTooLarge {
            dim: model.dim(),
            max,
        });
    }
    Ok(())
}

fn check_resolution(g: usize) -> Result<()> {
    if g == 0 {
        return Err(Error::InvalidParameter {
            name: "quadrature_resolution",
            value: 0.0,
            reason: "must be positive",
        });
    }
    Ok(())
}

/// `∫ f² dC − (∫ f dC)²`.
pub fn sigma2_mc(model: &CopulaModel, f: &dyn BvIntegrand, g: usize) -> Result<f64> {
    check_dims(model, f.dim(), MAX_DIM_MC)?;
    check_resolution(g)?;
    let c = model.family();
    let d = model.dim();
    let first = quadrature::refined(d, g, |u| f.value(u) * c.density(u))?;
    let second = quadrature::refined(d, g, |u| {
        let v = f.value(u);
        v * v * c.density(u)
    })?;
    Ok(second.extrapolated - first.extrapolated * first.extrapolated)
}

/// `∫∫ kernel(u, ū) df̂(u) df̂(ū)` with the midpoint rule at `g` nodes.
fn double_integral<K>(measure: &HatMeasure, g: usize, kernel: &K) -> f64
where
    K: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let d = measure.dim();
    let comps = measure.components();
    let mut terms = Vec::with_capacity(comps.len() * comps.len());
    for a in comps {
        for b in comps {
            let ka = a.free.len();
            let value = quadrature::midpoint(ka + b.free.len(), g, |x| {
                let mut ub = Buf::new(d);
                let mut vb = Buf::new(d);
                let u = ub.get();
                let v = vb.get();
                let ra = measure.density_at(a, &x[..ka], u);
                let rb = measure.density_at(b, &x[ka..], v);
                if ra == 0.0 || rb == 0.0 {
                    return 0.0;
                }
                ra * rb * kernel(u, v)
            });
            terms.push(value);
        }
    }
    quadrature::neumaier_sum(terms)
}

fn refined_double<K>(measure: &HatMeasure, g: usize, kernel: K) -> Result<Refined>
where
    K: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let r = Refined::from_pair(
        double_integral(measure, g, &kernel),
        double_integral(measure, 2 * g, &kernel),
    );
    r.check(g)?;
    Ok(r)
}

/// `∫∫ E[G_C(u) G_C(ū)] df̂(u) df̂(ū)`.
pub fn sigma2_lhsd(model: &CopulaModel, measure: &HatMeasure, g: usize) -> Result<f64> {
    check_dims(model, measure.dim(), MAX_DIM_LHSD)?;
    check_resolution(g)?;
    let c = model.family();
    Ok(refined_double(measure, g, |u, v| field_cov(c, u, v))?.extrapolated)
}

/// Kernel of `σ²_LHSD − σ²_MC`:
/// `2 Σ_j ∂_jC(u)(C(ū) u_j − C(ū with ū_j ∧ u_j))
///  + Σ_j Σ_i ∂_jC(ū) ∂_iC(u)(C_ij(u_i, ū_j) − u_i ū_j)`,
/// where `C_ij` is the bivariate margin for `i ≠ j` and `min` for `i = j`.
fn gap_kernel(c: &dyn CopulaFamily, u: &[f64], ubar: &[f64]) -> f64 {
    let d = u.len();
    let mut sb = Buf::new(d);
    let s = sb.get();
    let c_ubar = c.cdf(ubar);
    let mut first = 0.0;
    for j in 0..d {
        s.copy_from_slice(ubar);
        s[j] = ubar[j].min(u[j]);
        first += c.partial(u, j) * (c_ubar * u[j] - c.cdf(s));
    }
    let mut second = 0.0;
    for j in 0..d {
        let dj = c.partial(ubar, j);
        if dj == 0.0 {
            continue;
        }
        for i in 0..d {
            let cij = if i == j {
                u[i].min(ubar[j])
            } else {
                s.fill(1.0);
                s[i] = u[i];
                s[j] = ubar[j];
                c.cdf(s)
            };
            second += dj * c.partial(u, i) * (cij - u[i] * ubar[j]);
        }
    }
    2.0 * first + second
}

/// `σ²_LHSD − σ²_MC` from the direct correction kernel.
pub fn variance_gap(model: &CopulaModel, measure: &HatMeasure, g: usize) -> Result<f64> {
    check_dims(model, measure.dim(), MAX_DIM_LHSD)?;
    check_resolution(g)?;
    let c = model.family();
    Ok(refined_double(measure, g, |u, v| gap_kernel(c, u, v))?.extrapolated)
}

/// The three limit quantities for one copula and test integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceDiagnostics {
    pub integrand: String,
    pub copula: String,
    pub resolution: usize,
    pub sigma2_mc: f64,
    pub sigma2_lhsd: f64,
    pub gap: f64,
}

impl VarianceDiagnostics {
    pub fn compute(model: &CopulaModel, f: std::sync::Arc<dyn BvIntegrand>, g: usize) -> Result<Self> {
        let measure = HatMeasure::new(f.clone());
        Ok(Self {
            integrand: f.name().to_string(),
            copula: model.to_string(),
            resolution: g,
            sigma2_mc: sigma2_mc(model, f.as_ref(), g)?,
            sigma2_lhsd: sigma2_lhsd(model, &measure, g)?,
            gap: variance_gap(model, &measure, g)?,
        })
    }

    /// `|σ²_LHSD − σ²_MC − gap|`.
    pub fn consistency_error(&self) -> f64 {
        (self.sigma2_lhsd - self.sigma2_mc - self.gap).abs()
    }
}

impl fmt::Display for VarianceDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "copula            : {}", self.copula)?;
        writeln!(f, "integrand         : {}", self.integrand)?;
        writeln!(f, "resolution        : {} / {}", self.resolution, 2 * self.resolution)?;
        writeln!(f, "sigma2_mc         : {:.10}", self.sigma2_mc)?;
        writeln!(f, "sigma2_lhsd       : {:.10}", self.sigma2_lhsd)?;
        writeln!(f, "gap               : {:.10}", self.gap)?;
        write!(f, "consistency error : {:.3e}", self.consistency_error())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn uniform_variance_in_one_dimension() {
        let m = CopulaModel::independence(1).unwrap();
        let v = sigma2_mc(&m, &FirstCoordinate { dim: 1 }, 16).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn lhsd_variance_vanishes_in_one_dimension() {
        let m = CopulaModel::independence(1).unwrap();
        let meas = HatMeasure::new(Arc::new(FirstCoordinate { dim: 1 }));
        assert!(sigma2_lhsd(&m, &meas, 16).unwrap().abs() < 1e-14);
    }

    #[test]
    fn dimension_guards() {
        let m = CopulaModel::independence(3).unwrap();
        let meas = HatMeasure::new(Arc::new(NegProduct { dim: 3 }));
        assert!(matches!(
            sigma2_lhsd(&m, &meas, 4),
            Err(Error::DimensionTooLarge { .. })
        ));
        let m4 = CopulaModel::independence(4).unwrap();
        assert!(matches!(
            sigma2_mc(&m4, &NegProduct { dim: 4 }, 4),
            Err(Error::DimensionTooLarge { .. })
        ));
        assert!(matches!(
            sigma2_mc(&m, &NegProduct { dim: 2 }, 4),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_measure_has_zero_gap() {
        let m = CopulaModel::fgm(0.5, 2).unwrap();
        let meas = HatMeasure::new(Arc::new(Zero { dim: 2 }));
        assert_eq!(variance_gap(&m, &meas, 4).unwrap(), 0.0);
    }
}
