//! Parametric copula families.
//!
//! A family implements [`CopulaFamily`]: closed-form distribution function,
//! hand-differentiated first partials and the mixed partial density.
//! Families are constructed by name through a [`CopulaRegistry`]; the
//! [`CopulaModel`] handle wraps a constructed family and validates inputs
//! before delegating to it.

mod conditions;
mod families;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};

pub use conditions::{Condition, ConditionReport, Witness, DEFAULT_CONDITION_BUDGET};
pub use families::{Amh, Fgm, Independence};

/// A d-dimensional copula with closed-form evaluation.
///
/// Implementations may assume the caller has already checked that `u` has
/// length [`dim`](CopulaFamily::dim) and lies in the closed unit cube.
pub trait CopulaFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    /// Dependence parameter; 0 for parameter-free families.
    fn alpha(&self) -> f64;

    fn cdf(&self, u: &[f64]) -> f64;

    /// `∂C/∂u_j` (zero-based `j`).
    fn partial(&self, u: &[f64], j: usize) -> f64;

    /// Mixed partial `∂^d C / ∂u_1 … ∂u_d`.
    fn density(&self, u: &[f64]) -> f64;

    /// Finite upper bound of the density on the cube, if one exists.
    fn density_bound(&self) -> Option<f64>;

    /// Draws one point into `out`. The default is rejection from the
    /// uniform envelope scaled by [`density_bound`](CopulaFamily::density_bound).
    fn sample_into(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> Result<()> {
        let bound = self
            .density_bound()
            .ok_or_else(|| Error::UnboundedDensity(self.name().to_string()))?;
        loop {
            for x in out.iter_mut() {
                *x = rng.random::<f64>();
            }
            let accept: f64 = rng.random();
            if accept * bound <= self.density(out) {
                return Ok(());
            }
        }
    }
}

type Constructor = fn(f64, usize) -> Result<Arc<dyn CopulaFamily>>;

/// Name → constructor table for copula families.
#[derive(Clone)]
pub struct CopulaRegistry {
    constructors: BTreeMap<String, Constructor>,
}

impl CopulaRegistry {
    pub fn empty() -> Self {
        Self {
            constructors: BTreeMap::new(),
        }
    }

    /// Registry holding `independence`, `fgm` and `amh`.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("independence", |_, dim| {
            Ok(Arc::new(Independence::new(dim)?) as Arc<dyn CopulaFamily>)
        });
        reg.register("fgm", |alpha, dim| {
            Ok(Arc::new(Fgm::new(alpha, dim)?) as Arc<dyn CopulaFamily>)
        });
        reg.register("amh", |alpha, dim| {
            Ok(Arc::new(Amh::new(alpha, dim)?) as Arc<dyn CopulaFamily>)
        });
        reg
    }

    pub fn register(&mut self, name: &str, ctor: Constructor) {
        self.constructors.insert(name.to_ascii_lowercase(), ctor);
    }

    pub fn names(&self) -> Vec<&str> {
        self.constructors.keys().map(String::as_str).collect()
    }

    pub fn build(&self, name: &str, alpha: f64, dim: usize) -> Result<CopulaModel> {
        let ctor = self
            .constructors
            .get(&name.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownName {
                kind: "copula family",
                name: name.to_string(),
            })?;
        Ok(CopulaModel::from_family(ctor(alpha, dim)?))
    }
}

impl Default for CopulaRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Validated handle to a copula family. Cheap to clone and immutable.
#[derive(Clone, Debug)]
pub struct CopulaModel {
    family: Arc<dyn CopulaFamily>,
}

impl CopulaModel {
    /// Builds a built-in family by name.
    pub fn new(family: &str, alpha: f64, dim: usize) -> Result<Self> {
        CopulaRegistry::builtin().build(family, alpha, dim)
    }

    pub fn independence(dim: usize) -> Result<Self> {
        Ok(Self::from_family(Arc::new(Independence::new(dim)?)))
    }

    pub fn fgm(alpha: f64, dim: usize) -> Result<Self> {
        Ok(Self::from_family(Arc::new(Fgm::new(alpha, dim)?)))
    }

    pub fn amh(alpha: f64, dim: usize) -> Result<Self> {
        Ok(Self::from_family(Arc::new(Amh::new(alpha, dim)?)))
    }

    pub fn from_family(family: Arc<dyn CopulaFamily>) -> Self {
        Self { family }
    }

    /// Unchecked access for hot loops.
    pub fn family(&self) -> &dyn CopulaFamily {
        self.family.as_ref()
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn alpha(&self) -> f64 {
        self.family.alpha()
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        match u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            Some(&value) => Err(Error::OutsideUnitCube { value }),
            None => Ok(()),
        }
    }

    pub fn cdf(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        Ok(self.family.cdf(u))
    }

    /// `∂C/∂u_j` for zero-based `j`.
    pub fn partial_derivative(&self, u: &[f64], j: usize) -> Result<f64> {
        self.check_point(u)?;
        if j >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: self.dim(),
            });
        }
        Ok(self.family.partial(u, j))
    }

    pub fn density(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        Ok(self.family.density(u))
    }

    /// `n` i.i.d. draws, one per row.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Array2<f64>> {
        let d = self.dim();
        let mut out = Array2::zeros((n, d));
        let mut dyn_rng = DynRng(rng);
        for mut row in out.rows_mut() {
            let slice = row
                .as_slice_mut()
                .expect("rows of a standard-layout array are contiguous");
            self.family.sample_into(&mut dyn_rng, slice)?;
        }
        Ok(out)
    }

    /// Grid certification of the two variance-reduction conditions.
    pub fn check_conditions(&self, grid_resolution: usize) -> Result<ConditionReport> {
        conditions::check(self, grid_resolution, DEFAULT_CONDITION_BUDGET)
    }

    pub fn check_conditions_with_budget(
        &self,
        grid_resolution: usize,
        budget: u128,
    ) -> Result<ConditionReport> {
        conditions::check(self, grid_resolution, budget)
    }
}

impl fmt::Display for CopulaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(alpha = {}, dim = {})",
            self.name(),
            self.alpha(),
            self.dim()
        )
    }
}

/// Adapts a possibly unsized generic RNG to `dyn RngCore`.
struct DynRng<'a, R: ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for DynRng<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}
