//! Test integrands of bounded variation and the signed measure of their
//! truncation `f̂` (equal to `f` inside the cube, zero on every upper face
//! `u_j = 1`).
//!
//! For smooth `f` the measure `df̂` splits over the upper faces: for each set
//! `F` of free coordinates (the others pinned at 1) it has density
//! `(−1)^{d−|F|} ∂_F f(u_F, 1)` with respect to Lebesgue measure on that face.
//! `F = ∅` is the point mass `(−1)^d f(1, …, 1)` at the top corner. The mass
//! of `(a, 1]^d` is then `(−1)^d f(a)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Smooth integrand on `[0,1]^d` with analytic face derivatives.
pub trait BvIntegrand: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn value(&self, u: &[f64]) -> f64;

    /// Mixed partial of `f` in the coordinates `free` (zero-based, sorted),
    /// evaluated at `u` whose remaining coordinates are 1.
    fn face_partial(&self, free: &[usize], u: &[f64]) -> f64;

    /// `false` when `face_partial` vanishes identically on that face.
    fn face_supported(&self, _free: &[usize]) -> bool {
        true
    }
}

/// One face component of `df̂`.
#[derive(Debug, Clone)]
pub struct FaceComponent {
    pub free: Vec<usize>,
    pub sign: f64,
}

/// `df̂` as a list of face components.
#[derive(Debug, Clone)]
pub struct HatMeasure {
    integrand: Arc<dyn BvIntegrand>,
    components: Vec<FaceComponent>,
}

impl HatMeasure {
    pub fn new(integrand: Arc<dyn BvIntegrand>) -> Self {
        let d = integrand.dim();
        let mut components = Vec::new();
        for mask in 0u32..(1u32 << d) {
            let free: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
            if !integrand.face_supported(&free) {
                continue;
            }
            let sign = if (d - free.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
            components.push(FaceComponent { free, sign });
        }
        Self {
            integrand,
            components,
        }
    }

    pub fn integrand(&self) -> &dyn BvIntegrand {
        self.integrand.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.integrand.dim()
    }

    pub fn components(&self) -> &[FaceComponent] {
        &self.components
    }

    /// Writes the full point of a face into `full` and returns the density
    /// there. `local` holds the free coordinates in order.
    pub fn density_at(&self, comp: &FaceComponent, local: &[f64], full: &mut [f64]) -> f64 {
        full.fill(1.0);
        for (&i, &x) in comp.free.iter().zip(local) {
            full[i] = x;
        }
        comp.sign * self.integrand.face_partial(&comp.free, full)
    }
}

/// `f(u) = −∏ (1 − u_i)`: non-decreasing in every argument and nonpositive.
#[derive(Debug, Clone)]
pub struct NegProduct {
    pub dim: usize,
}

impl BvIntegrand for NegProduct {
    fn name(&self) -> &str {
        "neg-product"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, u: &[f64]) -> f64 {
        -u.iter().map(|x| 1.0 - x).product::<f64>()
    }
    fn face_partial(&self, free: &[usize], _u: &[f64]) -> f64 {
        if free.len() != self.dim {
            // a pinned coordinate contributes the factor 1 − 1
            return 0.0;
        }
        if self.dim.is_multiple_of(2) {
            -1.0
        } else {
            1.0
        }
    }
    fn face_supported(&self, free: &[usize]) -> bool {
        free.len() == self.dim
    }
}

/// `f(u) = ∏ u_i`.
#[derive(Debug, Clone)]
pub struct Product {
    pub dim: usize,
}

impl BvIntegrand for Product {
    fn name(&self) -> &str {
        "product"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, u: &[f64]) -> f64 {
        u.iter().product()
    }
    fn face_partial(&self, free: &[usize], u: &[f64]) -> f64 {
        (0..self.dim)
            .filter(|i| !free.contains(i))
            .map(|i| u[i])
            .product()
    }
}

/// `f(u) = u_1`.
#[derive(Debug, Clone)]
pub struct FirstCoordinate {
    pub dim: usize,
}

impl BvIntegrand for FirstCoordinate {
    fn name(&self) -> &str {
        "identity"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, u: &[f64]) -> f64 {
        u[0]
    }
    fn face_partial(&self, free: &[usize], u: &[f64]) -> f64 {
        match free {
            [] => u[0],
            [0] => 1.0,
            _ => 0.0,
        }
    }
    fn face_supported(&self, free: &[usize]) -> bool {
        matches!(free, [] | [0])
    }
}

/// `f(u) = c`.
#[derive(Debug, Clone)]
pub struct Constant {
    pub dim: usize,
    pub value: f64,
}

impl BvIntegrand for Constant {
    fn name(&self) -> &str {
        "constant"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _u: &[f64]) -> f64 {
        self.value
    }
    fn face_partial(&self, free: &[usize], _u: &[f64]) -> f64 {
        if free.is_empty() {
            self.value
        } else {
            0.0
        }
    }
    fn face_supported(&self, free: &[usize]) -> bool {
        free.is_empty()
    }
}

/// `f ≡ 0`; its measure has no components.
#[derive(Debug, Clone)]
pub struct Zero {
    pub dim: usize,
}

impl BvIntegrand for Zero {
    fn name(&self) -> &str {
        "zero"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _u: &[f64]) -> f64 {
        0.0
    }
    fn face_partial(&self, _free: &[usize], _u: &[f64]) -> f64 {
        0.0
    }
    fn face_supported(&self, _free: &[usize]) -> bool {
        false
    }
}

type IntegrandCtor = fn(usize) -> Arc<dyn BvIntegrand>;

/// Name → test integrand table used by the diagnostics command.
#[derive(Clone)]
pub struct IntegrandRegistry {
    ctors: BTreeMap<String, IntegrandCtor>,
}

impl IntegrandRegistry {
    pub fn builtin() -> Self {
        let mut ctors: BTreeMap<String, IntegrandCtor> = BTreeMap::new();
        ctors.insert("neg-product".into(), |dim| Arc::new(NegProduct { dim }));
        ctors.insert("product".into(), |dim| Arc::new(Product { dim }));
        ctors.insert("identity".into(), |dim| Arc::new(FirstCoordinate { dim }));
        ctors.insert("constant".into(), |dim| {
            Arc::new(Constant { dim, value: 1.0 })
        });
        ctors.insert("zero".into(), |dim| Arc::new(Zero { dim }));
        Self { ctors }
    }

    pub fn register(&mut self, name: &str, ctor: IntegrandCtor) {
        self.ctors.insert(name.to_string(), ctor);
    }

    pub fn build(&self, name: &str, dim: usize) -> Result<Arc<dyn BvIntegrand>> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                value: 0.0,
                reason: "must be positive",
            });
        }
        self.ctors
            .get(name)
            .map(|ctor| ctor(dim))
            .ok_or_else(|| Error::UnknownName {
                kind: "test integrand",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.ctors.keys().map(String::as_str).collect()
    }
}

impl Default for IntegrandRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
