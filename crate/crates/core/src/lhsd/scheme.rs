use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use rand::RngCore;

use super::{lhs_points, lhsd_points, EtaPolicy};
use crate::error::{Error, Result};

/// Turns an `n × k` array of raw copula draws into design points.
pub trait SamplingScheme: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn design(&self, raw: Array2<f64>, rng: &mut dyn RngCore) -> Array2<f64>;

    /// Every design coordinate is the midpoint `(k + 1/2)/n` of its stratum,
    /// so per-column quantiles can be tabulated once per `n`.
    fn midpoint_strata(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PlainMonteCarlo;

impl SamplingScheme for PlainMonteCarlo {
    fn name(&self) -> &str {
        "mc"
    }
    fn design(&self, raw: Array2<f64>, _rng: &mut dyn RngCore) -> Array2<f64> {
        raw
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Lhsd {
    pub eta: EtaPolicy,
}

impl SamplingScheme for Lhsd {
    fn name(&self) -> &str {
        match self.eta {
            EtaPolicy::Half => "lhsd",
            EtaPolicy::IidUniform => "lhsd-iid",
        }
    }
    fn design(&self, raw: Array2<f64>, rng: &mut dyn RngCore) -> Array2<f64> {
        lhsd_points(&raw, self.eta, rng)
    }
    fn midpoint_strata(&self) -> bool {
        self.eta == EtaPolicy::Half
    }
}

/// Independent LHS baseline; discards the cross-column dependence.
#[derive(Debug, Clone, Copy, Default)]
pub struct IndependentLhs;

impl SamplingScheme for IndependentLhs {
    fn name(&self) -> &str {
        "lhs"
    }
    fn design(&self, raw: Array2<f64>, rng: &mut dyn RngCore) -> Array2<f64> {
        lhs_points(&raw, rng)
    }
}

/// Name → scheme table.
#[derive(Clone, Debug)]
pub struct SchemeRegistry {
    schemes: BTreeMap<String, Arc<dyn SamplingScheme>>,
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        Self {
            schemes: BTreeMap::new(),
        }
    }

    /// `mc`, `lhsd`, `lhsd-iid` and `lhs`.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(PlainMonteCarlo));
        reg.register(Arc::new(Lhsd {
            eta: EtaPolicy::Half,
        }));
        reg.register(Arc::new(Lhsd {
            eta: EtaPolicy::IidUniform,
        }));
        reg.register(Arc::new(IndependentLhs));
        reg
    }

    pub fn register(&mut self, scheme: Arc<dyn SamplingScheme>) {
        self.schemes.insert(scheme.name().to_string(), scheme);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SamplingScheme>> {
        self.schemes
            .get(&name.to_ascii_lowercase())
            .cloned()
            .ok_or_else(|| Error::UnknownName {
                kind: "sampling scheme",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.schemes.keys().map(String::as_str).collect()
    }
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
