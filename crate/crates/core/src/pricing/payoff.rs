use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use ndarray::ArrayView2;

use crate::error::{Error, Result};

/// A call on a path functional of the basket: `(statistic(path) − K)^+`.
///
/// `path` is `m × d`, one row per monitoring date.
pub trait Payoff: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn statistic(&self, path: ArrayView2<'_, f64>) -> f64;

    fn payoff(&self, path: ArrayView2<'_, f64>, strike: f64) -> f64 {
        (self.statistic(path) - strike).max(0.0)
    }
}

fn basket_average(row: ndarray::ArrayView1<'_, f64>) -> f64 {
    row.sum() / row.len() as f64
}

/// Average over monitoring dates of the basket average.
#[derive(Debug, Clone, Copy, Default)]
pub struct AsianBasketCall;

impl Payoff for AsianBasketCall {
    fn name(&self) -> &str {
        "asian"
    }
    fn statistic(&self, path: ArrayView2<'_, f64>) -> f64 {
        path.rows().into_iter().map(basket_average).sum::<f64>() / path.nrows() as f64
    }
}

/// Maximum over monitoring dates of the basket average.
#[derive(Debug, Clone, Copy, Default)]
pub struct LookbackBasketCall;

impl Payoff for LookbackBasketCall {
    fn name(&self) -> &str {
        "lookback"
    }
    fn statistic(&self, path: ArrayView2<'_, f64>) -> f64 {
        path.rows()
            .into_iter()
            .map(basket_average)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Name → payoff table.
#[derive(Clone, Debug)]
pub struct PayoffRegistry {
    payoffs: BTreeMap<String, Arc<dyn Payoff>>,
}

impl PayoffRegistry {
    pub fn empty() -> Self {
        Self {
            payoffs: BTreeMap::new(),
        }
    }

    /// `asian` and `lookback`.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(AsianBasketCall));
        reg.register(Arc::new(LookbackBasketCall));
        reg
    }

    pub fn register(&mut self, payoff: Arc<dyn Payoff>) {
        self.payoffs.insert(payoff.name().to_string(), payoff);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Payoff>> {
        self.payoffs
            .get(&name.to_ascii_lowercase())
            .cloned()
            .ok_or_else(|| Error::UnknownName {
                kind: "payoff",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.payoffs.keys().map(String::as_str).collect()
    }
}

impl Default for PayoffRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
