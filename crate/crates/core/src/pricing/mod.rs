//! Basket payoffs and the replication experiment comparing a baseline
//! sampling scheme (plain Monte Carlo) with a candidate (LHSD).

mod payoff;

use std::fmt;
use std::sync::Arc;

use ndarray::Axis;
use rand::RngCore;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lhsd::{Lhsd, PlainMonteCarlo, SamplingScheme};
use crate::rng::child_stream;
use crate::stats;
use crate::vg::{asset_paths, simulate_increments, BasketModel, DriftConvention, QuantileCache};

pub use payoff::{AsianBasketCall, LookbackBasketCall, Payoff, PayoffRegistry};

/// A basket call: payoff functional, strike and risk-free rate. Maturity and
/// monitoring dates are those of the [`BasketModel`] it is priced on.
#[derive(Debug, Clone)]
pub struct OptionSpec {
    pub payoff: Arc<dyn Payoff>,
    pub strike: f64,
    pub rate: f64,
}

impl OptionSpec {
    pub fn new(payoff: Arc<dyn Payoff>, strike: f64, rate: f64) -> Result<Self> {
        if !(strike >= 0.0 && strike.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "strike",
                value: strike,
                reason: "must be nonnegative and finite",
            });
        }
        if !rate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rate",
                value: rate,
                reason: "must be finite",
            });
        }
        Ok(Self {
            payoff,
            strike,
            rate,
        })
    }

    /// Builds the payoff by name from the built-in registry.
    pub fn named(kind: &str, strike: f64, rate: f64) -> Result<Self> {
        Self::new(PayoffRegistry::builtin().get(kind)?, strike, rate)
    }
}

/// Discounted mean payoff for each `(payoff, strike)` of `specs`, all on one
/// set of `n` simulated paths.
fn price_grid(
    basket: &BasketModel,
    specs: &[OptionSpec],
    scheme: &dyn SamplingScheme,
    n: usize,
    convention: DriftConvention,
    rng: &mut dyn RngCore,
    cache: &QuantileCache,
) -> Result<Vec<f64>> {
    let rate = specs.first().map_or(0.0, |s| s.rate);
    let inc = simulate_increments(basket, n, scheme, rng, cache)?;
    let paths = asset_paths(basket, &inc, rate, convention);

    // Distinct payoff functionals, evaluated once per path.
    let mut kinds: Vec<&Arc<dyn Payoff>> = Vec::new();
    let slot: Vec<usize> = specs
        .iter()
        .map(|s| match kinds.iter().position(|k| Arc::ptr_eq(k, &s.payoff)) {
            Some(i) => i,
            None => {
                kinds.push(&s.payoff);
                kinds.len() - 1
            }
        })
        .collect();

    let mut sums = vec![0.0; specs.len()];
    let mut stat = vec![0.0; kinds.len()];
    for path in paths.axis_iter(Axis(0)) {
        for (s, k) in stat.iter_mut().zip(&kinds) {
            *s = k.statistic(path);
        }
        for ((sum, spec), &k) in sums.iter_mut().zip(specs).zip(&slot) {
            *sum += (stat[k] - spec.strike).max(0.0);
        }
    }
    let discount = (-rate * basket.maturity()).exp();
    Ok(sums.into_iter().map(|s| discount * s / n as f64).collect())
}

fn check_count(name: &'static str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::InvalidParameter {
            name,
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    Ok(())
}

/// `e^{−rT}` times the mean payoff over `n` paths simulated with `scheme`.
pub fn price_option(
    basket: &BasketModel,
    spec: &OptionSpec,
    scheme: &dyn SamplingScheme,
    n: usize,
    convention: DriftConvention,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    check_count("n", n)?;
    let prices = price_grid(
        basket,
        std::slice::from_ref(spec),
        scheme,
        n,
        convention,
        rng,
        &QuantileCache::new(),
    )?;
    Ok(prices[0])
}

/// Replication summary for one sampling scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub method: String,
    pub price_mean: f64,
    /// Sample standard deviation over the replications.
    pub price_std: f64,
    pub n: usize,
    pub m_reps: usize,
    /// One estimate per replication, in replication order.
    pub estimates: Vec<f64>,
}

impl EstimatorReport {
    fn from_estimates(method: &str, n: usize, estimates: Vec<f64>) -> Self {
        Self {
            method: method.to_string(),
            price_mean: stats::mean(&estimates),
            price_std: if estimates.len() > 1 {
                stats::sample_std(&estimates)
            } else {
                0.0
            },
            n,
            m_reps: estimates.len(),
            estimates,
        }
    }

    /// Standard error of `price_mean`.
    pub fn standard_error(&self) -> f64 {
        self.price_std / (self.m_reps as f64).sqrt()
    }
}

/// Both estimators for one option.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub payoff: String,
    pub strike: f64,
    pub lhsd: EstimatorReport,
    pub mc: EstimatorReport,
}

impl ExperimentReport {
    /// `std(MC) / std(LHSD)`.
    pub fn std_ratio(&self) -> f64 {
        self.mc.price_std / self.lhsd.price_std
    }

    /// `var(MC) / var(LHSD)`, the square of [`std_ratio`](Self::std_ratio).
    pub fn var_ratio(&self) -> f64 {
        self.std_ratio().powi(2)
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:>8} K={:<6} lhsd {:.5} ({:.5})  mc {:.5} ({:.5})  ratio {:.3}",
            self.payoff,
            self.strike,
            self.lhsd.price_mean,
            self.lhsd.price_std,
            self.mc.price_mean,
            self.mc.price_std,
            self.std_ratio()
        )
    }
}

/// Settings of a replication experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub basket: BasketModel,
    pub convention: DriftConvention,
    /// Paths per estimator.
    pub n: usize,
    pub m_reps: usize,
    pub master_seed: u64,
    pub candidate: Arc<dyn SamplingScheme>,
    pub baseline: Arc<dyn SamplingScheme>,
}

impl Experiment {
    /// LHSD with midpoint offsets against plain Monte Carlo.
    pub fn new(basket: BasketModel, n: usize, m_reps: usize, master_seed: u64) -> Self {
        Self {
            basket,
            convention: DriftConvention::RiskNeutral,
            n,
            m_reps,
            master_seed,
            candidate: Arc::new(Lhsd::default()),
            baseline: Arc::new(PlainMonteCarlo),
        }
    }

    fn replicate(&self, scheme: &dyn SamplingScheme, specs: &[OptionSpec]) -> Result<Vec<Vec<f64>>> {
        let cache = QuantileCache::new();
        let per_rep: Vec<Vec<f64>> = (0..self.m_reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = child_stream(self.master_seed, scheme.name(), rep as u64);
                price_grid(
                    &self.basket,
                    specs,
                    scheme,
                    self.n,
                    self.convention,
                    &mut rng,
                    &cache,
                )
            })
            .collect::<Result<_>>()?;
        // transpose to one series per spec
        Ok((0..specs.len())
            .map(|s| per_rep.iter().map(|r| r[s]).collect())
            .collect())
    }

    /// Runs every spec on shared paths: each replication simulates once per
    /// scheme and evaluates all payoffs and strikes on those paths.
    pub fn run_grid(&self, specs: &[OptionSpec]) -> Result<Vec<ExperimentReport>> {
        check_count("n", self.n)?;
        check_count("m_reps", self.m_reps)?;
        if specs.is_empty() {
            return Ok(Vec::new());
        }
        let rate = specs[0].rate;
        if specs.iter().any(|s| s.rate != rate) {
            return Err(Error::Invalid(
                "all options in one experiment must share the rate".into(),
            ));
        }
        let lhsd = self.replicate(self.candidate.as_ref(), specs)?;
        let mc = self.replicate(self.baseline.as_ref(), specs)?;
        Ok(specs
            .iter()
            .zip(lhsd.into_iter().zip(mc))
            .map(|(spec, (l, m))| ExperimentReport {
                payoff: spec.payoff.name().to_string(),
                strike: spec.strike,
                lhsd: EstimatorReport::from_estimates(self.candidate.name(), self.n, l),
                mc: EstimatorReport::from_estimates(self.baseline.name(), self.n, m),
            })
            .collect())
    }

    pub fn run(&self, spec: &OptionSpec) -> Result<ExperimentReport> {
        Ok(self
            .run_grid(std::slice::from_ref(spec))?
            .pop()
            .expect("one spec in, one report out"))
    }
}

/// [`Experiment::run`] as a free function.
pub fn run_experiment(experiment: &Experiment, spec: &OptionSpec) -> Result<ExperimentReport> {
    experiment.run(spec)
}

/// [`Experiment::run_grid`] as a free function.
pub fn run_experiment_grid(
    experiment: &Experiment,
    specs: &[OptionSpec],
) -> Result<Vec<ExperimentReport>> {
    experiment.run_grid(specs)
}
