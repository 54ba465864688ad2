//! Latin hypercube sampling with dependence (LHSD).
//!
//! The crate is organised around three registries of interchangeable
//! strategies, each selected by name at runtime:
//!
//! * [`copula::CopulaRegistry`]: parametric copula families
//!   (`independence`, `fgm`, `amh`).
//! * [`lhsd::SchemeRegistry`]: point-set constructions applied to raw
//!   copula draws (`mc`, `lhsd`, `lhsd-iid`, `lhs`).
//! * [`pricing::PayoffRegistry`]: basket payoffs (`asian`, `lookback`).
//!
//! On top of those sit the limit-variance quadrature in [`asymptotics`],
//! the variance-gamma basket simulator in [`vg`] and the replication
//! experiment in [`pricing`].

pub mod asymptotics;
pub mod config;
pub mod copula;
pub mod error;
mod grid;
pub mod lhsd;
pub mod pricing;
pub mod report;
pub mod rng;
pub mod stats;
pub mod vg;

pub use error::{Error, Result};
