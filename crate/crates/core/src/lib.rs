//! Numerical laboratory for the two-sample studentized pivot.
//!
//! The crate bundles the statistics of the heteroscedastic two-sample
//! problem (the Welch-type pivot `W`, its known-variance and sum variants,
//! and the pooled-t statistic), deterministic schedules of sample-size
//! pairs `(n1, n2)` along which those statistics are studied, seeded
//! paired-sample generators with several cross-sample dependence
//! structures, and a Monte Carlo harness that scores empirical pivot laws
//! against their Normal limits with the exact Kolmogorov-Smirnov distance.
//!
//! Replications run on a rayon pool when the `parallel` feature is on
//! (the default) and sequentially otherwise. Results are bit-identical
//! under both plans.

pub mod cli;
pub mod distributions;
pub mod harness;
pub mod paths;
pub mod samplers;
pub mod stats;

mod exec;

pub use exec::ExecutionPlan;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The studentizing denominator of a statistic is zero.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(&'static str),
    /// Every replication at a path point was degenerate.
    #[error("experiment failed at (n1 = {n1}, n2 = {n2}): {reason}")]
    Experiment { n1: u64, n2: u64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
