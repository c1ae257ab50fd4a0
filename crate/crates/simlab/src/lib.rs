//! Monte Carlo harness for the cqreg solvers: synthetic data under the linear
//! model `y = b + X beta + eps`, accuracy and variable-selection metrics, and an
//! experiment runner that averages them over seeded replications.
//!
//! Each replication `r` uses seed `base_seed + r` for both its truth and its
//! data, so reports are reproducible and independent of thread scheduling.

mod experiment;
mod generate;
mod metrics;

pub use experiment::{
    run_experiment, run_experiment_inspect, FitRecord, Preset, SimConfig, SimReport, SimRow, FAILURE_FLAG_RATE,
};
pub use generate::{generate_data, generate_truth};
pub use metrics::{coefficient_error, selection_counts};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("estimate has length {estimate} but truth has length {truth}")]
    Length { estimate: usize, truth: usize },
}
