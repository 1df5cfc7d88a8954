//! Experiment runner for the H-type laboratory: JSON configs in, CSV data
//! and JSON summaries out.

pub mod config;
pub mod experiments;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind, MetricConfig};
pub use experiments::{run_experiment, Assertion, ExperimentOutput};
pub use runner::{run_config, run_file, RunError, RunSummary};
