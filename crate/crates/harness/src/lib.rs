//! Experiment harness: grids of guidance configurations run over generated
//! suites, with coverage tables, expansion scatters, cumulative coverage and
//! plan cost comparisons.

pub mod config;
pub mod report;
pub mod runner;
pub mod sources;

pub use config::{AlgoKind, ConfigError, ExperimentConfig, Guide, Role, RunConfig, Source};
pub use runner::{run_experiment, Execution, RunOutput, RunRecord};
