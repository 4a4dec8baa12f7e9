//! Experiment runner for random interval skew products: configuration,
//! subcommand execution and deterministic report/plot emission.

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod runner;

pub use config::{Command, ExperimentConfig, Params, SystemSpec};
pub use error::CliError;
pub use runner::{run, Report, RunOutput};
