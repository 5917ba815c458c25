//! Experiment runner for `regime-ffnn`: config parsing, per-regime training
//! runs, reports, prediction and SVG charts.

pub mod commands;
pub mod config;
pub mod run;
pub mod svg;

use thiserror::Error;

pub use config::{Experiment, ExperimentConfig, Overrides};
pub use run::{run_experiment, RegimeOutcome, RunSummary};

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("training error: {0}")]
    Training(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Training(_) => 3,
        }
    }

    pub(crate) fn data(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<regime_ffnn::dataset::DatasetError> for CliError {
    fn from(e: regime_ffnn::dataset::DatasetError) -> Self {
        CliError::data(e)
    }
}

impl From<regime_ffnn::scaling::ScalingError> for CliError {
    fn from(e: regime_ffnn::scaling::ScalingError) -> Self {
        CliError::data(e)
    }
}

impl From<regime_ffnn::network::NetworkError> for CliError {
    fn from(e: regime_ffnn::network::NetworkError) -> Self {
        CliError::data(e)
    }
}

impl From<regime_ffnn::metrics::MetricError> for CliError {
    fn from(e: regime_ffnn::metrics::MetricError) -> Self {
        CliError::data(e)
    }
}

impl From<regime_ffnn::trainer::TrainError> for CliError {
    fn from(e: regime_ffnn::trainer::TrainError) -> Self {
        CliError::Training(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(e)
    }
}
