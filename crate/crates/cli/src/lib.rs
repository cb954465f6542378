//! Configuration-driven studies on top of `uq_core`: a JSON config format,
//! CSV ingestion and report emission, the flood-protection case study, a
//! self-check command, and estimator risk benchmarks.

pub mod config;
pub mod csvio;
pub mod demo;
pub mod dyke;
pub mod report;
pub mod riskrun;
pub mod study;
pub mod verify;

use thiserror::Error;

/// Process-level failure classes. Configuration problems (bad JSON, missing
/// files, inconsistent settings) exit with code 2; numerical failures
/// (degenerate fits, improper posteriors, starved samplers) exit with 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError::Numeric(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<uq_core::inference::InferenceError> for CliError {
    fn from(e: uq_core::inference::InferenceError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<uq_core::estimators::EstimatorError> for CliError {
    fn from(e: uq_core::estimators::EstimatorError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<uq_core::risk::RiskError> for CliError {
    fn from(e: uq_core::risk::RiskError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<uq_core::dist::DistError> for CliError {
    fn from(e: uq_core::dist::DistError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<uq_core::qoi::QoiError> for CliError {
    fn from(e: uq_core::qoi::QoiError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<uq_core::loss::LossError> for CliError {
    fn from(e: uq_core::loss::LossError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<uq_core::model::ModelError> for CliError {
    fn from(e: uq_core::model::ModelError) -> Self {
        CliError::Numeric(e.to_string())
    }
}
