use std::path::Path;

use gdp_core::dag::DagError;
use gdp_core::gibbs::GibbsError;
use gdp_core::metrics::MetricsError;
use gdp_core::model::ModelError;
use gdp_core::prior::PriorError;
use gdp_core::scenario::ScenarioError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("{path}: {message}")]
    IoFailure { path: String, message: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("no chain files")]
    EmptyChains,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error(transparent)]
    Gibbs(#[from] GibbsError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl From<ScenarioError> for BenchError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::UnknownScenario(name) => BenchError::UnknownScenario(name),
        }
    }
}

impl BenchError {
    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        BenchError::IoFailure {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BenchError::UnknownScenario(_) => "UnknownScenario",
            BenchError::IoFailure { .. } => "IoFailure",
            BenchError::SchemaMismatch(_) => "SchemaMismatch",
            BenchError::EmptyChains => "EmptyChains",
            BenchError::Config(_) => "InvalidConfig",
            BenchError::Dag(_) => "InvalidDag",
            BenchError::Model(_) => "InvalidModel",
            BenchError::Prior(_) => "PriorFailure",
            BenchError::Gibbs(_) => "SamplerFailure",
            BenchError::Metrics(_) => "MetricFailure",
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            error: self.kind(),
            message: self.to_string(),
        }
    }
}

/// The single JSON line printed to stderr when a command fails.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub message: String,
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
