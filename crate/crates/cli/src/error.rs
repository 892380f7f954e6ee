use std::path::{Path, PathBuf};

use readlens_core::agents::{AgentError, BackendError};
use readlens_core::clustering::ClusterError;
use readlens_core::features::FeatureError;
use readlens_core::gaze_events::GazeError;
use readlens_core::ingest::IngestError;
use readlens_core::textmetrics::TextMetricsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {message}")]
    Pipeline { context: String, message: String },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn pipeline(context: impl Into<String>, err: impl std::fmt::Display) -> Self {
        CliError::Pipeline {
            context: context.into(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Pipeline { .. } => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
        }
    }
}

/// Read failures are IO errors; everything else in ingest is a data error.
pub fn ingest(context: &str, e: IngestError) -> CliError {
    match e {
        IngestError::Io { path, source } => CliError::Io { path, source },
        other => CliError::pipeline(context, other),
    }
}

impl From<AgentError> for CliError {
    fn from(e: AgentError) -> Self {
        match e {
            AgentError::Backend(BackendError::MissingApiKey(var)) => {
                CliError::Config(format!("set {var} or pass --mock-llm"))
            }
            other => CliError::pipeline("agents", other),
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        CliError::pipeline("clustering", e)
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        CliError::pipeline("features", e)
    }
}

impl From<GazeError> for CliError {
    fn from(e: GazeError) -> Self {
        CliError::pipeline("fixations", e)
    }
}

impl From<TextMetricsError> for CliError {
    fn from(e: TextMetricsError) -> Self {
        CliError::pipeline("text metrics", e)
    }
}
