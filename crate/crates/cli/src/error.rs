use std::path::Path;
use std::process::ExitCode;

use dctpipe_core::classifier::ClassifierError;
use dctpipe_dataset::DatasetError;
use thiserror::Error;

/// Failures grouped by the process exit code they map to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Unsupported(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Io(_) => 2,
            CliError::Usage(_) => 3,
            CliError::Unsupported(_) => 4,
        })
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<dctpipe_core::Error> for CliError {
    fn from(e: dctpipe_core::Error) -> Self {
        match e {
            dctpipe_core::Error::InvalidQuality(_) => CliError::Usage(e.to_string()),
            other => CliError::Unsupported(other.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } | DatasetError::NoClasses(_) => CliError::Io(e.to_string()),
            DatasetError::InvalidConfig(_) | DatasetError::InvalidRatios(_) => {
                CliError::Usage(e.to_string())
            }
            DatasetError::Classifier(inner) => inner.into(),
            other => CliError::Unsupported(other.to_string()),
        }
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::InvalidConfig(_) | ClassifierError::InvalidK { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Unsupported(other.to_string()),
        }
    }
}

impl From<dctpipe_core::metrics::MetricsError> for CliError {
    fn from(e: dctpipe_core::metrics::MetricsError) -> Self {
        CliError::Unsupported(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
