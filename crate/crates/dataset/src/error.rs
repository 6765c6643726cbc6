use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no classes under {}", .0.display())]
    NoClasses(PathBuf),
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("invalid build config: {0}")]
    InvalidConfig(String),
    #[error("not a dataset file")]
    NotDatasetFile,
    #[error("unsupported dataset format version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed manifest: {0}")]
    BadManifest(String),
    #[error("truncated record {0}")]
    TruncatedRecord(usize),
    #[error("record {record}: shape {found:?} does not match manifest shape {expected:?}")]
    ShapeMismatch {
        record: usize,
        expected: Vec<u32>,
        found: Vec<u32>,
    },
    #[error("record {record}: label {label} out of range for {classes} classes")]
    LabelOutOfRange {
        record: usize,
        label: u32,
        classes: usize,
    },
    #[error("trailing bytes after record {0}")]
    TrailingData(usize),
    #[error("{rejected} of {total} source files rejected (limit 10%), see {}", report.display())]
    TooManyRejects {
        rejected: usize,
        total: usize,
        report: PathBuf,
    },
    #[error(transparent)]
    Codec(#[from] dctpipe_core::Error),
    #[error(transparent)]
    Classifier(#[from] dctpipe_core::classifier::ClassifierError),
}

impl DatasetError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> DatasetError {
        let path = path.into();
        move |source| DatasetError::Io { path, source }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, DatasetError::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, DatasetError>;
