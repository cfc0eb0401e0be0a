use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("step {step} does not tile box length {length} (axis {axis})")]
    NonConformingStep { step: f64, length: f64, axis: char },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point ({x}, {y}, {z}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64, z: f64 },

    #[error("coincident points: kernel is singular at R = {0:e}")]
    CoincidentPoints(f64),

    #[error("linear system is singular or ill-conditioned (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("loss requires at least one point")]
    EmptyBatch,

    #[error("need at least 2 sensor points to split, got {0}")]
    TooFewSensors(usize),

    #[error("non-finite loss at epoch {epoch} (seed {seed})")]
    NonFiniteLoss { epoch: usize, seed: u64 },

    #[error("every training run failed: {0}")]
    AllRunsFailed(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("schema mismatch in {file}, line {line}, column {column}: {reason}")]
    SchemaMismatch {
        file: PathBuf,
        line: usize,
        column: String,
        reason: String,
    },

    #[error("checksum mismatch for {0}")]
    ChecksumMismatch(PathBuf),

    #[error("unsupported format version {found} (expected {expected})")]
    VersionUnsupported { found: u32, expected: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for numerical failures, 2 for usage, configuration
    /// and input-file problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CoincidentPoints(_)
            | Error::SingularSystem { .. }
            | Error::NonFiniteLoss { .. }
            | Error::AllRunsFailed(_)
            | Error::EmptyBatch => 1,
            _ => 2,
        }
    }
}
