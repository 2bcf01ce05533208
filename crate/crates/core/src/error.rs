use std::path::PathBuf;

use crate::skeleton::JointId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure class, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Train,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("recording has no usable frames")]
    EmptyRecording,
    #[error("frame indices must be strictly increasing (frame {0} follows {1})")]
    FrameOrder(u64, u64),
    #[error("zero-length vector in angle computation")]
    ZeroVector,
    #[error("joint {0:?} is missing")]
    MissingJoint(JointId),
    #[error("{frames} frames cannot populate {k} clusters")]
    TooFewFrames { frames: usize, k: usize },
    #[error("cluster {0} has no members")]
    EmptyCluster(usize),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("expected dimensionality {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("training loss became non-finite at epoch {0}")]
    NonFiniteLoss(usize),
    #[error("need at least {needed} samples (or recordings), got {actual}")]
    TooFewSamples { needed: usize, actual: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("fold {fold}: recording {group} appears in both train and test sets")]
    Leakage { fold: usize, group: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid data: {0}")]
    Data(String),
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
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Config,
            Error::SingleClass | Error::NonFiniteLoss(_) | Error::Leakage { .. } => {
                ErrorCategory::Train
            }
            _ => ErrorCategory::Data,
        }
    }
}
