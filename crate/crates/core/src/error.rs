//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad category of a failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or unreadable input data.
    Data,
    /// A computation produced non-finite values or could not proceed.
    Numerical,
    /// Arguments that violate a documented precondition.
    Invalid,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}:{line}: non-positive price {value}")]
    NonPositivePrice {
        path: PathBuf,
        line: u64,
        value: f64,
    },

    #[error("duplicate date {date}")]
    DuplicateDate { date: chrono::NaiveDate },

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("threshold too small: every return was classified as a jump")]
    ThresholdTooSmall,

    #[error("degenerate diffusion: sigma_d is zero")]
    DegenerateDiffusion,

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{name} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("price would turn non-positive at the jump at t = {time}")]
    PositivityViolation { time: f64 },

    #[error("insufficient paths: {0} requested, at least 100 required")]
    InsufficientPaths(usize),

    #[error("non-finite value at step {step}")]
    NonFinite { step: usize },

    #[error("training diverged at step {step}")]
    Diverged {
        step: usize,
        /// Last report assembled from finite checkpoints.
        report: Box<crate::pinn::TrainReport>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::NonPositivePrice { .. }
            | Error::DuplicateDate { .. }
            | Error::InsufficientData { .. }
            | Error::ThresholdTooSmall => ErrorKind::Data,
            Error::DegenerateDiffusion
            | Error::PositivityViolation { .. }
            | Error::NonFinite { .. }
            | Error::Diverged { .. } => ErrorKind::Numerical,
            Error::InvalidParameter { .. }
            | Error::OutOfRange { .. }
            | Error::InsufficientPaths(_) => ErrorKind::Invalid,
        }
    }
}
