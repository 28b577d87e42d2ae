//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by the CLI to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad configuration or invalid arguments.
    Config,
    /// Unreadable, malformed or inconsistent input data.
    Data,
    /// A numerical procedure failed (divergence, non-convergence).
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("edf format error in {path}: {msg}")]
    EdfFormat { path: String, msg: String },

    #[error("channel {label:?} not present in {path}")]
    MissingChannel { label: String, path: String },

    #[error("time window [{t0}, {t1}] outside recording of {dur} s in {path}")]
    WindowOutOfRange {
        t0: f64,
        t1: f64,
        dur: f64,
        path: String,
    },

    #[error("manifest line {line}: {msg}")]
    ManifestParse { line: usize, msg: String },

    #[error("unknown seizure type code {0:?}")]
    UnknownSeizureType(String),

    #[error("invalid {what}: {msg}")]
    InvalidSpec { what: &'static str, msg: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix not symmetric: max |a_ij - a_ji| = {deviation:e} exceeds 1e-9")]
    NotSymmetric { deviation: f64 },

    #[error(
        "jacobi eigensolver did not converge after {sweeps} sweeps \
         (off-diagonal norm {off_norm:e})"
    )]
    NonConvergence { sweeps: usize, off_norm: f64 },

    #[error("sgd diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    #[error("feature cache {path}: bad magic or unsupported version")]
    CacheVersion { path: String },

    #[error("feature cache {path}: truncated ({msg})")]
    CacheTruncated { path: String, msg: String },

    #[error("feature cache {path}: {field} mismatch (expected {expected}, found {found})")]
    SpecMismatch {
        path: String,
        field: &'static str,
        expected: String,
        found: String,
    },

    #[error("seizure type {ty} has {have} seizures, fewer than {need} folds")]
    InsufficientSeizures {
        ty: String,
        have: usize,
        need: usize,
    },

    #[error("seizure type {ty} has {have} unallocated patients, fewer than {need} folds")]
    InsufficientPatients {
        ty: String,
        have: usize,
        need: usize,
    },

    #[error("fold {fold} contains no windows")]
    EmptyFold { fold: usize },

    #[error("all {budget} search trials failed; last reason: {last_reason}")]
    AllTrialsFailed { budget: usize, last_reason: String },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            InvalidSpec { .. } => ErrorKind::Config,
            NonConvergence { .. } | Divergence { .. } | NonFinite(_) | AllTrialsFailed { .. } => {
                ErrorKind::Numeric
            }
            _ => ErrorKind::Data,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn edf(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::EdfFormat {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub fn spec(what: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidSpec {
            what,
            msg: msg.into(),
        }
    }
}
