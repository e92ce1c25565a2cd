use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Estimation,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}, record {record}: {message}")]
    Parse {
        context: String,
        record: usize,
        message: String,
    },

    #[error("duplicate id(s): {}", .0.join(", "))]
    DuplicateId(Vec<String>),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("unknown term '{0}'")]
    UnknownTerm(String),

    #[error("unknown label '{0}' (expected favorable, unfavorable or neutral)")]
    UnknownLabel(String),

    #[error("unknown covariate '{0}'")]
    UnknownCovariate(String),

    #[error("unknown topic {0}")]
    UnknownTopic(usize),

    #[error("mixed years in network input: {0} and {1}")]
    MixedYears(i32, i32),

    #[error("degenerate year {year:?}: {what} has zero standard deviation")]
    ZeroVariance { year: Option<i32>, what: String },

    #[error("empty network")]
    EmptyNetwork,

    #[error("empty risk set at event time {0}")]
    EmptyRiskSet(f64),

    #[error("non-finite linear predictor")]
    NonFinite,

    #[error("singular information matrix; collinear covariates: {}", .0.join(", "))]
    Singular(Vec<String>),

    #[error("no convergence after {iterations} iterations (last estimate {last:?})")]
    NonConvergence { iterations: usize, last: Vec<f64> },

    #[error("perfect separation or degenerate outcome: {0}")]
    Separation(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::EmptyRiskSet(_)
            | Error::NonFinite
            | Error::Singular(_)
            | Error::NonConvergence { .. }
            | Error::Separation(_) => ErrorKind::Estimation,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, record: usize, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            record,
            message: message.to_string(),
        }
    }
}
