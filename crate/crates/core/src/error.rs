use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the range its type allows.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A caller passed a value that violates an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Configuration or sample-file text could not be interpreted.
    #[error("line {line}: {key}: {msg}")]
    Parse {
        line: usize,
        key: String,
        msg: String,
    },

    #[error("input samples exhausted at t = {t:e} s ({len} samples available)")]
    SamplesExhausted { t: f64, len: usize },

    #[error(
        "target rate {target:e} spikes/s unreachable: charge_gain bracket [{lo:e}, {hi:e}] gives rates [{rate_lo:e}, {rate_hi:e}]"
    )]
    Calibration {
        target: f64,
        lo: f64,
        hi: f64,
        rate_lo: f64,
        rate_hi: f64,
    },

    /// The data cannot support the requested fit or metric.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
