use std::io;

use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The variants map onto the CLI exit-code contract: parameter problems are
/// usage errors, `Numeric` covers singularities and non-convergent
/// computations, `Io`/`Format` cover persisted files.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure_param {
    ($cond:expr, $($arg:tt)+) => {
        if !($cond) {
            return Err($crate::Error::InvalidParameter(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure_param;
