use thiserror::Error;

/// CLI failure classes; each maps to one process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<omtk::Error> for CliError {
    fn from(e: omtk::Error) -> Self {
        match e {
            omtk::Error::InvalidParameter(m) => CliError::Config(m),
            omtk::Error::Numeric(m) => CliError::Numeric(m),
            omtk::Error::Format(m) => CliError::Io(m),
            omtk::Error::Io(e) => CliError::Io(e.to_string()),
        }
    }
}
