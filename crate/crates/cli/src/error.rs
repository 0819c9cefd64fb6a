use navier4_core::Error;

/// Failures mapped onto the exit-code contract.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    /// A check on the experiment itself failed.
    #[error("{0}")]
    Verdict(String),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verdict(_) => 1,
            Self::Config(_) | Self::Io(_) => 2,
            Self::NotConverged(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDomain(_)
            | Error::OutsideDomain { .. }
            | Error::Truncation { .. }
            | Error::Mismatch(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Csv(_) => Self::Config(e.to_string()),
            _ => Self::Verdict(e.to_string()),
        }
    }
}
