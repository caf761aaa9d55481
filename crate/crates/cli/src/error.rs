use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable files, malformed matrix JSON.
    #[error("{0}")]
    Usage(String),
    /// Inputs that parse but violate an operator invariant, or a failed check.
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Check(_) => 1,
        }
    }
}

impl From<chi2lab::Error> for CliError {
    fn from(e: chi2lab::Error) -> Self {
        match e {
            chi2lab::Error::InvalidArgument(_) | chi2lab::Error::MatrixFormat(_) => CliError::Usage(e.to_string()),
            _ => CliError::Check(e.to_string()),
        }
    }
}
