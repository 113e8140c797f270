use thiserror::Error;

/// Harness errors, grouped by process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dataset/io error: {0}")]
    Io(String),

    #[error("certificate failure: {0}")]
    Certificate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Certificate(_) => 4,
        }
    }
}

impl From<tvsr::Error> for CliError {
    fn from(e: tvsr::Error) -> Self {
        use tvsr::Error as E;
        match e {
            E::Parse { .. } | E::Alignment { .. } => CliError::Io(e.to_string()),
            E::Separation { .. } | E::CertificateFailure { .. } | E::Precondition(_) => CliError::Certificate(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
