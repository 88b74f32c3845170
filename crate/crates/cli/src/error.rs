use qp_spectra::SpectraError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },

    #[error("{command}: {source}")]
    Numeric {
        command: &'static str,
        #[source]
        source: SpectraError,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("acceptance failed: {0}")]
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid { .. } => 2,
            CliError::Numeric { .. } | CliError::Io(_) | CliError::Csv(_) => 3,
            CliError::Acceptance(_) => 4,
        }
    }
}

/// Attach the subcommand name to a core error.
pub trait Context<T> {
    fn ctx(self, command: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, SpectraError> {
    fn ctx(self, command: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numeric { command, source })
    }
}
