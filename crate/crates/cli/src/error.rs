use cachenet_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {field}: {message}")]
    Config { field: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// 1 invalid config, 2 numerical failure, 3 verification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    /// Sorts a core error into the config / numerical / verification
    /// buckets; `field` names the config entry it most likely came from.
    pub fn from_core(field: &str, err: CoreError) -> Self {
        match err {
            CoreError::LpStatus(_)
            | CoreError::MalformedLp(_)
            | CoreError::Numerical(_)
            | CoreError::Degenerate(_) => CliError::Numerical(err),
            CoreError::DecodeMismatch { .. } | CoreError::PlanMismatch(_) => {
                CliError::Verification(err.to_string())
            }
            _ => CliError::config(field, err.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
