use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Compute(#[from] upcong_core::Error),
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 2 for resource and precision failures, 3 for unusable input.
    pub fn exit_code(&self) -> i32 {
        use upcong_core::Error as E;
        match self {
            CliError::Compute(E::Resource(_) | E::InsufficientPrecision { .. }) | CliError::Io { .. } => 2,
            _ => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
