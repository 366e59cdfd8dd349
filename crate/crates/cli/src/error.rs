use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Core(#[from] driftls::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for I/O, 4 for failed bound checks.
    pub fn exit_code(&self) -> i32 {
        use driftls::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Json(_) => 3,
            CliError::Check(_) => 4,
            CliError::Core(e) => match e {
                E::Io(_) | E::Json(_) | E::Schema { .. } => 3,
                _ => 2,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
