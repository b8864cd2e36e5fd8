use thiserror::Error;

/// Harness failures, grouped by process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("stream error: {0}")]
    Stream(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) | HarnessError::Csv(_) => 2,
            HarnessError::Budget(_) => 3,
            HarnessError::Stream(_) => 4,
        }
    }
}

impl From<dsfc::Error> for HarnessError {
    fn from(e: dsfc::Error) -> Self {
        match e {
            dsfc::Error::MalformedStream(_) | dsfc::Error::TrailingBits(_) => HarnessError::Stream(e.to_string()),
            dsfc::Error::BudgetExceeded { .. } => HarnessError::Budget(e.to_string()),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
