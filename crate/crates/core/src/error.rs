use thiserror::Error;

/// Errors raised by every module of the lab.
///
/// `Numerical` marks a computation that ran but produced something unusable
/// (NaN, divergence, line-search breakdown); everything else is a violated
/// precondition or bad input.
#[derive(Debug, Error)]
pub enum GnError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("domain mismatch: expected {expected} field, got {found}")]
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("shell {k} outside resolved range [{k_min}, {k_max}]")]
    ShellOutOfRange { k: i32, k_min: i32, k_max: i32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GnError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, GnError::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, GnError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(GnError::InvalidParameter(msg.into()))
}
