use thiserror::Error;

/// Errors surfaced by the learning stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite gradient in {context}: {bad} of {total} entries")]
    NonFiniteGradient {
        context: &'static str,
        bad: usize,
        total: usize,
    },

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("replay buffer not ready: {0}")]
    NotReady(String),

    #[error("invalid transition sample: {0}")]
    InvalidSample(String),

    #[error("not enough data: {0}")]
    NotEnoughData(String),

    #[error("curve alignment error: {0}")]
    Alignment(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 2 for bad configuration or input, 3 for
    /// divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) | Error::Alignment(_) => 2,
            Error::Divergence(_) | Error::NonFiniteGradient { .. } => 3,
            _ => 1,
        }
    }
}
