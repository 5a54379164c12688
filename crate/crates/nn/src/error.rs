use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dim {
        what: &'static str,
        expected: String,
        got: String,
    },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("non-finite {what} in tensor `{tensor}`")]
    NonFinite {
        what: &'static str,
        tensor: String,
    },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl NnError {
    pub fn dim(what: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        NnError::Dim {
            what,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, NnError>;
