use alloc::string::String;

/// Errors raised by the learning core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("non-finite value in {context} (agent {agent}, update {update})")]
    NonFinite {
        context: &'static str,
        agent: usize,
        update: u64,
    },
    #[error("game too large for exhaustive enumeration: {0}")]
    GameTooLarge(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            got,
        })
    }
}

impl Error {
    /// Attaches the agent and update counter to a non-finite diagnostic.
    pub fn at(self, agent: usize, update: u64) -> Self {
        match self {
            Error::NonFinite { context, .. } => Error::NonFinite {
                context,
                agent,
                update,
            },
            other => other,
        }
    }
}
