use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum DksError {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested circuit does not fit the simulator.
    #[error("capacity exceeded: {needed} qubits requested, limit is {limit}")]
    Capacity { needed: usize, limit: usize },

    /// Rejection sampling gave up before producing an acceptable graph.
    #[error("graph generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    /// Malformed edge list or table.
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl DksError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        DksError::InvalidInput(msg.into())
    }
}

pub type Result<T, E = DksError> = std::result::Result<T, E>;
