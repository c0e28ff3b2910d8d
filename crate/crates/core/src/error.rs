use crate::items::ItemSet;

/// Library-wide error type. CLI exit codes map onto the variants:
/// invalid input -> 2, capacity -> 3, verification failure -> 4.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("input is not monotone (witness: {lo} < {hi} but f({lo}) > f({hi}))")]
    NotMonotone { lo: ItemSet, hi: ItemSet },

    #[error("negative hyperedges are not laminar (crossing pair: {a}, {b})")]
    NotLaminar { a: ItemSet, b: ItemSet },

    #[error("input is not nonnegative (witness: f({witness}) = {value})")]
    NotNonnegative { witness: ItemSet, value: f64 },

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    /// CLI exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) => 3,
            Error::Verification(_) => 4,
            _ => 2,
        }
    }
}
