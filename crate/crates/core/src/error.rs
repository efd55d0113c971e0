use thiserror::Error;

/// Errors raised by the library. Every variant maps onto one of the CLI
/// exit classes (usage, budget, validation, assertion).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not square ({rows} rows, row of length {cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian at entry ({row}, {col})")]
    NotHermitian { row: usize, col: usize },

    #[error("matrix is not unitary")]
    NotUnitary,

    #[error("element {label:?} is not positive semi-definite")]
    NotPsd { label: String },

    #[error("sum of elements is not below the identity")]
    SumExceedsIdentity,

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}
