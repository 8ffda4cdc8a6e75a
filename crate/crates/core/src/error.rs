use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Shapes, moduli or precisions that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("series with valuation {0} is not a unit")]
    NotAUnit(usize),

    /// An input outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A hypothesis that the caller promised (chain map, homotopy relation, ...) fails.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("degenerate interval layout: {0}")]
    DegenerateLayout(String),

    /// Time-one map has 1 as an eigenvalue.
    #[error("degenerate endpoint: smallest singular value of M - I is {0:e}")]
    Degenerate(f64),

    #[error("precision error: {0}")]
    Precision(String),

    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Input(format!("line {} column {}: {e}", e.line(), e.column()))
    }
}
