use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0}")]
    InvalidInput(String),
    #[error("enumeration budget exceeded after {visited} nodes (cap {cap})")]
    EnumerationBudget { visited: u64, cap: u64 },
    #[error("unsupported dimension: {0}")]
    DimensionUnsupported(String),
    #[error("degenerate edge at node {node}: length {length:e}")]
    DegenerateEdge { node: usize, length: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("perturbation lies entirely in the first eigenspace and constants")]
    ZeroRemainder,
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error("blowup: {0}")]
    Blowup(String),
    #[error("polytope boundary reached: {0}")]
    Boundary(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
