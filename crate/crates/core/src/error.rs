use thiserror::Error;

/// Errors raised by the engine. Node indices in messages are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph size: {0}")]
    InvalidSize(String),
    #[error("link ({0}, {1}) is already present")]
    OccupiedLink(usize, usize),
    #[error("invalid edit: {0}")]
    InvalidEdit(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("invalid comparison: {0}")]
    InvalidComparison(String),
    #[error("invalid node weights: {0}")]
    InvalidWeights(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("convergence failure after {iterations} iterations: {detail}")]
    ConvergenceFailure { iterations: usize, detail: String },
    #[error("invalid link budget: {0}")]
    InvalidBudget(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid formation path: {0}")]
    InvalidPath(String),
    #[error("invalid discount schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("agent {0} is linked to every other node")]
    NoMove(usize),
    #[error("graph is saturated: {0}")]
    Saturation(String),
    #[error("invalid alpha-family base: {0}")]
    InvalidBase(String),
    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
