use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} = {value} outside {allowed}")]
    Domain {
        what: &'static str,
        value: f64,
        allowed: String,
    },

    #[error("no convergence in {routine} after {iterations} iterations (residual {residual:e})")]
    Convergence {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("infeasible Cantor construction at generation {generation}: lambda_(m-1) = {parent} <= 2 * lambda_m = {twice_child}")]
    Infeasible {
        generation: usize,
        parent: f64,
        twice_child: f64,
    },

    #[error("depth {requested} exceeds available depth {available}")]
    DepthExceeded { requested: usize, available: usize },

    #[error("size limit: {what} needs {requested} entries, limit is {limit}")]
    Size {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("insufficient weights: need {needed}, have {available}")]
    InsufficientWeights { needed: usize, available: usize },

    #[error("invalid weight sequence: {0}")]
    InvalidWeights(String),

    #[error("h' is not nonincreasing at k = {k}; start index too small")]
    Monotonicity { k: u64 },

    #[error("no start index N <= {horizon} satisfies the requested conditions")]
    NotFound { horizon: u64 },

    #[error("length error: {0}")]
    Length(String),

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("geometry document: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
