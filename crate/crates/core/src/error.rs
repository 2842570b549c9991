use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A size cap or integer range was exceeded.
    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A quantity that must be real (or Hermitian) came out otherwise.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    /// A fuzz trial found a matrix without a zero row that still satisfies
    /// every orbit-sum condition.
    #[error("trial {trial}: matrix without a zero row satisfies property A (max |orbit sum| = {max_abs_sum:e})")]
    LemmaViolation { trial: usize, max_abs_sum: f64 },

    #[error("evaluation budget exceeded: {requested} grid points requested, budget is {budget}")]
    Budget { requested: u128, budget: u128 },

    #[error("no certified bound for n = {n}, d = {d}; pass one explicitly")]
    MissingBound { n: usize, d: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
