use thiserror::Error;

/// Errors raised by the optimizer contract, the algorithm registry and the run loop.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("budget of {budget} evaluations exhausted")]
    BudgetExceeded { budget: usize },
    #[error("{pending} asks already outstanding with {num_workers} workers")]
    TooManyPending { pending: usize, num_workers: usize },
    #[error("unknown candidate id {0}")]
    UnknownCandidate(u64),
    #[error("non-finite loss {0}")]
    InvalidLoss(f64),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid run context: {0}")]
    InvalidContext(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown solver `{name}`; known solvers: {known}")]
    UnknownSolver { name: String, known: String },
    #[error("cannot parse algorithm spec `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
