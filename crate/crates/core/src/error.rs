use thiserror::Error;

/// Errors raised by the propagation engines and the CSP model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arity error: {0}")]
    Arity(String),

    #[error("contract violation: {0}")]
    Contract(String),

    /// One of the update-function assumptions A, B or C failed during a
    /// verified run.
    #[error("update assumption {assumption} violated: {detail}")]
    Assumption { assumption: char, detail: String },

    #[error("loop invariant violated: {0}")]
    Invariant(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("CSP is not standardized: {0}")]
    NotStandardized(String),

    #[error("ordering error: {0}")]
    Ordering(String),

    #[error("capacity exceeded: {states} states, cap is {cap}")]
    Capacity { states: u128, cap: u128 },

    #[error("semi-commutativity precondition violated: {0}")]
    SemiCommutativity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
