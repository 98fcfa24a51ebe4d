use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("invalid type vector: {0}")]
    InvalidType(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("enumeration too large: {what} has {count} elements, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        count: String,
        budget: u64,
    },

    #[error("operation requires an additive distortion function")]
    NotAdditive,

    #[error("invalid distortion: {0}")]
    InvalidDistortion(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("distortion ball of radius {0} is empty for some input")]
    EmptyBall(String),

    #[error("blahut-arimoto did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
