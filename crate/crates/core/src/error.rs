use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration budget of {budget} steps exceeded")]
    Budget { budget: u64 },

    #[error(
        "enumeration budget of {budget} steps exceeded on input {input} \
         ({completed} of {total} inputs finished)"
    )]
    InputBudget {
        budget: u64,
        input: String,
        completed: usize,
        total: usize,
    },

    /// A reveal produced an observation that none of its branches accept.
    #[error("reveal #{reveal} observed {observed}, which no branch covers")]
    Uncovered { reveal: usize, observed: String },

    #[error("execution path ended without an output")]
    NoOutput,

    #[error("path probability denominator overflowed")]
    Overflow,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
