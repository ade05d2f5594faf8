use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource limit: {what} needs {requested} but the budget is {budget}")]
    Resource {
        what: &'static str,
        requested: u64,
        budget: u64,
    },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("not convergent: {0}")]
    NonConvergent(String),
    #[error("too few primes below the cutoff: found {found}, need {needed}")]
    TooFewPrimes { found: u64, needed: u64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
