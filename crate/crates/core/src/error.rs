use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Parameter or argument outside the family's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested dependence measure cannot be attained by the family.
    #[error("range error: {0}")]
    Range(String),

    /// Malformed input data (shape, non-finite values, too few rows).
    #[error("data error: {0}")]
    Data(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("partition error: {0}")]
    Partition(String),

    #[error("all {0} blocks failed to converge")]
    AllBlocksFailed(usize),

    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
