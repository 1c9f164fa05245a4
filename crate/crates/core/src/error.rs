use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or mechanism parameter is outside its domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Malformed input data (shape mismatch, non-binary entries, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A computation produced NaN or an otherwise unusable number.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Sampler configuration rejected before any sampling started.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Brute-force enumeration requested beyond its supported size.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("record {index}: {source}")]
    Record {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("chain {chain}: {source}")]
    Chain {
        chain: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_record(self, index: usize) -> Self {
        Error::Record {
            index,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_chain(self, chain: usize) -> Self {
        Error::Chain {
            chain,
            source: Box::new(self),
        }
    }

    /// Strips record/chain context and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Record { source, .. } | Error::Chain { source, .. } => source.root(),
            e => e,
        }
    }
}
