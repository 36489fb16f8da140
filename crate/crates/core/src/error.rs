use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Request exceeds a configured size or memory guard.
    #[error("capacity exceeded: {what} = {requested} > {limit}")]
    Capacity {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    #[error("{what} = {value} outside supported range {range}")]
    Range {
        what: &'static str,
        value: String,
        range: String,
    },

    /// A function argument outside the mathematical domain.
    #[error("domain error in {param}: {reason}")]
    Domain { param: &'static str, reason: String },

    /// Inputs fall outside the parameter regime where a law or bound applies.
    #[error("outside regime: {0}")]
    Regime(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("counter saturated at n = {n}")]
    CounterSaturation { n: u64 },

    #[error("invalid spec: {0}")]
    Spec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown {kind} id `{id}`")]
    Lookup { kind: &'static str, id: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("grid point {index} ({point}): {source}")]
    GridPoint {
        index: usize,
        point: String,
        #[source]
        source: Box<Error>,
    },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn domain(param: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            param,
            reason: reason.into(),
        }
    }

    pub(crate) fn range(what: &'static str, value: impl ToString, range: impl Into<String>) -> Self {
        Error::Range {
            what,
            value: value.to_string(),
            range: range.into(),
        }
    }
}
