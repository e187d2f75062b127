use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by simulator construction, queries, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("agent id {agent} out of range (n = {n})")]
    AgentOutOfRange { agent: usize, n: usize },

    #[error("self-loop on agent {agent}")]
    SelfLoop { agent: usize },

    #[error("duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { u: usize, v: usize },

    #[error("edge {{{u}, {v}}} has an endpoint out of range (n = {n})")]
    EdgeOutOfRange { u: usize, v: usize, n: usize },

    #[error("edge {{{u}, {v}}} is not in the social network")]
    NoSuchEdge { u: usize, v: usize },

    #[error("edge {{{u}, {v}}} is not active in the influence network")]
    EdgeNotActive { u: usize, v: usize },

    #[error("cannot project along zero-length edge {{{u}, {v}}}")]
    DegenerateProjection { u: usize, v: usize },

    #[error("operation requires a one-dimensional state, got dimension {dimension}")]
    NotOneDimensional { dimension: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("censored trials present: {0}")]
    CensoredData(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
