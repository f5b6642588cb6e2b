use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The request is well-formed but outside what the method supports.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("LP backend failure: {0}")]
    Backend(String),

    /// A stage subproblem had no feasible point, violating relatively
    /// complete recourse.
    #[error("stage {stage} scenario {scenario}: subproblem is {status}")]
    Recourse {
        stage: usize,
        scenario: usize,
        status: &'static str,
    },

    #[error("model too large: {vars} variables exceed the limit of {limit}")]
    SizeGuard { vars: usize, limit: usize },

    /// The moment constraints admit no probability vector on the support.
    #[error("ambiguity set is empty: {0}")]
    EmptyAmbiguity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
