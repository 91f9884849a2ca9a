use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure classes of the
/// library: bad inputs, blown budgets, broken identities.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Hensel lift failed: {0}")]
    LiftFailure(String),

    #[error("character correspondence violated: {0}")]
    Correspondence(String),

    #[error("root-count identity violated: {0}")]
    IdentityViolation(String),

    #[error("numerical method did not converge: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
