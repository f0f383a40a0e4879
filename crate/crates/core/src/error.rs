use thiserror::Error;

/// Everything that can go wrong inside the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("dimension limit exceeded: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("integration became stiff: {0}")]
    Stiffness(String),
    #[error("integration accuracy lost: {0}")]
    IntegrationAccuracy(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid state: {0}")]
    StateValidity(String),
    #[error("ambiguous steady state: {0}")]
    Ambiguity(String),
    #[error("fit window: {0}")]
    FitWindow(String),
    #[error("diagnostic unavailable: {0}")]
    Unavailable(String),
    #[error("truncation did not converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
