use thiserror::Error;

/// Errors raised by the model, simulator, oracle and optimizers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or policy invariant is violated.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Simulation or optimizer configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A quadrature or series failed to reach the requested tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A sampled value was NaN or infinite.
    #[error("simulation fault: {0}")]
    SimulationFault(String),

    /// The requested dimension is not supported by the quadrature oracle.
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
