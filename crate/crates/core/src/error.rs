use thiserror::Error;

/// Errors raised by the numerical engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("size limit exceeded: {what} = {value} (limit {limit})")]
    SizeLimit { what: &'static str, value: usize, limit: usize },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("positivity violated: {0}")]
    Positivity(String),

    #[error("specification error: {0}")]
    Spec(String),

    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("Kraus completeness violated (deviation {deviation:.3e})")]
    KrausCompleteness { deviation: f64 },

    #[error("integration error: {0}")]
    Integration(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("linear algebra backend failure: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
