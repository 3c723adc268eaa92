use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A point or parameter lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data failed validation (normalization, grid ordering, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// Adaptive quadrature stopped before reaching the requested tolerance.
    #[error("quadrature did not converge on [{lower}, {upper}]: estimate {estimate:e}, error {error:e} after {subdivisions} subdivisions")]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    /// A root finder was handed an interval that does not bracket a sign change.
    #[error("interval [{lower}, {upper}] does not bracket the target (f(lower) = {f_lower:e}, f(upper) = {f_upper:e})")]
    Bracket {
        lower: f64,
        upper: f64,
        f_lower: f64,
        f_upper: f64,
    },

    /// An iterative method ran out of iterations.
    #[error("{method} did not converge after {iterations} iterations")]
    NoConvergence { method: &'static str, iterations: usize },

    /// The requested simulation exceeds the configured sample budget.
    #[error("experiment needs {required} samples but the budget is {budget}; raise the budget to at least {required}")]
    Budget { required: u64, budget: u64 },

    /// The operation is not available for this measurement or PSF kind.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
