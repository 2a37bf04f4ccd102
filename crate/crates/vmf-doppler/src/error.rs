/// Errors produced by the analytic and simulation layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input outside the defined domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Adaptive quadrature ran out of subdivisions before reaching the
    /// requested tolerance. Carries the best available estimate.
    #[error("quadrature did not converge: estimate {estimate:e} (error bound {error_bound:e})")]
    Accuracy { estimate: f64, error_bound: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
