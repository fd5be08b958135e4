use thiserror::Error;

/// Errors raised by models, integrators and the analytic reference.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("singular mass matrix (condition estimate {condition:e})")]
    SingularMass { condition: f64 },

    #[error("singular linear system (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("configuration outside the admissible domain: {reason}")]
    Inadmissible { reason: &'static str },

    #[error("non-finite value produced in {context}")]
    NonFinite { context: &'static str },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual_norm:e})")]
    StepFailed {
        iterations: usize,
        residual_norm: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("step size {h} does not divide the interval {span} into a whole number of steps")]
    IncommensurateStep { h: f64, span: f64 },

    #[error("nutation cubic is not a physical motion: {0}")]
    ModelInconsistency(&'static str),

    #[error("degenerate nutation band")]
    DegenerateBand,

    #[error("sample grids do not align at index {index}")]
    GridMismatch { index: usize },

    #[error("empty series")]
    EmptySeries,

    #[error("coordinate {index} is not a conserved momentum of this model")]
    NotConserved { index: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
