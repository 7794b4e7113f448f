use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its type invariant (raised at construction).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An argument lies outside the domain of a scalar function.
    #[error("domain error in {func}: {reason}")]
    Domain { func: &'static str, reason: String },

    /// A closed-form D-pair was requested inside the removable-singularity
    /// guard band; the caller should use the numeric path.
    #[error("omega = {omega} lies in the singular band (width {band}) around {center}; use the numeric D-pair path")]
    SingularBand { omega: f64, center: f64, band: f64 },

    /// Adaptive integration ran out of budget before reaching tolerance.
    #[error("tolerance not reached: best estimate {estimate} with error {error_estimate} after {panels} panels")]
    Accuracy {
        estimate: f64,
        error_estimate: f64,
        panels: usize,
    },

    /// The integrand or a propagated quantity produced a non-finite value.
    #[error("non-finite value encountered at x = {at}")]
    Evaluation { at: f64 },

    /// A truncated Hilbert space exceeds the configured memory budget.
    #[error("Hilbert-space dimension {dim} exceeds budget {budget}")]
    Capacity { dim: usize, budget: usize },

    /// Model family, state preparation and parameters do not fit together.
    #[error("inconsistent model: {0}")]
    Model(String),

    /// A point of a decay curve failed to evaluate.
    #[error("decay curve point tau = {tau} failed: {source}")]
    CurvePoint {
        tau: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("regime classification needs at least {min} grid points, got {got}")]
    TooFewPoints { min: usize, got: usize },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
