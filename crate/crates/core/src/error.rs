use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),

    #[error("angles out of domain: theta={theta}, phi={phi}")]
    AnglesOutOfDomain { theta: f64, phi: f64 },

    #[error("cannot project a vector of norm {0:e} onto the sphere")]
    DegenerateProjection(f64),

    #[error("invalid proposal scales: {0}")]
    InvalidScales(String),

    /// A configuration value violates its constraint, e.g. `n_live >= 2`.
    #[error("invalid {field}: requires {constraint}")]
    InvalidConfig {
        field: &'static str,
        constraint: &'static str,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("every initial livepoint has zero likelihood")]
    ZeroLikelihood,

    #[error("quadrature grid of {0} points exceeds the limit of 1e8")]
    GridTooLarge(u128),

    #[error("{kind} moment is not defined for dimension {dim}")]
    MomentKindMismatch { dim: usize, kind: &'static str },

    #[error("empty input")]
    EmptyInput,

    #[error("internal error: {0}")]
    Internal(&'static str),
}

impl Error {
    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::ZeroLikelihood | Error::Internal(_))
    }
}
