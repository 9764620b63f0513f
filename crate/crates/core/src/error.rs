use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("variable `{name}` is out of range for dimension {dim}")]
    UnboundVariable { name: String, dim: usize },

    #[error("singular evaluation in {what} (value {value:.3e})")]
    Singular { what: &'static str, value: f64 },

    #[error("domain violation: {what}")]
    Domain { what: String },

    #[error("fundamental tensor not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("fundamental tensor too ill-conditioned (estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("non-finite value produced in {what}")]
    NonFinite { what: String },

    #[error("quadrature did not converge: relative change {last_diff:.3e} at {points} points")]
    QuadratureNonConvergence { last_diff: f64, points: usize },

    #[error("invalid parameter: {message}")]
    InvalidParameter { message: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("metric file, line {line}: {message}")]
    MetricFile { line: usize, message: String },

    #[error("sampler exhausted after {attempts} attempts ({context})")]
    SamplerExhausted { context: String, attempts: usize },

    #[error("spray is not proportional to y in this chart (spread {spread:.3e})")]
    NotProjectivelyFlat { spread: f64 },

    #[error("unsupported dimension {dim} for {what}")]
    UnsupportedDimension { dim: usize, what: &'static str },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(what: impl Into<String>) -> Self {
        Error::Domain { what: what.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter { message: message.into() }
    }
}
