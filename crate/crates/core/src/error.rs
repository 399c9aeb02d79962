use thiserror::Error;

/// Errors raised by distribution construction, transform evaluation,
/// inversion and the Müntz engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown catalog name `{0}`")]
    UnknownCatalogName(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid distribution spec at {path}: {message}")]
    InvalidSpec { path: String, message: String },

    #[error("series diverged: term {term} still growing at the cutoff (|t_k| = {magnitude:e})")]
    SeriesDiverged { term: usize, magnitude: f64 },

    #[error("distribution has a non-atomic part without a density evaluator")]
    NoDensityRoute,

    #[error("no closed-form transform for `{0}`")]
    NoClosedForm(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} > tol {tol:e}")]
    QuadratureNonConvergence { estimate: f64, error: f64, tol: f64 },

    #[error("dimension {0} exceeds the supported maximum of 4")]
    DimensionTooLarge(usize),

    #[error("missing marginal for coordinate subset {0:?}")]
    MissingMarginal(Vec<usize>),

    #[error("derivative of order {order} unavailable (max supported {max})")]
    DerivativeUnavailable { order: usize, max: usize },

    #[error("precision exhausted: certified error {error:e} vs magnitude {magnitude:e}")]
    PrecisionExhausted { error: f64, magnitude: f64 },

    #[error("q = {0} collides with an exponent of the Müntz sequence")]
    QCollidesWithLambda(f64),

    #[error("invalid Müntz sequence: {0}")]
    InvalidSequence(String),

    #[error("grid dimension mismatch: distribution has dim {dist}, got {grids} grids")]
    GridDimensionMismatch { dist: usize, grids: usize },

    #[error("fingerprints are not on the same grid")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::PrecisionExhausted { .. }
                | Error::SeriesDiverged { .. }
                | Error::DerivativeUnavailable { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
