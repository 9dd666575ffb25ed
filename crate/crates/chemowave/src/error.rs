use thiserror::Error;

/// Errors surfaced by the library. Solver errors carry enough context
/// (time stamp, pivot index, residual norm) to locate the failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("profile construction failed: {0}")]
    ProfileConstruction(String),

    #[error("quadrature did not converge on U-subinterval [{lo:e}, {hi:e}]")]
    QuadratureNonConvergence { lo: f64, hi: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("Newton iteration did not converge at t = {t}: residual {residual:e} after {iterations} iterations")]
    NewtonDiverged {
        t: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("negative density {min_u:e} at t = {t} exceeds the roundoff clamp threshold")]
    NegativeDensity { t: f64, min_u: f64 },

    #[error("matrix is numerically singular at pivot {pivot}")]
    SingularMatrix { pivot: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("tail fit failed: {0}")]
    TailFit(String),

    #[error("shift estimation failed: {0}")]
    ShiftEstimation(String),

    #[error("front tracking failed: {0}")]
    FrontTracking(String),

    #[error("misaligned series: {0}")]
    MisalignedSeries(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("metadata mismatch: {0}")]
    MetadataMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
