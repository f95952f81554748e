use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("malformed dispersion table: {0}")]
    MalformedTable(String),
    #[error("frequency {omega:e} rad/s outside dispersion window [{lo:e}, {hi:e}]")]
    Extrapolation { omega: f64, lo: f64, hi: f64 },
    #[error("inconsistent frequency bands: {0}")]
    InconsistentBands(String),
    #[error("quadrature did not converge: estimated relative error {estimate:e}")]
    Quadrature { estimate: f64 },
    #[error("invalid loss: {0}")]
    InvalidLoss(String),
    #[error("overlap undefined: field has zero norm")]
    UndefinedOverlap,
    #[error("invalid poling pattern: {0}")]
    InvalidPattern(String),
    #[error("infeasible apodization: target peak {peak} exceeds 1")]
    InfeasibleApodization { peak: f64 },
    #[error("domain shift {shift:e} m is not smaller than the minimum domain width {min_width:e} m")]
    OverBroadening { shift: f64, min_width: f64 },
    #[error("position {z:e} m outside device of length {length:e} m")]
    OutOfRange { z: f64, length: f64 },
    #[error("invalid inhomogeneity parameters: {0}")]
    InvalidInhomogeneity(String),
    #[error("invalid mode field: {0}")]
    InvalidMode(String),
    #[error("pump spectral field does not cover {0}")]
    Coverage(String),
    #[error("non-finite matrix entries in {0}")]
    Numeric(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("ODE reference did not converge: relative change {change:e} after halving")]
    OracleUnconverged { change: f64 },
    #[error("degenerate loss: total transmission is zero")]
    DegenerateLoss,
    #[error("process kind mismatch: expected {expected}, got {actual}")]
    KindMismatch { expected: &'static str, actual: &'static str },
    #[error("{0} is undefined when all values vanish")]
    Undefined(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
