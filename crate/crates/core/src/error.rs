use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("field mean {mean:e} exceeds tolerance {tolerance:e}")]
    NonzeroMean { mean: f64, tolerance: f64 },

    #[error("grid mismatch: expected n = {expected}, got n = {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("inversion exponent {0} must be >= 1")]
    InvalidExponent(f64),

    #[error("time step {dt:e} violates CFL limit; admissible dt <= {admissible:e}")]
    Cfl { dt: f64, admissible: f64 },

    #[error("numerical blow-up at t = {time}")]
    BlowUp { time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} is under-resolved: needs n >= {required_n}")]
    UnderResolved { what: &'static str, required_n: usize },

    #[error("point ({x:e}, {y:e}) lies outside {region}")]
    OutsideRegion { x: f64, y: f64, region: &'static str },

    #[error("parameter ladder violates {0}")]
    LadderViolation(String),

    #[error("trajectory reached the axis guard band at t = {time}")]
    AxisGuard { time: f64 },

    #[error("field support leaks outside the cross arms: {leak:e} at ({x:.6}, {y:.6})")]
    SupportLeak { leak: f64, x: f64, y: f64 },

    #[error("value {value:e} at t = {t} outside admissible range for {what}")]
    OutOfRange { what: &'static str, t: f64, value: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
