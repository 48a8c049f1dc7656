use thiserror::Error;

/// Errors raised by the geometry, simulation, transform, analytic and verification layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("non-finite clock integrand at t = {0}")]
    NonFiniteClock(f64),
    #[error("time {t} beyond clock terminal value {end}")]
    ClockExhausted { t: f64, end: f64 },
    #[error("start point on the orthant boundary")]
    BoundaryStart,
    #[error("outside support: {0}")]
    OutsideSupport(String),
    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error}")]
    Quadrature { estimate: f64, error: f64 },
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("function fails the Neumann check at {point:?}: derivative {derivative}")]
    NotNeumann { point: Vec<f64>, derivative: f64 },
    #[error("expected {expected:.3} big jumps per cell exceeds cap {cap}")]
    TooManyJumps { expected: f64, cap: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("generator bound exceeded: |Af| = {value} > {bound}")]
    GeneratorBound { value: f64, bound: f64 },
    #[error("step too coarse: boundary overshoot fraction {0:.4}")]
    StepTooCoarse(f64),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
