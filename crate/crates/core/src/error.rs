use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown coordinate `{name}` at byte {offset}")]
    UnknownCoordinate { name: String, offset: usize },

    #[error("division by zero at point {point:?}")]
    DivisionByZero { point: Vec<f64> },

    #[error("domain error: {message} at point {point:?}")]
    Domain { message: String, point: Vec<f64> },

    #[error("point has dimension {got}, chart expects {expected}")]
    PointDimension { expected: usize, got: usize },

    #[error("chart mismatch: `{left}` vs `{right}`")]
    ChartMismatch { left: String, right: String },

    #[error("degree error: {0}")]
    Degree(String),

    #[error("singular system at point {point:?}: contact condition fails")]
    Singular { point: Vec<f64> },

    #[error("not a contact form: contact condition fails at {witness:?}")]
    NotContact { witness: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("action not free: stabilizer order {stabilizer}")]
    NotFree { stabilizer: u64 },

    #[error("sampler for chart `{chart}` could not find a point inside the domain")]
    SamplerExhausted { chart: String },
}

pub type Result<T> = std::result::Result<T, Error>;
