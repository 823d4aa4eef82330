use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("transient dimension required (got d = {0})")]
    TransientDimension(usize),
    #[error("dimension {0} is outside the supported range 3..={max}", max = crate::lattice::MAX_DIM)]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty shape")]
    EmptyShape,
    #[error("empty set")]
    EmptySet,
    #[error("no mesoscopic scale separation (L = {l}, N = {n})")]
    NoScaleSeparation { l: u64, n: u64 },
    #[error("strict regime requires N > 100^d and K > 100 (N = {n}, K = {k}, d = {d})")]
    StrictRegime { n: u64, k: u64, d: usize },
    #[error("solver size limit exceeded: {size} > {limit}")]
    SizeLimit { size: usize, limit: usize },
    #[error("ill-conditioned system: pivot {pivot} at row {row} of {n}")]
    IllConditioned { row: usize, n: usize, pivot: f64 },
    #[error("iterative solver did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("boxes overlap: {0} and {1}")]
    OverlappingBoxes(usize, usize),
    #[error("window mismatch")]
    WindowMismatch,
    #[error("set is not contained in the window")]
    OutsideWindow,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("conditioning failure after {0} rejections")]
    ConditioningFailure(u64),
    #[error("enclosing sphere of radius {radius} does not contain the shape")]
    NotEnclosing { radius: f64 },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
