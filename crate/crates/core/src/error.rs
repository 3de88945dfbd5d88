use thiserror::Error;

/// Library error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate interval for `{name}`: lower {lower} must be strictly below upper {upper}")]
    DegenerateInterval { name: String, lower: f64, upper: f64 },

    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),

    #[error("empty or invalid variable name `{0}`")]
    InvalidName(String),

    #[error("variable names do not match: expected {expected:?}, found {found:?}")]
    NameMismatch { expected: Vec<String>, found: Vec<String> },

    #[error("sample row {row}, column `{column}`: value {value} lies outside [{lower}, {upper}]")]
    SampleOutsideMarginal { row: usize, column: String, value: f64, lower: f64, upper: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("zero deviation: column {0} is identically at its midpoint")]
    ZeroDeviation(usize),

    #[error("need at least {needed} samples, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("no correlation coefficient in the admissible range encloses all samples of pair ({i}, {j})")]
    InfeasibleFit { i: usize, j: usize },

    #[error("pair ({0}, {1}) is missing")]
    MissingPair(usize, usize),

    #[error("pair ({0}, {1}) given more than once")]
    DuplicatePair(usize, usize),

    #[error("invalid pair ({i}, {j}) with coefficient {r}")]
    InvalidPair { i: usize, j: usize, r: f64 },

    #[error("matrix is not a valid correlation matrix: {0}")]
    InvalidCorrelation(String),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("shape matrix is singular (|det| = {det:.3e})")]
    SingularShape { det: f64 },

    #[error("operation requires an ellipsoid model")]
    NotEllipsoid,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse { line: usize, field: String, message: String },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown character {ch:?} at byte {offset}")]
    UnknownCharacter { offset: usize, ch: char },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("limit state is zero at the midpoint; the index is undefined")]
    MidpointOnSurface,

    #[error("no limit-state surface found within standardized radius {eta_max}; eta > {eta_max}")]
    NoSurfaceFound { eta_max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
