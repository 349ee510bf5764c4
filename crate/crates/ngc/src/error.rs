//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Error`]. Variants carry
//! enough context (indices, dimensions, line numbers) that a caller can print
//! the message and know what to fix without a backtrace.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An edge references a node index outside `[0, n)`.
    #[error("edge ({u}, {v}) references node {bad} but the graph has {n} nodes")]
    IndexOutOfRange { u: usize, v: usize, bad: usize, n: usize },

    /// Input edge lists must not contain self-loops; normalization adds them.
    #[error("self-loop ({0}, {0}) rejected: self-loops are added during normalization, not stored in the graph")]
    SelfLoop(usize),

    /// A probability parameter fell outside `[0, 1]`.
    #[error("{name} = {value} is not a probability in [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    /// A numeric parameter violated its domain (negative λ, zero trials, ...).
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Block-model generation asked for more blocks than nodes.
    #[error("block model with {blocks} blocks needs at least {blocks} nodes, got {n}")]
    TooManyBlocks { blocks: usize, n: usize },

    /// Matrix shapes do not line up for the requested operation.
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch { op: &'static str, expected: String, got: String },

    /// A dense computation was requested above its configured size cap.
    #[error("{op} requires n <= {cap} (dense cap), got n = {n}")]
    CapExceeded { op: &'static str, cap: usize, n: usize },

    /// A dense factorization failed numerically.
    #[error("dense factorization failed in {0}")]
    FactorizationFailed(&'static str),

    /// Row sampling asked for more rows than the graph has.
    #[error("cannot sample {requested} rows from a graph with {n} nodes")]
    SampleTooLarge { requested: usize, n: usize },

    /// Flip noise requires strictly binary input features.
    #[error("feature matrix entry ({row}, {col}) = {value} is not binary; flip noise requires entries in {{0, 1}}")]
    NonBinaryFeature { row: usize, col: usize, value: f64 },

    /// Gradient-descent step size exceeded the smoothness bound 1/L.
    #[error("step size {alpha} exceeds the stability bound 1/L = {limit}")]
    StepSizeTooLarge { alpha: f64, limit: f64 },

    /// An operation that needs labeled rows received an empty mask.
    #[error("{0} requires a nonempty mask")]
    EmptyMask(&'static str),

    /// A data or config file failed to parse; `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    ParseError { path: String, line: usize, message: String },

    /// Two dataset files disagree about the number of nodes.
    #[error("row count mismatch: {left_name} has {left} rows but {right_name} has {right}")]
    RowCountMismatch { left_name: String, left: usize, right_name: String, right: usize },

    /// A config file contained a key the schema does not define.
    #[error("{path}:{line}: unknown config key `{key}`")]
    UnknownKey { path: String, line: usize, key: String },

    /// A config value failed validation (bad enum tag, negative count, ...).
    #[error("config field `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    /// Filesystem-level failure, wrapped with the offending path.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wrap an `io::Error` with the path that produced it.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
