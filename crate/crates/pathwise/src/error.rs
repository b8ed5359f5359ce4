use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("exponent p must be at least 1, got {0}")]
    InvalidExponent(f64),

    #[error("oracle scale exceeded: {0} points, at most 14 supported")]
    OracleScale(usize),

    #[error("small-jump cutoff must lie in (0, 1], got {0}")]
    InvalidCutoff(f64),

    #[error("gaussian covariance is not symmetric positive semidefinite")]
    NotPsd,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("index indeterminate: truncated integrals undecided in [{lo}, {hi}]")]
    Indeterminate { lo: f64, hi: f64 },

    #[error("delta must be positive, got {0}")]
    InvalidDelta(f64),

    #[error("horizon mismatch: expected {expected}, got {found}")]
    HorizonMismatch { expected: f64, found: f64 },

    #[error("Young condition violated: 1/p + 1/q = {0} <= 1")]
    YoungCondition(f64),

    #[error("common discontinuity at t = {0}")]
    CommonDiscontinuity(f64),

    #[error("paths do not share a grid")]
    GridMismatch,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("no contraction: Picard update {residual:e} after {iterations} iterations on a single step")]
    NoContraction { iterations: usize, residual: f64 },

    #[error("field regularity {alpha} does not exceed p = {p}")]
    Regularity { alpha: f64, p: f64 },

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("intervals do not abut: {0} != {1}")]
    NotAbutting(f64, f64),

    #[error("empty interval [{0}, {1}]")]
    EmptyInterval(f64, f64),

    #[error("gamma must exceed p - 1 (gamma = {gamma}, p = {p})")]
    InvalidGamma { gamma: f64, p: f64 },

    #[error("not multiplicative: Chen residual {0:e}")]
    NotMultiplicative(f64),

    #[error("divergent rough sum: successive levels differ by {0:e}")]
    DivergentRoughSum(f64),

    #[error("path has registered jumps")]
    HasJumps,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
