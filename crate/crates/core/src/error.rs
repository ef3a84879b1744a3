use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}")]
    RowSumViolation { row: usize, sum: f64 },
    #[error("chain has no unique stationary distribution")]
    NotErgodic,
    #[error("stationary distribution vanishes at state {0}")]
    ZeroStationaryEntry(usize),
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("state preparation completion lost rank")]
    CompletionFailure,
    #[error("register map is not injective: {0}")]
    NotInjective(String),
    #[error("linear-order register map is not a permutation: {0}")]
    NotPermutation(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("filter band infeasible: {0}")]
    InfeasibleBand(String),
    #[error("block encoding has scale {0}, expected an unscaled encoding")]
    ScaledEncoding(f64),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("projection against the known top vector degenerated")]
    DegenerateProjection,
    #[error("gap upper bound {0} fell below the floor")]
    GapTooSmall(f64),
    #[error("no mixing within {0} steps")]
    IterationCap(usize),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
