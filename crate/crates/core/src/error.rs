use thiserror::Error;

use crate::separation::DedupLevel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Budget,
    Numeric,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size must be between 2 and 255, got {0}")]
    InvalidAlphabet(usize),
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: u8, right: u8 },
    #[error("symbol {symbol} is outside the alphabet 1..={alphabet}")]
    InvalidSymbol { symbol: usize, alphabet: u8 },
    #[error("cannot parse word {0:?}")]
    WordSyntax(String),
    #[error("the empty word is not accepted here")]
    EmptyWord,
    #[error("forbidden words exclude every infinite sequence (empty subshift)")]
    EmptySubshift,
    #[error("word length {requested} exceeds tree depth {depth}")]
    DepthExceeded { requested: usize, depth: usize },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid contraction map: {0}")]
    InvalidMap(String),
    #[error("invalid iterated function system: {0}")]
    InvalidSystem(String),
    #[error("seed set is not forward-invariant: map {symbol} sends it outside itself")]
    SeedNotInvariant { symbol: u8 },
    #[error("word {0} is not allowed by the subshift")]
    DisallowedWord(String),
    #[error("radius must be positive")]
    InvalidRadius,
    #[error("point has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("node budget of {limit} exceeded")]
    Budget { limit: usize },
    #[error("dedup node budget of {limit} exceeded after {} completed levels", completed.len())]
    DedupBudget { limit: usize, completed: Vec<DedupLevel> },
    #[error("zero mass: {0}")]
    ZeroMass(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("transition structure is not irreducible")]
    NotIrreducible,
    #[error("contraction ratios are not all equal; homogeneous diameters are required")]
    NonHomogeneous,
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("empty sample grid")]
    EmptyGrid,
    #[error("empty set")]
    EmptySet,
    #[error("invalid window: u = {u}, v = {v}")]
    InvalidWindow { u: String, v: String },
    #[error("fixed-width rational arithmetic overflowed")]
    Overflow,
    #[error("radius {radius} is below the resolution floor {floor}")]
    BelowResolution { radius: String, floor: String },
    #[error("{field}: {message}")]
    Spec { field: String, message: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn spec(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec { field: field.into(), message: message.into() }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Budget { .. } | Error::DedupBudget { .. } => ErrorKind::Budget,
            Error::NonConvergence(_) | Error::Overflow | Error::BelowResolution { .. } => {
                ErrorKind::Numeric
            }
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }

    /// Process exit code: 1 validation, 2 budget, 3 numeric non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Validation | ErrorKind::Io => 1,
            ErrorKind::Budget => 2,
            ErrorKind::Numeric => 3,
        }
    }

    pub fn code_name(&self) -> &'static str {
        match self.kind() {
            ErrorKind::Validation => "validation",
            ErrorKind::Budget => "budget",
            ErrorKind::Numeric => "numeric",
            ErrorKind::Io => "io",
        }
    }
}
