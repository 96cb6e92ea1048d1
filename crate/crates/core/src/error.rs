use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate system label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown system label `{0}`")]
    UnknownLabel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("total dimension {0} exceeds cap {1} (set RT_MAX_DIM to raise it)")]
    DimensionCap(usize, usize),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid isometry: {0}")]
    InvalidIsometry(String),
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("derivation step {step}: {msg}")]
    Derivation { step: usize, msg: String },
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }

    pub fn step(step: usize, msg: impl Into<String>) -> Self {
        Error::Derivation { step, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
