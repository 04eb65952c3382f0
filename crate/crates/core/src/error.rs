use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("zero denominator in literal `{0}`")]
    ZeroDenominator(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("presentation is unstable at jet order {0}")]
    Unstable(u32),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("slot {slot} out of range for arity {arity}")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("parity violation in entry {0}")]
    Parity(String),
    #[error("dangling basis name `{0}`")]
    DanglingName(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("potential mismatch between factorizations")]
    PotentialMismatch,
    #[error("splitting failed: {0}")]
    Splitting(String),
    #[error("truncation overflow: arity {arity} exceeds window {window}")]
    TruncationOverflow { arity: usize, window: usize },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
