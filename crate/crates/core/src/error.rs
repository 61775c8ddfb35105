use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },

    #[error("constraint on {scope:?} has zero weight")]
    ZeroWeight { scope: Vec<usize> },

    #[error("duplicate constraint scope {scope:?}")]
    DuplicateScope { scope: Vec<usize> },

    #[error("binary constraint pairs variable {0} with itself")]
    SelfLoop(usize),

    #[error("assignment has length {found}, instance has {expected} variables")]
    LengthMismatch { expected: usize, found: usize },

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("malformed constraint table: {0}")]
    MalformedTable(String),

    #[error("invalid variable labels: {0}")]
    InvalidLabels(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid assignment string: {0}")]
    InvalidAssignment(String),

    #[error("sign-dependence arcs contain a directed cycle")]
    CyclicOrientation,

    #[error("instance is not oriented")]
    NotOriented,

    #[error("gradient of variable {0} is zero when fixing it; preferred assignment undefined")]
    ZeroGradientAtFix(usize),

    #[error("{what} exceeds the cap ({size} > {cap})")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("target assignment is not reachable by an ascent from the start")]
    Unreachable,

    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("self-validation failed: {0}")]
    SelfValidationFailed(String),

    #[error("tie at step {step}: variables {vars:?} share the maximal gain")]
    TieEncountered { step: u64, vars: Vec<usize> },

    #[error("trial count must be positive")]
    EmptyTrial,

    #[error("invalid scan order: {0}")]
    InvalidScanOrder(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
