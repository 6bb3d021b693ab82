use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid document: {0}")]
    Json(String),
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("resource `{id}` has non-positive value {value}")]
    NonPositiveValue { id: String, value: String },
    #[error("covet list of `{player}` references undeclared resource `{resource}`")]
    DanglingResource { player: String, resource: String },
    #[error("covet list given for undeclared player `{0}`")]
    DanglingPlayer(String),
    #[error("unknown resource `{0}`")]
    UnknownResource(String),
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("instance too large for oracle: {0}")]
    TooLarge(String),
    #[error("cap exceeded: {what} is {actual}, cap {cap}")]
    CapExceeded {
        what: &'static str,
        actual: usize,
        cap: usize,
    },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("edge ({0}, {1}) is not present in the graph")]
    EdgeAbsent(usize, usize),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
