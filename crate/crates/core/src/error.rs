use thiserror::Error;

/// Exit status for malformed input, unknown ids or failed validation.
pub const EXIT_INPUT: i32 = 2;
/// Exit status for a comparison that found a distinguishing invariant.
pub const EXIT_DISTINGUISHED: i32 = 3;
/// Exit status for an exhausted search or enumeration budget.
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown bundle `{0}`")]
    UnknownBundle(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate bundle `{0}`")]
    DuplicateBundle(String),
    #[error("bundle `{0}` has multiplicity 0")]
    ZeroMultiplicity(String),
    #[error("generated name `{0}` collides with an existing name")]
    NameCollision(String),
    #[error("vertex order is not a permutation of the graph's vertices")]
    NotAPermutation,
    #[error("UNREPRESENTABLE_INFINITE_PARTITION: vertex `{0}` requests infinitely many cells")]
    UnrepresentableInfinitePartition(String),
    #[error("partition does not match the graph: {0}")]
    PartitionMismatch(String),
    #[error("invalid partition: {}", .0.join("; "))]
    InvalidPartition(Vec<String>),
    #[error("delay vector does not match the graph: {0}")]
    DelayMismatch(String),
    #[error("invalid delay vector: {}", .0.join("; "))]
    InvalidDelayVector(Vec<String>),
    #[error("improper move: {0}")]
    Improper(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("matrix error: {0}")]
    Matrix(String),
    #[error("{what} budget of {limit} exhausted")]
    Budget { what: &'static str, limit: u64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Budget { .. } => EXIT_BUDGET,
            _ => EXIT_INPUT,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
