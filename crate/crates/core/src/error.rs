use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite parameter in {0}")]
    NonFinite(String),
    #[error("model must have at least one visible unit")]
    NoVisibleUnits,
    #[error("duplicate visible terminal name `{0}`")]
    DuplicateName(String),
    #[error("unknown terminal `{0}`")]
    UnknownTerminal(String),
    #[error("terminal `{0}` appears in more than one merge pair")]
    DuplicateTerminal(String),
    #[error("terminal name `{0}` collides after merging; rename before merging")]
    NameCollision(String),
    #[error("cannot tie terminal `{0}` to itself")]
    SameTerminal(String),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("duplicate component id `{0}`")]
    DuplicateComponent(String),
    #[error("dangling connection endpoint `{0}`")]
    DanglingEndpoint(String),
    #[error("export name collision on `{0}`")]
    ExportCollision(String),
    #[error("conflicting constant values on terminal `{0}`")]
    ConstantConflict(String),
    #[error("truth table has no rows")]
    EmptyTable,
    #[error("invalid truth table: {0}")]
    InvalidTable(String),
    #[error("sharpness must be positive and finite, got {0}")]
    InvalidSharpness(f64),
    #[error("state space too large: {units} units exceeds limit {limit}")]
    StateSpaceTooLarge { units: usize, limit: usize },
    #[error("distribution supports differ")]
    SupportMismatch,
    #[error("q has positive mass at state {0} where p is zero")]
    NotAbsolutelyContinuous(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("clamp is inconsistent with state: {0}")]
    InconsistentClamp(String),
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("trace has zero variance")]
    ConstantTrace,
    #[error("value {value} does not fit in {bits} bits")]
    Overflow { value: u64, bits: usize },
    #[error("width mismatch: {0}")]
    WidthMismatch(String),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("did not converge: {0}")]
    NoConvergence(String),
    #[error("checkpoint {checkpoint} exceeds collected samples {collected}")]
    CheckpointOutOfRange { checkpoint: usize, collected: usize },
    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
