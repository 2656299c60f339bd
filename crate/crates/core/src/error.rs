use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge list contains no links")]
    EmptyInput,

    #[error("unknown node {0}")]
    UnknownNode(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample")]
    EmptySample,

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("partition does not cover the graph: {0}")]
    PartialPartition(String),

    #[error("inconsistent property sets across repetitions")]
    InconsistentProperties,

    #[error("no records for method {method} at size {size}")]
    MissingRecord { method: String, size: String },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
