use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("row {row}: timestamp does not strictly increase")]
    Ordering { row: usize },

    #[error("row {row}: expected {expected} columns, found {found}")]
    Arity {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {column}: {msg}")]
    Field {
        row: usize,
        column: usize,
        msg: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("model payload truncated: expected {expected} bytes, got {found}")]
    Truncated { expected: usize, found: usize },

    #[error("bad model magic")]
    BadMagic,

    #[error("unsupported model version {0}")]
    Version(u32),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("image format: {0}")]
    Image(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("stream carries no ground-truth flags")]
    Unlabeled,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
