use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A coordinate or extent does not fit the exact-arithmetic budget.
    #[error("scale error: {0}")]
    Scale(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("infeasible selection: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid field `{field}`: {message}")]
    InvalidField { field: String, message: String },

    #[error("graph is not cubic: {0}")]
    NotCubic(String),

    #[error("edge ({0}, {1}) not present in graph")]
    MissingEdge(usize, usize),

    #[error("set system is not in the required shape: {0}")]
    NotSpecialShape(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
