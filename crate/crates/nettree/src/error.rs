use thiserror::Error;

/// Errors produced by ingestion, construction, and queries.
///
/// The variants map onto the CLI exit-code contract: `Params` is a parameter
/// error (exit 2), `Input`/`Parse`/`Duplicate`/`Io` are input errors (exit 3),
/// and `State`/`Structural`/`Internal` indicate misuse or a broken invariant.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate point: line {second} repeats the coordinates of line {first}")]
    Duplicate { first: usize, second: usize },

    #[error("state error: {0}")]
    State(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
