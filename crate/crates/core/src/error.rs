use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {value} at index {index} is outside [0, 1]")]
    OutOfUnitInterval { index: usize, value: f64 },

    #[error("{}", config_message(.key, .line, .message))]
    Config {
        key: String,
        line: Option<usize>,
        message: String,
    },

    #[error("oracle minimizer is not unique: runner-up exceeds the minimum by {margin:e}")]
    DegenerateOracle { margin: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn config_message(key: &str, line: &Option<usize>, message: &str) -> String {
    match line {
        Some(line) => format!("line {line}: `{key}`: {message}"),
        None => format!("`{key}`: {message}"),
    }
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn density(msg: impl Into<String>) -> Self {
        Error::InvalidDensity(msg.into())
    }
}
