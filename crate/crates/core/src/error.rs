use thiserror::Error;

use crate::polyfield::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown system id `{0}`")]
    UnknownSystem(String),
    #[error("unknown parameter `{param}` for system `{system}`")]
    UnknownParameter { system: String, param: String },
    #[error("parameter {name}={value} outside valid range {range}")]
    ParameterOutOfRange { name: String, value: f64, range: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point is a fixed point of the field: {0}")]
    FixedPoint(String),
    #[error("point is not on the level set: {0}")]
    NotOnLevelSet(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("degree computation failed: {0}")]
    Degree(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("no sign change: {0}")]
    NoSignChange(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("level set analysis failed: {0}")]
    LevelSet(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
