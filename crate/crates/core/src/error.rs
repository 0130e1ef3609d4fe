use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("p = {0} is not a prime")]
    NotPrime(u32),

    #[error("parameters disagree: p = {0} vs p = {1}")]
    ParamMismatch(u32, u32),

    #[error("digit {digit} at index {index} is not below p = {p}")]
    DigitRange { index: i32, digit: u32, p: u32 },

    #[error("index {index} lies outside the digit window [{lo}, {hi}]")]
    OutsideWindow { index: i32, lo: i32, hi: i32 },

    #[error("malformed tree: {reason} (nodes {nodes:?})")]
    MalformedTree { reason: String, nodes: Vec<usize> },

    #[error("tree is not N-valid: {0}")]
    InvalidTree(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("window set is not a valid mask support: {0}")]
    InvalidSupport(String),

    #[error("invalid mask: {0}")]
    Mask(String),

    #[error("mask does not generate an orthogonal MRA: {0}")]
    MaskNotOrthogonal(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("value has no exact representation: {0}")]
    NotExact(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unknown format `{0}`")]
    UnknownFormat(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
