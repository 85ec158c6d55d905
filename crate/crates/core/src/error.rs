use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid signature: {0}")]
    Signature(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("element `{0}` is not in the domain")]
    UnknownElement(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("map is not {kind}: {detail}")]
    NotAMorphism { kind: String, detail: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("resource budget exceeded: {0}")]
    Budget(String),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
