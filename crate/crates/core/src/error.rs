use thiserror::Error;

use crate::network::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("x = {x} lies outside the step-size support [{lower}, {upper}]")]
    OutsideSupport { x: f64, lower: f64, upper: f64 },

    #[error("hop cap of {cap} exhausted at distance {distance}")]
    HopCapExhausted { cap: u64, distance: f64 },

    #[error("malformed node file at line {line}: {message}")]
    MalformedNodeFile { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
