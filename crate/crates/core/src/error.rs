use thiserror::Error;

use crate::Point;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A collective was called without every rank taking part.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid numbering: {0}")]
    InvalidNumbering(String),

    #[error("inconsistent layout: {0}")]
    InconsistentLayout(String),

    #[error("unsupported cell shape: {0}")]
    UnsupportedShape(String),

    /// A migrated cone references a point the receiving rank did not get.
    #[error("incomplete closure on rank {rank}: cone of global point {point} references global point {missing} which was not received")]
    IncompleteClosure {
        rank: usize,
        point: usize,
        missing: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn check_point(p: Point, n: usize) -> Result<()> {
    if p < n {
        Ok(())
    } else {
        invalid(format!("point {p} outside chart [0, {n})"))
    }
}
