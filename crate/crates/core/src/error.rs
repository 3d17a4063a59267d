use thiserror::Error;

use crate::geometry::EdgeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("fewer than three points ({0})")]
    TooFewPoints(usize),
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("points {0}, {1} and {2} are collinear")]
    GeneralPositionViolation(usize, usize, usize),
    #[error("coordinate {0} exceeds the supported magnitude 2^30")]
    CoordinateOutOfRange(i64),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("polygon cap of {0} exceeded")]
    CapExceeded(usize),
    #[error("the initial columns do not contain every empty triangle")]
    MissingTriangles,
    #[error("no fractional edge variable although polygon values are fractional")]
    NoFractionalEdge,
    #[error("fixing edge {0:?} conflicts with earlier fixings")]
    ConflictingFixing(EdgeId),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("LP solver failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
