use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("instance has no attributes")]
    EmptyInstance,

    /// A coordinate is not finite or lies outside the unit interval.
    #[error("rejected instance: coordinate {index} = {value} is not a finite value in [0, 1]")]
    RejectedInstance { index: usize, value: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("precondition violated: {0}")]
    Contract(&'static str),

    #[error("invalid granule: {0}")]
    InvalidGranule(&'static str),

    #[error("invalid model state: {0}")]
    InvalidState(&'static str),

    #[error("attribute index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("instance h={h} carries no label")]
    Unlabeled { h: u64 },
}
