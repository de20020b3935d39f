use alloc::string::String;

use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("invalid period {numerator}/{denominator}: {reason}")]
    InvalidPeriod {
        numerator: u64,
        denominator: u64,
        reason: &'static str,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("instance must be integer-valued for this operation")]
    FractionalElement,
    #[error("fold parameter must be an even integer >= 4, got {0}")]
    InvalidTheta(u64),
    #[error("operation requires a non-empty instance")]
    EmptyInstance,
    #[error("fold produced the value {0}, which has an unsupported denominator")]
    UnsupportedDenominator(String),
    #[error("schedule references job {job} but the instance has {jobs} jobs")]
    JobOutOfRange { job: usize, jobs: usize },
    #[error("schedule cycle must be non-empty")]
    EmptySchedule,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid fold trace: {0}")]
    InvalidTrace(String),
    #[error("element {value} outside the allowed range [{min}, {max}]")]
    OutOfRange { value: String, min: u64, max: u64 },
    #[error("lifted schedule failed verification: {0}")]
    LiftFailed(String),
    #[error("time limit must be positive")]
    ZeroTimeLimit,
    #[error("period {0} is too large for the state-space solver")]
    PeriodTooLarge(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("integer period required, got {0}")]
    IntegerPeriod(String),
    #[error("no proof stage for theta = {0}")]
    MissingStage(u64),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T, E = CoreError> = core::result::Result<T, E>;
