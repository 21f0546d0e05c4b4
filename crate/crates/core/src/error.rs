use std::io;

use crate::model::{LogicalTime, RegionId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("region {region} out of range for {region_count} regions")]
    RegionOutOfRange {
        region: RegionId,
        region_count: usize,
    },

    #[error("logical time {time} exceeds recorded maximum {max}")]
    TimeOutOfRange { time: LogicalTime, max: LogicalTime },

    #[error("region count mismatch: expected {expected}, found {found}")]
    RegionCountMismatch { expected: usize, found: usize },

    #[error("counter array capacity of {capacity} events exhausted")]
    Capacity { capacity: usize },

    /// The counter array ends before the newest timestamp in the snapshot,
    /// i.e. it was captured before the last region was copied.
    #[error("counter array covers times up to {covered}, snapshot needs {t_hat}")]
    Coverage {
        t_hat: LogicalTime,
        covered: LogicalTime,
    },

    /// A region holds a timestamp whose event was recorded on another region.
    #[error("region {region} holds time {time}, but that event is on region {owner}")]
    ForeignTimestamp {
        region: RegionId,
        time: LogicalTime,
        owner: RegionId,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid acquisition plan: {0}")]
    InvalidPlan(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("worker thread failed: {0}")]
    Thread(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
