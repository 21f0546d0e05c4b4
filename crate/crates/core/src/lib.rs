//! Quasi-instantaneous consistency checking for memory snapshots.
//!
//! A memory snapshot copied region by region from a running system may mix
//! states that never existed together. If every update writes the current
//! logical time into the region it changes and appends the region id to a
//! global counter array, the snapshot can be checked after the fact:
//!
//! ```
//! use coexist_core::{check, ExecutionTrace, OneDimGca, Snapshot};
//!
//! // events at times 1..=5 on regions r1, r0, r2, r1, r0
//! let trace = ExecutionTrace::from_indices(3, &[1, 0, 2, 1, 0]).unwrap();
//! let gca = OneDimGca::from_trace(&trace);
//!
//! // r0 copied late, r1 copied early
//! let report = check(&Snapshot::from_raw(&[5, 1, 3]), &gca).unwrap();
//! assert!(!report.consistent);
//! assert_eq!(report.mismatches[0].missed_updates, 1);
//! ```

pub mod aggregate;
pub mod checker;
pub mod error;
pub mod gca;
pub mod harness;
pub mod model;
pub mod oracle;

pub use aggregate::AggregateStats;
pub use checker::{
    associated_time, check, check_indexed, normalize, ConsistencyReport, NormalizedTimeVector,
    RegionMismatch,
};
pub use error::{Error, Result};
pub use gca::{
    CarryAlongGca, CounterArray, CurrentTimeVector, OneDimGca, SimplifiedGca, TimeIndex,
};
pub use model::{Event, ExecutionTrace, LogicalTime, RegionId, RegionValue, Snapshot};
pub use oracle::{instantaneous_snapshot, oracle_check, OracleVerdict};
