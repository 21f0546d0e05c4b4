//! Quasi-instantaneous consistency check.
//!
//! A snapshot is normalized by reading the timestamp each region holds. The
//! largest of those, `t_hat`, names the only instantaneous state the snapshot
//! can match: the current time of the counter array at `t_hat`. The snapshot
//! is consistent iff its normalized times equal that vector. No per-region
//! copy times are needed, so the check works on real dumps.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gca::{CounterArray, CurrentTimeVector, OneDimGca, TimeIndex};
use crate::model::{LogicalTime, RegionId, Snapshot};

/// Per-region time of the last event visible in a snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedTimeVector(Vec<LogicalTime>);

impl NormalizedTimeVector {
    pub fn into_inner(self) -> Vec<LogicalTime> {
        self.0
    }
}

impl Deref for NormalizedTimeVector {
    type Target = [LogicalTime];

    fn deref(&self) -> &[LogicalTime] {
        &self.0
    }
}

impl PartialEq<CurrentTimeVector> for NormalizedTimeVector {
    fn eq(&self, other: &CurrentTimeVector) -> bool {
        self.0.as_slice() == other.deref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionMismatch {
    pub region: RegionId,
    /// Time of the last event visible in the copied region.
    pub snapshot_time: LogicalTime,
    /// Time of the last event on the region at `t_hat`.
    pub expected_time: LogicalTime,
    /// Events on this region the copy missed.
    pub missed_updates: u64,
    /// `expected_time - snapshot_time`; counts events on all regions.
    pub raw_time_delta: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub t_hat: LogicalTime,
    pub mismatches: Vec<RegionMismatch>,
}

impl ConsistencyReport {
    pub fn inconsistency_count(&self) -> usize {
        self.mismatches.len()
    }

    pub fn total_missed_updates(&self) -> u64 {
        self.mismatches.iter().map(|m| m.missed_updates).sum()
    }
}

/// Reads each region's payload as the time of its last visible event.
pub fn normalize(snapshot: &Snapshot) -> NormalizedTimeVector {
    NormalizedTimeVector(snapshot.values.iter().map(|v| v.as_time()).collect())
}

/// Time of the associated instantaneous snapshot: the newest visible event.
pub fn associated_time(ntv: &NormalizedTimeVector) -> Result<LogicalTime> {
    ntv.iter()
        .copied()
        .max()
        .ok_or(Error::Empty("normalized time vector"))
}

/// Checks `snapshot` against a one-dimensional counter array using the
/// backward scan to rebuild the current time at `t_hat`.
pub fn check(snapshot: &Snapshot, gca: &OneDimGca) -> Result<ConsistencyReport> {
    let (ntv, t_hat) = prepare(snapshot, gca)?;
    let expected = gca.current_time(t_hat)?;
    Ok(compare(&ntv, &expected, t_hat, |r, after, up_to| {
        gca.count_between(r, after, up_to)
    }))
}

/// Same verdict as [`check`], answered from a prebuilt [`TimeIndex`]. Useful
/// when many snapshots are checked against one array.
pub fn check_indexed(
    snapshot: &Snapshot,
    gca: &OneDimGca,
    index: &TimeIndex,
) -> Result<ConsistencyReport> {
    if index.now() != gca.now() {
        return Err(Error::InvalidConfig(
            "index was built from a different array".into(),
        ));
    }
    let (ntv, t_hat) = prepare(snapshot, gca)?;
    let expected = index.current_time(t_hat)?;
    Ok(compare(&ntv, &expected, t_hat, |r, after, up_to| {
        index.count_between(r, after, up_to)
    }))
}

fn prepare(snapshot: &Snapshot, gca: &OneDimGca) -> Result<(NormalizedTimeVector, LogicalTime)> {
    if snapshot.region_count() != gca.region_count() {
        return Err(Error::RegionCountMismatch {
            expected: gca.region_count(),
            found: snapshot.region_count(),
        });
    }
    let ntv = normalize(snapshot);
    let t_hat = associated_time(&ntv)?;
    if t_hat > gca.now() {
        return Err(Error::Coverage {
            t_hat,
            covered: gca.now(),
        });
    }
    // Every nonzero timestamp must belong to an event on its own region,
    // otherwise the payload did not come from the instrumented writer.
    for (i, &t) in ntv.iter().enumerate() {
        if t == LogicalTime::ZERO {
            continue;
        }
        let owner = gca.region_at(t).expect("t <= t_hat <= now");
        if owner.0 != i {
            return Err(Error::ForeignTimestamp {
                region: RegionId(i),
                time: t,
                owner,
            });
        }
    }
    Ok((ntv, t_hat))
}

fn compare(
    ntv: &NormalizedTimeVector,
    expected: &CurrentTimeVector,
    t_hat: LogicalTime,
    count: impl Fn(RegionId, LogicalTime, LogicalTime) -> u64,
) -> ConsistencyReport {
    let mismatches: Vec<RegionMismatch> = ntv
        .iter()
        .zip(expected.iter())
        .enumerate()
        .filter(|(_, (seen, want))| seen != want)
        .map(|(i, (&seen, &want))| {
            // want is the last event on i at or before t_hat, and seen is an
            // event on i at or before t_hat, so seen < want.
            debug_assert!(seen < want);
            let region = RegionId(i);
            RegionMismatch {
                region,
                snapshot_time: seen,
                expected_time: want,
                missed_updates: count(region, seen, want),
                raw_time_delta: want.0 - seen.0,
            }
        })
        .collect();
    ConsistencyReport {
        consistent: mismatches.is_empty(),
        t_hat,
        mismatches,
    }
}
