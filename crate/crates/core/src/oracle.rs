//! Brute-force ground truth: a snapshot is consistent iff its values equal
//! those of the instantaneous snapshot at some logical time.
//!
//! This replays the trace and compares values at every time, so it is
//! `O(n * t_max)`. It does not use counter arrays or timestamps, which keeps it
//! independent of [`crate::checker`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ExecutionTrace, LogicalTime, RegionId, RegionValue, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub consistent: bool,
    /// Smallest time whose instantaneous snapshot has the same values.
    pub witness_time: Option<LogicalTime>,
}

/// All regions copied at the same time `t`.
pub fn instantaneous_snapshot(trace: &ExecutionTrace, t: LogicalTime) -> Result<Snapshot> {
    if t > trace.t_max() {
        return Err(Error::TimeOutOfRange {
            time: t,
            max: trace.t_max(),
        });
    }
    let values = (0..trace.region_count())
        .map(|r| trace.value_at(RegionId(r), t))
        .collect::<Result<Vec<_>>>()?;
    Ok(Snapshot {
        values,
        acq_times: Some(vec![t; trace.region_count()]),
    })
}

pub fn oracle_check(trace: &ExecutionTrace, snapshot: &Snapshot) -> Result<OracleVerdict> {
    if snapshot.region_count() != trace.region_count() {
        return Err(Error::RegionCountMismatch {
            expected: trace.region_count(),
            found: snapshot.region_count(),
        });
    }
    let mut memory = vec![RegionValue(0); trace.region_count()];
    let mut differing = memory
        .iter()
        .zip(&snapshot.values)
        .filter(|(a, b)| a != b)
        .count();
    if differing == 0 {
        return Ok(found(LogicalTime::ZERO));
    }
    for ev in trace.iter_events() {
        let cell = &mut memory[ev.region.0];
        let target = snapshot.values[ev.region.0];
        let was_equal = *cell == target;
        *cell = RegionValue::written_at(ev.time);
        let is_equal = *cell == target;
        match (was_equal, is_equal) {
            (true, false) => differing += 1,
            (false, true) => differing -= 1,
            _ => {}
        }
        if differing == 0 {
            return Ok(found(ev.time));
        }
    }
    Ok(OracleVerdict {
        consistent: false,
        witness_time: None,
    })
}

fn found(t: LogicalTime) -> OracleVerdict {
    OracleVerdict {
        consistent: true,
        witness_time: Some(t),
    }
}
