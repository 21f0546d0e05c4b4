//! Regions, logical time, events and snapshots.
//!
//! Regions are indexed from 0. Logical time 0 is the state before any event;
//! event `k` (1-based) happens at time `k` and writes the payload `k` into its
//! region. Every region holds 0 initially.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a memory region, `0..region_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionId(pub usize);

impl RegionId {
    pub fn index(self) -> usize {
        self.0
    }

    pub(crate) fn check(self, region_count: usize) -> Result<Self> {
        if self.0 < region_count {
            Ok(self)
        } else {
            Err(Error::RegionOutOfRange {
                region: self,
                region_count,
            })
        }
    }
}

impl From<usize> for RegionId {
    fn from(index: usize) -> Self {
        RegionId(index)
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Event counter. Time `t` is the state immediately after event `t`.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct LogicalTime(pub u64);

impl LogicalTime {
    pub const ZERO: LogicalTime = LogicalTime(0);

    pub fn get(self) -> u64 {
        self.0
    }

    pub(crate) fn as_index(self) -> usize {
        self.0 as usize
    }
}

impl From<u64> for LogicalTime {
    fn from(t: u64) -> Self {
        LogicalTime(t)
    }
}

impl fmt::Display for LogicalTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Contents of a region. The event at time `t` writes `t`, so a value is
/// also the time of the last event the region has seen.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct RegionValue(pub u64);

impl RegionValue {
    pub fn written_at(t: LogicalTime) -> Self {
        RegionValue(t.0)
    }

    pub fn as_time(self) -> LogicalTime {
        LogicalTime(self.0)
    }
}

impl fmt::Display for RegionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub time: LogicalTime,
    pub region: RegionId,
}

/// Ground-truth execution: `events[k - 1]` is the region touched by event `k`.
///
/// Its content is identical to a one-dimensional global counter array, and it
/// shares the same on-disk form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTrace")]
pub struct ExecutionTrace {
    region_count: usize,
    events: Vec<RegionId>,
}

#[derive(Deserialize)]
struct RawTrace {
    region_count: usize,
    events: Vec<RegionId>,
}

impl TryFrom<RawTrace> for ExecutionTrace {
    type Error = Error;

    fn try_from(raw: RawTrace) -> Result<Self> {
        ExecutionTrace::new(raw.region_count, raw.events)
    }
}

impl ExecutionTrace {
    pub fn new(region_count: usize, events: Vec<RegionId>) -> Result<Self> {
        if region_count == 0 {
            return Err(Error::Empty("trace needs at least one region"));
        }
        for &r in &events {
            r.check(region_count)?;
        }
        Ok(ExecutionTrace {
            region_count,
            events,
        })
    }

    /// Convenience constructor from raw indices.
    pub fn from_indices(region_count: usize, events: &[usize]) -> Result<Self> {
        Self::new(region_count, events.iter().map(|&i| RegionId(i)).collect())
    }

    pub fn empty(region_count: usize) -> Result<Self> {
        Self::new(region_count, Vec::new())
    }

    pub fn region_count(&self) -> usize {
        self.region_count
    }

    pub fn events(&self) -> &[RegionId] {
        &self.events
    }

    /// Final logical time.
    pub fn t_max(&self) -> LogicalTime {
        LogicalTime(self.events.len() as u64)
    }

    /// Region touched by the event at time `t` (`t >= 1`).
    pub fn region_at(&self, t: LogicalTime) -> Option<RegionId> {
        if t.0 == 0 {
            return None;
        }
        self.events.get(t.as_index() - 1).copied()
    }

    pub fn iter_events(&self) -> impl Iterator<Item = Event> + '_ {
        self.events.iter().enumerate().map(|(i, &region)| Event {
            time: LogicalTime(i as u64 + 1),
            region,
        })
    }

    /// Appends an event and returns its time.
    pub fn push(&mut self, region: RegionId) -> Result<LogicalTime> {
        region.check(self.region_count)?;
        self.events.push(region);
        Ok(self.t_max())
    }

    fn check_query(&self, region: RegionId, t: LogicalTime) -> Result<()> {
        region.check(self.region_count)?;
        if t > self.t_max() {
            return Err(Error::TimeOutOfRange {
                time: t,
                max: self.t_max(),
            });
        }
        Ok(())
    }

    /// Time of the last event on `region` at or before `t`, or 0 if none.
    pub fn last_event_time(&self, region: RegionId, t: LogicalTime) -> Result<LogicalTime> {
        self.check_query(region, t)?;
        let found = self.events[..t.as_index()]
            .iter()
            .rposition(|&r| r == region)
            .map(|i| LogicalTime(i as u64 + 1))
            .unwrap_or(LogicalTime::ZERO);
        Ok(found)
    }

    /// Contents of `region` at logical time `t`.
    pub fn value_at(&self, region: RegionId, t: LogicalTime) -> Result<RegionValue> {
        self.check_query(region, t)?;
        // Payloads are write times, so the value is the last write's payload.
        let mut value = RegionValue(0);
        for ev in self.iter_events().take(t.as_index()) {
            if ev.region == region {
                value = RegionValue::written_at(ev.time);
            }
        }
        Ok(value)
    }

    /// Number of events on `region` in the half-open interval `(after, up_to]`.
    pub fn count_events_between(
        &self,
        region: RegionId,
        after: LogicalTime,
        up_to: LogicalTime,
    ) -> Result<u64> {
        self.check_query(region, up_to)?;
        if after >= up_to {
            return Ok(0);
        }
        let n = self.events[after.as_index()..up_to.as_index()]
            .iter()
            .filter(|&&r| r == region)
            .count();
        Ok(n as u64)
    }
}

/// Per-region copy of values, each region possibly copied at a different time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub values: Vec<RegionValue>,
    /// Per-region copy times. Real dumps do not carry these; the simulator does.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acq_times: Option<Vec<LogicalTime>>,
}

impl Snapshot {
    pub fn from_values(values: Vec<RegionValue>) -> Self {
        Snapshot {
            values,
            acq_times: None,
        }
    }

    pub fn from_raw(values: &[u64]) -> Self {
        Self::from_values(values.iter().map(|&v| RegionValue(v)).collect())
    }

    /// An untouched system: every region still holds 0.
    pub fn zeroed(region_count: usize) -> Self {
        Self::from_values(vec![RegionValue(0); region_count])
    }

    pub fn region_count(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, region: RegionId) -> Option<RegionValue> {
        self.values.get(region.0).copied()
    }

    /// True if every region was copied at the same logical time.
    pub fn is_instantaneous(&self) -> bool {
        match &self.acq_times {
            Some(times) => times.windows(2).all(|w| w[0] == w[1]),
            None => false,
        }
    }

    /// Checks the shape of the snapshot against a trace.
    pub fn validate_against(&self, trace: &ExecutionTrace) -> Result<()> {
        if self.values.len() != trace.region_count() {
            return Err(Error::RegionCountMismatch {
                expected: trace.region_count(),
                found: self.values.len(),
            });
        }
        if let Some(times) = &self.acq_times {
            if times.len() != self.values.len() {
                return Err(Error::RegionCountMismatch {
                    expected: self.values.len(),
                    found: times.len(),
                });
            }
            if let Some(&t) = times.iter().find(|&&t| t > trace.t_max()) {
                return Err(Error::TimeOutOfRange {
                    time: t,
                    max: trace.t_max(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig4() -> ExecutionTrace {
        ExecutionTrace::from_indices(3, &[0, 1, 2, 2, 1]).unwrap()
    }

    #[test]
    fn value_at_examples() {
        let tr = fig4();
        assert_eq!(
            tr.value_at(RegionId(1), LogicalTime(5)).unwrap(),
            RegionValue(5)
        );
        assert_eq!(
            tr.value_at(RegionId(0), LogicalTime(5)).unwrap(),
            RegionValue(1)
        );
        for r in 0..3 {
            assert_eq!(
                tr.value_at(RegionId(r), LogicalTime(0)).unwrap(),
                RegionValue(0)
            );
        }
    }

    #[test]
    fn last_event_time_examples() {
        let tr = fig4();
        assert_eq!(
            tr.last_event_time(RegionId(2), LogicalTime(5)).unwrap(),
            LogicalTime(4)
        );
        assert_eq!(
            tr.last_event_time(RegionId(1), LogicalTime(3)).unwrap(),
            LogicalTime(2)
        );

        let idle = ExecutionTrace::from_indices(4, &[0, 1, 2, 2, 1]).unwrap();
        for t in 0..=5 {
            assert_eq!(
                idle.last_event_time(RegionId(3), LogicalTime(t)).unwrap(),
                LogicalTime::ZERO
            );
        }
    }

    #[test]
    fn out_of_range_queries() {
        let tr = fig4();
        assert!(matches!(
            tr.value_at(RegionId(3), LogicalTime(1)),
            Err(Error::RegionOutOfRange { .. })
        ));
        assert!(matches!(
            tr.last_event_time(RegionId(0), LogicalTime(6)),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(ExecutionTrace::from_indices(2, &[0, 2]).is_err());
        assert!(ExecutionTrace::from_indices(0, &[]).is_err());
    }

    #[test]
    fn count_between() {
        let tr = fig4();
        assert_eq!(
            tr.count_events_between(RegionId(2), LogicalTime(0), LogicalTime(5))
                .unwrap(),
            2
        );
        assert_eq!(
            tr.count_events_between(RegionId(2), LogicalTime(3), LogicalTime(5))
                .unwrap(),
            1
        );
        assert_eq!(
            tr.count_events_between(RegionId(2), LogicalTime(4), LogicalTime(3))
                .unwrap(),
            0
        );
    }

    #[test]
    fn trace_json_shape() {
        let tr = fig4();
        let text = serde_json::to_string(&tr).unwrap();
        assert_eq!(text, r#"{"region_count":3,"events":[0,1,2,2,1]}"#);
        let back: ExecutionTrace = serde_json::from_str(&text).unwrap();
        assert_eq!(back, tr);
        assert!(
            serde_json::from_str::<ExecutionTrace>(r#"{"region_count":2,"events":[5]}"#).is_err()
        );
    }

    #[test]
    fn snapshot_json_omits_missing_times() {
        let s = Snapshot::from_raw(&[5, 1, 3]);
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"values":[5,1,3]}"#);
        let parsed: Snapshot = serde_json::from_str(r#"{"values":[1],"acq_times":[4]}"#).unwrap();
        assert_eq!(parsed.acq_times, Some(vec![LogicalTime(4)]));
    }

    #[test]
    fn snapshot_validation() {
        let tr = fig4();
        assert!(Snapshot::zeroed(3).validate_against(&tr).is_ok());
        assert!(Snapshot::zeroed(2).validate_against(&tr).is_err());
        let mut s = Snapshot::zeroed(3);
        s.acq_times = Some(vec![LogicalTime(1), LogicalTime(9), LogicalTime(1)]);
        assert!(matches!(
            s.validate_against(&tr),
            Err(Error::TimeOutOfRange { .. })
        ));
    }
}
