//! Global counter arrays.
//!
//! A global counter array records, for every logical time, which region the
//! event at that time changed. Three layouts are provided:
//!
//! * [`CarryAlongGca`]: one column per time holding the last event time of every
//!   region. Reading the current time is a column lookup, but it costs
//!   `regions * events` cells.
//! * [`SimplifiedGca`]: one bit per (region, time); the current time is
//!   recovered with a backward scan.
//! * [`OneDimGca`]: one region id per time. This is the layout the checker and
//!   the pivot workload use, and it is identical to an [`ExecutionTrace`].
//!
//! All three agree on [`CounterArray::current_time`] for the same event
//! sequence.

use std::ops::{Deref, Index};

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ExecutionTrace, LogicalTime, RegionId};

/// Last event time of every region at one logical time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CurrentTimeVector(Vec<LogicalTime>);

impl CurrentTimeVector {
    pub fn zeros(region_count: usize) -> Self {
        CurrentTimeVector(vec![LogicalTime::ZERO; region_count])
    }

    pub fn from_raw(times: &[u64]) -> Self {
        CurrentTimeVector(times.iter().map(|&t| LogicalTime(t)).collect())
    }

    pub fn into_inner(self) -> Vec<LogicalTime> {
        self.0
    }
}

impl From<Vec<LogicalTime>> for CurrentTimeVector {
    fn from(v: Vec<LogicalTime>) -> Self {
        CurrentTimeVector(v)
    }
}

impl Deref for CurrentTimeVector {
    type Target = [LogicalTime];

    fn deref(&self) -> &[LogicalTime] {
        &self.0
    }
}

impl Index<RegionId> for CurrentTimeVector {
    type Output = LogicalTime;

    fn index(&self, r: RegionId) -> &LogicalTime {
        &self.0[r.0]
    }
}

/// Common interface of the counter array layouts.
///
/// `record_event` mutates shared state; callers that share an array between
/// threads must serialize calls themselves.
pub trait CounterArray {
    fn region_count(&self) -> usize;

    /// Highest recorded logical time.
    fn now(&self) -> LogicalTime;

    /// Records an event on `region` and returns its logical time. The caller
    /// stores the returned time into the region.
    fn record_event(&mut self, region: RegionId) -> Result<LogicalTime>;

    /// Current time vector at `t`.
    fn current_time(&self, t: LogicalTime) -> Result<CurrentTimeVector>;
}

fn check_time(t: LogicalTime, now: LogicalTime) -> Result<()> {
    if t > now {
        Err(Error::TimeOutOfRange { time: t, max: now })
    } else {
        Ok(())
    }
}

fn check_capacity(now: LogicalTime, capacity: Option<usize>) -> Result<()> {
    match capacity {
        Some(cap) if now.as_index() >= cap => Err(Error::Capacity { capacity: cap }),
        _ => Ok(()),
    }
}

/// Two-dimensional array whose column `t` is the full current time at `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarryAlongGca {
    region_count: usize,
    columns: Vec<Vec<LogicalTime>>,
    capacity: Option<usize>,
}

impl CarryAlongGca {
    pub fn new(region_count: usize) -> Self {
        CarryAlongGca {
            region_count,
            columns: vec![vec![LogicalTime::ZERO; region_count]],
            capacity: None,
        }
    }

    pub fn with_capacity_limit(region_count: usize, capacity: usize) -> Self {
        CarryAlongGca {
            capacity: Some(capacity),
            ..Self::new(region_count)
        }
    }

    /// Builds the carry-along form of a list, refusing if it would need more
    /// than `max_cells` entries.
    pub fn materialize(list: &OneDimGca, max_cells: usize) -> Result<Self> {
        let cells = (list.entries.len() + 1).saturating_mul(list.region_count);
        if cells > max_cells {
            return Err(Error::Capacity {
                capacity: max_cells / list.region_count.max(1),
            });
        }
        let mut g = Self::new(list.region_count);
        for &r in &list.entries {
            g.record_event(r)?;
        }
        Ok(g)
    }

    pub fn column(&self, t: LogicalTime) -> Option<&[LogicalTime]> {
        self.columns.get(t.as_index()).map(Vec::as_slice)
    }

    /// Region whose entry changed between `t - 1` and `t`.
    fn changed_region(&self, t: usize) -> Option<RegionId> {
        let (prev, cur) = (&self.columns[t - 1], &self.columns[t]);
        (0..self.region_count)
            .find(|&r| prev[r] != cur[r])
            .map(RegionId)
    }
}

impl CounterArray for CarryAlongGca {
    fn region_count(&self) -> usize {
        self.region_count
    }

    fn now(&self) -> LogicalTime {
        LogicalTime(self.columns.len() as u64 - 1)
    }

    fn record_event(&mut self, region: RegionId) -> Result<LogicalTime> {
        region.check(self.region_count)?;
        check_capacity(self.now(), self.capacity)?;
        let t = LogicalTime(self.now().0 + 1);
        let mut column = self.columns[self.columns.len() - 1].clone();
        column[region.0] = t;
        self.columns.push(column);
        Ok(t)
    }

    fn current_time(&self, t: LogicalTime) -> Result<CurrentTimeVector> {
        check_time(t, self.now())?;
        Ok(CurrentTimeVector(self.columns[t.as_index()].clone()))
    }
}

/// Bit matrix with a single 1 per column marking the changed region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplifiedGca {
    rows: Vec<BitVec>,
    len: usize,
    capacity: Option<usize>,
}

impl SimplifiedGca {
    pub fn new(region_count: usize) -> Self {
        SimplifiedGca {
            // Column 0 exists and stays empty.
            rows: vec![bitvec![0; 1]; region_count],
            len: 1,
            capacity: None,
        }
    }

    pub fn with_capacity_limit(region_count: usize, capacity: usize) -> Self {
        SimplifiedGca {
            capacity: Some(capacity),
            ..Self::new(region_count)
        }
    }

    pub fn bit(&self, region: RegionId, t: LogicalTime) -> bool {
        self.rows
            .get(region.0)
            .and_then(|row| row.get(t.as_index()).map(|b| *b))
            .unwrap_or(false)
    }

    /// Number of set bits in column `t`.
    pub fn column_weight(&self, t: LogicalTime) -> usize {
        (0..self.rows.len())
            .filter(|&r| self.bit(RegionId(r), t))
            .count()
    }
}

impl CounterArray for SimplifiedGca {
    fn region_count(&self) -> usize {
        self.rows.len()
    }

    fn now(&self) -> LogicalTime {
        LogicalTime(self.len as u64 - 1)
    }

    fn record_event(&mut self, region: RegionId) -> Result<LogicalTime> {
        region.check(self.rows.len())?;
        check_capacity(self.now(), self.capacity)?;
        for (r, row) in self.rows.iter_mut().enumerate() {
            row.push(r == region.0);
        }
        self.len += 1;
        Ok(self.now())
    }

    fn current_time(&self, t: LogicalTime) -> Result<CurrentTimeVector> {
        check_time(t, self.now())?;
        let n = self.rows.len();
        let mut found: Vec<Option<LogicalTime>> = vec![None; n];
        let mut missing = n;
        let mut ti = t.as_index();
        while missing > 0 {
            if ti == 0 {
                break;
            }
            // A row that is already filled is skipped, same as the list scan.
            if let Some(r) = (0..n).find(|&r| self.rows[r][ti] && found[r].is_none()) {
                found[r] = Some(LogicalTime(ti as u64));
                missing -= 1;
            }
            ti -= 1;
        }
        Ok(CurrentTimeVector(
            found
                .into_iter()
                .map(|t| t.unwrap_or(LogicalTime::ZERO))
                .collect(),
        ))
    }
}

/// List of region ids, entry `t - 1` holding the region of the event at `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ExecutionTrace", try_from = "ExecutionTrace")]
pub struct OneDimGca {
    region_count: usize,
    entries: Vec<RegionId>,
    capacity: Option<usize>,
}

impl OneDimGca {
    pub fn new(region_count: usize) -> Self {
        OneDimGca {
            region_count,
            entries: Vec::new(),
            capacity: None,
        }
    }

    pub fn with_capacity_limit(region_count: usize, capacity: usize) -> Self {
        OneDimGca {
            region_count,
            entries: Vec::with_capacity(capacity.min(1 << 20)),
            capacity: Some(capacity),
        }
    }

    pub fn from_trace(trace: &ExecutionTrace) -> Self {
        OneDimGca {
            region_count: trace.region_count(),
            entries: trace.events().to_vec(),
            capacity: None,
        }
    }

    pub fn to_trace(&self) -> ExecutionTrace {
        ExecutionTrace::new(self.region_count, self.entries.clone())
            .expect("entries are validated on insert")
    }

    pub fn entries(&self) -> &[RegionId] {
        &self.entries
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    /// Region of the event at time `t` (`t >= 1`).
    pub fn region_at(&self, t: LogicalTime) -> Option<RegionId> {
        if t.0 == 0 {
            return None;
        }
        self.entries.get(t.as_index() - 1).copied()
    }

    /// Number of entries equal to `region` in `(after, up_to]`.
    pub fn count_between(&self, region: RegionId, after: LogicalTime, up_to: LogicalTime) -> u64 {
        let hi = up_to.as_index().min(self.entries.len());
        let lo = after.as_index().min(hi);
        self.entries[lo..hi]
            .iter()
            .filter(|&&r| r == region)
            .count() as u64
    }

    /// Keeps only the first `t` entries.
    pub fn truncate(&mut self, t: LogicalTime) {
        self.entries.truncate(t.as_index());
    }
}

impl From<OneDimGca> for ExecutionTrace {
    fn from(g: OneDimGca) -> Self {
        g.to_trace()
    }
}

impl TryFrom<ExecutionTrace> for OneDimGca {
    type Error = Error;

    fn try_from(trace: ExecutionTrace) -> Result<Self> {
        Ok(OneDimGca::from_trace(&trace))
    }
}

impl From<&CarryAlongGca> for OneDimGca {
    fn from(g: &CarryAlongGca) -> Self {
        let entries = (1..g.columns.len())
            .map(|t| g.changed_region(t).expect("every column records one event"))
            .collect();
        OneDimGca {
            region_count: g.region_count,
            entries,
            capacity: g.capacity,
        }
    }
}

impl From<&SimplifiedGca> for OneDimGca {
    fn from(g: &SimplifiedGca) -> Self {
        let entries = (1..g.len)
            .map(|t| {
                let r = (0..g.rows.len())
                    .find(|&r| g.rows[r][t])
                    .expect("every column has one set bit");
                RegionId(r)
            })
            .collect();
        OneDimGca {
            region_count: g.rows.len(),
            entries,
            capacity: g.capacity,
        }
    }
}

impl CounterArray for OneDimGca {
    fn region_count(&self) -> usize {
        self.region_count
    }

    fn now(&self) -> LogicalTime {
        LogicalTime(self.entries.len() as u64)
    }

    fn record_event(&mut self, region: RegionId) -> Result<LogicalTime> {
        region.check(self.region_count)?;
        check_capacity(self.now(), self.capacity)?;
        self.entries.push(region);
        Ok(self.now())
    }

    fn current_time(&self, t: LogicalTime) -> Result<CurrentTimeVector> {
        check_time(t, self.now())?;
        let n = self.region_count;
        let mut found: Vec<Option<LogicalTime>> = vec![None; n];
        let mut missing = n;
        let mut ti = t.as_index();
        while missing > 0 && ti > 0 {
            let r = self.entries[ti - 1].0;
            if found[r].is_none() {
                found[r] = Some(LogicalTime(ti as u64));
                missing -= 1;
            }
            ti -= 1;
        }
        Ok(CurrentTimeVector(
            found
                .into_iter()
                .map(|t| t.unwrap_or(LogicalTime::ZERO))
                .collect(),
        ))
    }
}

/// Per-region sorted event times built once from a list, answering current
/// time and missed-update queries in `O(n log t)`.
///
/// Results match the backward scan of [`OneDimGca::current_time`], which
/// remains the reference path.
#[derive(Debug, Clone)]
pub struct TimeIndex {
    times: Vec<Vec<u64>>,
    now: LogicalTime,
}

impl TimeIndex {
    pub fn build(gca: &OneDimGca) -> Self {
        let mut times = vec![Vec::new(); gca.region_count];
        for (i, r) in gca.entries.iter().enumerate() {
            times[r.0].push(i as u64 + 1);
        }
        TimeIndex {
            times,
            now: gca.now(),
        }
    }

    pub fn now(&self) -> LogicalTime {
        self.now
    }

    pub fn current_time(&self, t: LogicalTime) -> Result<CurrentTimeVector> {
        check_time(t, self.now)?;
        Ok(CurrentTimeVector(
            self.times
                .iter()
                .map(|ts| {
                    let k = ts.partition_point(|&x| x <= t.0);
                    LogicalTime(if k == 0 { 0 } else { ts[k - 1] })
                })
                .collect(),
        ))
    }

    pub fn count_between(&self, region: RegionId, after: LogicalTime, up_to: LogicalTime) -> u64 {
        let ts = &self.times[region.0];
        let hi = ts.partition_point(|&x| x <= up_to.0);
        let lo = ts.partition_point(|&x| x <= after.0);
        hi.saturating_sub(lo) as u64
    }
}
