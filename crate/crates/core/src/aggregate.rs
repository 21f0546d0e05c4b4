//! Summary of inconsistency counts over many runs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Min, max and mean inconsistency count, and how many runs had any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregateStats {
    pub min: u64,
    pub max: u64,
    /// Sum of all counts; the mean is `sum / total_runs`.
    pub sum: u64,
    pub affected: u64,
    pub total_runs: u64,
}

/// Machine-readable form of [`AggregateStats`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub min: u64,
    pub max: u64,
    pub average: f64,
    pub affected: u64,
    pub total_runs: u64,
}

impl AggregateStats {
    pub fn from_counts<I>(counts: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<u64>,
    {
        let mut it = counts.into_iter().map(Into::into);
        let first = it.next().ok_or(Error::Empty("no runs to aggregate"))?;
        let mut s = AggregateStats {
            min: first,
            max: first,
            sum: first,
            affected: u64::from(first > 0),
            total_runs: 1,
        };
        for c in it {
            s.min = s.min.min(c);
            s.max = s.max.max(c);
            s.sum += c;
            s.affected += u64::from(c > 0);
            s.total_runs += 1;
        }
        Ok(s)
    }

    pub fn average(&self) -> f64 {
        self.sum as f64 / self.total_runs as f64
    }

    pub fn record(&self) -> AggregateRecord {
        AggregateRecord {
            min: self.min,
            max: self.max,
            average: self.average(),
            affected: self.affected,
            total_runs: self.total_runs,
        }
    }

    pub fn header() -> String {
        format!(
            "{:>6} {:>6} {:>8} {:>15}",
            "Min", "Max", "Average", "Affected dumps"
        )
    }
}

impl fmt::Display for AggregateStats {
    /// One table row; the average has one decimal place.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:>6} {:>6} {:>8.1} {:>15}",
            self.min,
            self.max,
            self.average(),
            format!("{}/{}", self.affected, self.total_runs)
        )
    }
}
