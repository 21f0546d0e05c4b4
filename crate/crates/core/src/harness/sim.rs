//! Deterministic single-threaded simulator of mutation and acquisition.
//!
//! A simulation is a schedule of [`Step`]s: events that write the current
//! logical time into a region, and copies that read one region into the
//! snapshot. Random schedules are derived from a seed; hand-written schedules
//! can be replayed directly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gca::{CounterArray, OneDimGca};
use crate::harness::layout::RegionLayout;
use crate::model::{ExecutionTrace, LogicalTime, RegionId, RegionValue, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Event(RegionId),
    Copy(RegionId),
}

/// Order in which regions are copied, and how many random events run before
/// each copy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcquisitionPlan {
    pub order: Vec<RegionId>,
    pub events_between: Vec<u64>,
}

impl AcquisitionPlan {
    pub fn new(order: Vec<RegionId>, events_between: Vec<u64>) -> Result<Self> {
        let plan = AcquisitionPlan {
            order,
            events_between,
        };
        plan.validate(plan.order.len())?;
        Ok(plan)
    }

    /// Copies regions in id order with nothing in between: a frozen system.
    pub fn frozen(region_count: usize) -> Self {
        AcquisitionPlan {
            order: (0..region_count).map(RegionId).collect(),
            events_between: vec![0; region_count],
        }
    }

    /// Random order, with `0..=max_between` events before each copy.
    pub fn random(region_count: usize, max_between: u64, rng: &mut impl Rng) -> Self {
        let mut order: Vec<RegionId> = (0..region_count).map(RegionId).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let events_between = (0..region_count)
            .map(|_| rng.gen_range(0..=max_between))
            .collect();
        AcquisitionPlan {
            order,
            events_between,
        }
    }

    /// Sweeps regions in address order; the number of events before each copy
    /// grows with the page gap crossed to reach it.
    pub fn from_layout(layout: &RegionLayout, pages_per_event: u64) -> Self {
        let order = layout.address_order();
        let mut prev: Option<u64> = None;
        let events_between = order
            .iter()
            .map(|r| {
                let page = layout.page_addresses[r.0];
                let gap = prev.map_or(0, |p| page - p);
                prev = Some(page);
                gap / pages_per_event.max(1)
            })
            .collect();
        AcquisitionPlan {
            order,
            events_between,
        }
    }

    pub fn validate(&self, region_count: usize) -> Result<()> {
        if self.order.len() != region_count {
            return Err(Error::InvalidPlan(format!(
                "order lists {} regions, expected {region_count}",
                self.order.len()
            )));
        }
        if self.events_between.len() != self.order.len() {
            return Err(Error::InvalidPlan(format!(
                "{} event counts for {} copies",
                self.events_between.len(),
                self.order.len()
            )));
        }
        let mut seen = vec![false; region_count];
        for &r in &self.order {
            r.check(region_count)
                .map_err(|_| Error::InvalidPlan(format!("unknown region {r}")))?;
            if std::mem::replace(&mut seen[r.0], true) {
                return Err(Error::InvalidPlan(format!("region {r} copied twice")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceGenConfig {
    pub region_count: usize,
    /// Events before acquisition starts.
    pub warmup_events: u64,
    /// Events after the last copy.
    pub trailing_events: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub trace: ExecutionTrace,
    pub snapshot: Snapshot,
    pub gca: OneDimGca,
}

/// Expands a plan into a concrete schedule; event regions come from `seed`.
pub fn schedule(config: &TraceGenConfig, plan: &AcquisitionPlan, seed: u64) -> Result<Vec<Step>> {
    if config.region_count == 0 {
        return Err(Error::InvalidConfig(
            "region_count must be at least 1".into(),
        ));
    }
    plan.validate(config.region_count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.region_count;
    let mut random_events = |k: u64, steps: &mut Vec<Step>| {
        for _ in 0..k {
            steps.push(Step::Event(RegionId(rng.gen_range(0..n))));
        }
    };
    let mut steps = Vec::new();
    random_events(config.warmup_events, &mut steps);
    for (&r, &k) in plan.order.iter().zip(&plan.events_between) {
        random_events(k, &mut steps);
        steps.push(Step::Copy(r));
    }
    random_events(config.trailing_events, &mut steps);
    Ok(steps)
}

/// Runs a schedule. Every region must be copied exactly once.
pub fn replay(region_count: usize, steps: &[Step]) -> Result<Simulation> {
    if region_count == 0 {
        return Err(Error::InvalidConfig(
            "region_count must be at least 1".into(),
        ));
    }
    let mut gca = OneDimGca::new(region_count);
    let mut memory = vec![RegionValue(0); region_count];
    let mut values: Vec<Option<RegionValue>> = vec![None; region_count];
    let mut acq_times = vec![LogicalTime::ZERO; region_count];
    for &step in steps {
        match step {
            Step::Event(r) => {
                let t = gca.record_event(r)?;
                memory[r.0] = RegionValue::written_at(t);
            }
            Step::Copy(r) => {
                r.check(region_count)?;
                if values[r.0].is_some() {
                    return Err(Error::InvalidPlan(format!("region {r} copied twice")));
                }
                values[r.0] = Some(memory[r.0]);
                acq_times[r.0] = gca.now();
            }
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::InvalidPlan(format!("region r{i} never copied"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Simulation {
        trace: gca.to_trace(),
        snapshot: Snapshot {
            values,
            acq_times: Some(acq_times),
        },
        gca,
    })
}

pub fn simulate(config: &TraceGenConfig, plan: &AcquisitionPlan, seed: u64) -> Result<Simulation> {
    replay(config.region_count, &schedule(config, plan, seed)?)
}
