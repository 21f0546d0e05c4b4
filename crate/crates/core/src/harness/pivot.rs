//! Multi-threaded pivot workload.
//!
//! Worker threads repeatedly pick a random region, update it ("remove"), wait
//! a short while and update it again ("reinsert"). Every update increments the
//! global time, appends to the one-dimensional counter array and stores the new
//! time in the region, all under one lock. An acquirer copies the regions one
//! at a time in physical address order; each copy holds the same lock, but the
//! lock is released between copies so workers can interleave. A frozen run
//! holds the lock for the whole sweep instead. The counter array is captured
//! after the last copy.
//!
//! Thread scheduling makes runs non-reproducible; only the random choices are
//! seeded.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gca::{CounterArray, OneDimGca};
use crate::harness::layout::{layout_for_simulation, Clustering, LayoutConfig, RegionLayout};
use crate::model::{ExecutionTrace, LogicalTime, RegionId, RegionValue, Snapshot};

/// Low activity in the reference experiment.
pub const LOW_ACTIVITY_THREADS: usize = 1;
/// High activity in the reference experiment.
pub const HIGH_ACTIVITY_THREADS: usize = 8;

/// Delay drawn between two steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Pause {
    None,
    Fixed { micros: u64 },
    Uniform { min_micros: u64, max_micros: u64 },
}

impl Pause {
    fn draw(self, rng: &mut impl Rng) -> Option<Duration> {
        let micros = match self {
            Pause::None => return None,
            Pause::Fixed { micros } => micros,
            Pause::Uniform {
                min_micros,
                max_micros,
            } => rng.gen_range(min_micros..=max_micros.max(min_micros)),
        };
        (micros > 0).then(|| Duration::from_micros(micros))
    }

    fn sleep(self, rng: &mut impl Rng) {
        if let Some(d) = self.draw(rng) {
            thread::sleep(d);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopyOrder {
    /// Ascending page address.
    Address,
    /// Seeded random permutation.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotConfig {
    pub region_count: usize,
    pub worker_threads: usize,
    /// Total events the workers may perform before going idle.
    pub mutation_ops: u64,
    /// Events that must have happened before the acquisition starts.
    pub acquire_after: u64,
    /// Delay between two region copies.
    pub copy_pause: Pause,
    /// Delay between a worker's remove and reinsert.
    pub worker_wait: Pause,
    pub copy_order: CopyOrder,
    pub clustering: Clustering,
    /// Hard limit on counter array entries; `None` grows without bound.
    pub gca_capacity: Option<usize>,
    pub seed: u64,
}

impl Default for PivotConfig {
    fn default() -> Self {
        PivotConfig {
            region_count: 100,
            worker_threads: HIGH_ACTIVITY_THREADS,
            mutation_ops: 1_000_000,
            acquire_after: 200,
            copy_pause: Pause::Fixed { micros: 100 },
            worker_wait: Pause::Uniform {
                min_micros: 0,
                max_micros: 1000,
            },
            copy_order: CopyOrder::Address,
            clustering: Clustering::Bimodal { gap: 1000 },
            gca_capacity: None,
            seed: 0,
        }
    }
}

impl PivotConfig {
    pub fn validate(&self) -> Result<()> {
        if self.region_count == 0 {
            return Err(Error::InvalidConfig(
                "region_count must be at least 1".into(),
            ));
        }
        if self.worker_threads == 0 {
            return Err(Error::InvalidConfig(
                "worker_threads must be at least 1".into(),
            ));
        }
        if self.acquire_after > self.mutation_ops {
            return Err(Error::InvalidConfig(format!(
                "acquire_after ({}) exceeds mutation_ops ({})",
                self.acquire_after, self.mutation_ops
            )));
        }
        Ok(())
    }

    pub fn layout(&self) -> RegionLayout {
        layout_for_simulation(
            &LayoutConfig {
                region_count: self.region_count,
                clustering: self.clustering,
            },
            self.seed,
        )
    }
}

#[derive(Debug, Clone)]
pub struct PivotRun {
    pub trace: ExecutionTrace,
    pub snapshot: Snapshot,
    pub gca: OneDimGca,
    pub layout: RegionLayout,
    /// Region values when the counter array was captured.
    pub final_values: Vec<RegionValue>,
}

struct Shared {
    gca: OneDimGca,
    regions: Vec<RegionValue>,
    error: Option<Error>,
}

struct Pivot {
    state: Mutex<Shared>,
    stop: AtomicBool,
    budget: u64,
}

impl Pivot {
    fn lock(&self) -> MutexGuard<'_, Shared> {
        // A panicking worker leaves the data intact; keep going.
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// One event on `region`. Returns false when the worker should exit.
    fn mutate(&self, region: RegionId) -> bool {
        let mut s = self.lock();
        if s.error.is_some() || s.gca.now().get() >= self.budget {
            return false;
        }
        match s.gca.record_event(region) {
            Ok(t) => {
                s.regions[region.0] = RegionValue::written_at(t);
                true
            }
            Err(e) => {
                s.error = Some(e);
                false
            }
        }
    }

    fn worker(&self, region_count: usize, wait: Pause, mut rng: ChaCha8Rng) {
        while !self.stop.load(Ordering::Relaxed) {
            let r = RegionId(rng.gen_range(0..region_count));
            if !self.mutate(r) {
                break;
            }
            wait.sleep(&mut rng);
            if !self.mutate(r) {
                break;
            }
        }
    }
}

fn worker_seed(seed: u64, worker: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(worker as u64 + 1)
}

/// Runs the pivot workload once and returns what the acquirer saw.
pub fn run_pivot(config: &PivotConfig, frozen: bool) -> Result<PivotRun> {
    config.validate()?;
    let n = config.region_count;
    let layout = config.layout();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let order = match config.copy_order {
        CopyOrder::Address => layout.address_order(),
        CopyOrder::Random => {
            let mut o: Vec<RegionId> = (0..n).map(RegionId).collect();
            for i in (1..o.len()).rev() {
                o.swap(i, rng.gen_range(0..=i));
            }
            o
        }
    };
    let gca = match config.gca_capacity {
        Some(cap) => OneDimGca::with_capacity_limit(n, cap),
        None => OneDimGca::new(n),
    };
    let pivot = Arc::new(Pivot {
        state: Mutex::new(Shared {
            gca,
            regions: vec![RegionValue(0); n],
            error: None,
        }),
        stop: AtomicBool::new(false),
        budget: config.mutation_ops,
    });

    let mut handles = Vec::with_capacity(config.worker_threads);
    for w in 0..config.worker_threads {
        let p = Arc::clone(&pivot);
        let wait = config.worker_wait;
        let wrng = ChaCha8Rng::seed_from_u64(worker_seed(config.seed, w));
        let spawned = thread::Builder::new()
            .name(format!("pivot-worker-{w}"))
            .spawn(move || p.worker(n, wait, wrng));
        match spawned {
            Ok(h) => handles.push(h),
            Err(e) => {
                pivot.stop.store(true, Ordering::Relaxed);
                join_all(handles)?;
                return Err(Error::Thread(e.to_string()));
            }
        }
    }

    let acquired = acquire(&pivot, config, &order, frozen, &mut rng, &handles);
    pivot.stop.store(true, Ordering::Relaxed);
    let joined = join_all(handles);
    let (snapshot, gca, final_values) = acquired?;
    joined?;
    if let Some(e) = pivot.lock().error.take() {
        return Err(e);
    }
    Ok(PivotRun {
        trace: gca.to_trace(),
        snapshot,
        gca,
        layout,
        final_values,
    })
}

fn acquire(
    pivot: &Pivot,
    config: &PivotConfig,
    order: &[RegionId],
    frozen: bool,
    rng: &mut ChaCha8Rng,
    workers: &[thread::JoinHandle<()>],
) -> Result<(Snapshot, OneDimGca, Vec<RegionValue>)> {
    // Wait for the warm-up, or for the workers to run out of budget.
    let started = Instant::now();
    loop {
        {
            let s = pivot.lock();
            if s.gca.now().get() >= config.acquire_after || s.error.is_some() {
                break;
            }
        }
        if workers.iter().all(|h| h.is_finished()) {
            break;
        }
        if started.elapsed() > Duration::from_secs(60) {
            return Err(Error::Thread("workers made no progress".into()));
        }
        thread::sleep(Duration::from_micros(50));
    }

    let n = config.region_count;
    let mut values = vec![RegionValue(0); n];
    let mut acq_times = vec![LogicalTime::ZERO; n];
    if frozen {
        let s = pivot.lock();
        for (k, &r) in order.iter().enumerate() {
            values[r.0] = s.regions[r.0];
            acq_times[r.0] = s.gca.now();
            if k + 1 < order.len() {
                config.copy_pause.sleep(rng);
            }
        }
    } else {
        for (k, &r) in order.iter().enumerate() {
            {
                let s = pivot.lock();
                values[r.0] = s.regions[r.0];
                acq_times[r.0] = s.gca.now();
            }
            if k + 1 < order.len() {
                config.copy_pause.sleep(rng);
            }
        }
    }

    let mut s = pivot.lock();
    if let Some(e) = s.error.take() {
        return Err(e);
    }
    Ok((
        Snapshot {
            values,
            acq_times: Some(acq_times),
        },
        s.gca.clone(),
        s.regions.clone(),
    ))
}

fn join_all(handles: Vec<thread::JoinHandle<()>>) -> Result<()> {
    let mut failed = 0;
    for h in handles {
        if h.join().is_err() {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(Error::Thread(format!("{failed} worker(s) panicked")));
    }
    Ok(())
}
