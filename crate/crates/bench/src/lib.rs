//! Workload builders shared by the benchmarks.

use coexist_core::harness::{simulate, AcquisitionPlan, Simulation, TraceGenConfig};
use coexist_core::{CounterArray, OneDimGca, RegionId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A counter array of `len` uniformly random events over `regions` regions.
pub fn random_list(regions: usize, len: usize, seed: u64) -> OneDimGca {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = OneDimGca::new(regions);
    for _ in 0..len {
        g.record_event(RegionId(rng.gen_range(0..regions)))
            .expect("unbounded array");
    }
    g
}

/// A smeared acquisition: `warmup` events, then up to `max_between` events
/// before every copy.
pub fn smeared(regions: usize, warmup: u64, max_between: u64, seed: u64) -> Simulation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = AcquisitionPlan::random(regions, max_between, &mut rng);
    let cfg = TraceGenConfig {
        region_count: regions,
        warmup_events: warmup,
        trailing_events: 0,
    };
    simulate(&cfg, &plan, seed).expect("valid plan")
}
