//! Producers of snapshots: a deterministic simulator, a threaded pivot
//! workload, synthetic page layouts, and on-disk experiment bundles.

pub mod bundle;
pub mod layout;
pub mod pivot;
pub mod sim;

pub use bundle::{Bundle, RunMeta};
pub use layout::{
    layout_for_simulation, spread_metrics, Clustering, LayoutConfig, RegionLayout, SpreadMetrics,
};
pub use pivot::{run_pivot, CopyOrder, Pause, PivotConfig, PivotRun};
pub use sim::{replay, schedule, simulate, AcquisitionPlan, Simulation, Step, TraceGenConfig};
