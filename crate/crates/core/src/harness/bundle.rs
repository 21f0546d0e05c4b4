//! Experiment bundles: one directory per run holding `trace`, `snapshot`,
//! `layout`, `report` and `meta`, each a JSON document.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::checker::ConsistencyReport;
use crate::error::Result;
use crate::harness::layout::RegionLayout;
use crate::model::{ExecutionTrace, Snapshot};

pub const TRACE_FILE: &str = "trace";
pub const SNAPSHOT_FILE: &str = "snapshot";
pub const LAYOUT_FILE: &str = "layout";
pub const REPORT_FILE: &str = "report";
pub const META_FILE: &str = "meta";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    /// Producer of the run, e.g. `simulate` or `pivot`.
    pub kind: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub frozen: bool,
    /// Seconds since the Unix epoch. Not part of determinism comparisons.
    pub timestamp: u64,
}

impl RunMeta {
    pub fn new(kind: &str, config: &impl Serialize, seed: u64, frozen: bool) -> Result<Self> {
        Ok(RunMeta {
            kind: kind.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            frozen,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub trace: ExecutionTrace,
    pub snapshot: Snapshot,
    pub layout: RegionLayout,
    pub report: ConsistencyReport,
    pub meta: RunMeta,
}

impl Bundle {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_json(&dir.join(TRACE_FILE), &self.trace)?;
        write_json(&dir.join(SNAPSHOT_FILE), &self.snapshot)?;
        write_json(&dir.join(LAYOUT_FILE), &self.layout)?;
        write_json(&dir.join(REPORT_FILE), &self.report)?;
        write_json(&dir.join(META_FILE), &self.meta)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        Ok(Bundle {
            trace: read_json(&dir.join(TRACE_FILE))?,
            snapshot: read_json(&dir.join(SNAPSHOT_FILE))?,
            layout: read_json(&dir.join(LAYOUT_FILE))?,
            report: read_json(&dir.join(REPORT_FILE))?,
            meta: read_json(&dir.join(META_FILE))?,
        })
    }
}

/// Writes pretty-printed JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
