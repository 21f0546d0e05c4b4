//! Synthetic physical placement of regions and the spread metrics computed
//! over it.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RegionId;

/// Gaps of at most this many pages count as near.
pub const NEAR_PAGES: u64 = 10;

/// Page number of every region, plus a trailing entry for the counter array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionLayout {
    pub page_addresses: Vec<u64>,
}

impl RegionLayout {
    pub fn new(page_addresses: Vec<u64>) -> Self {
        RegionLayout { page_addresses }
    }

    /// Number of regions, not counting the counter array slot.
    pub fn region_count(&self) -> usize {
        self.page_addresses.len().saturating_sub(1)
    }

    /// Regions sorted by page address, i.e. a physical-order sweep.
    pub fn address_order(&self) -> Vec<RegionId> {
        let mut order: Vec<RegionId> = (0..self.region_count()).map(RegionId).collect();
        order.sort_by_key(|r| (self.page_addresses[r.0], r.0));
        order
    }

    fn sorted(&self) -> Result<Vec<u64>> {
        if self.page_addresses.is_empty() {
            return Err(Error::Empty("layout"));
        }
        let mut pages = self.page_addresses.clone();
        pages.sort_unstable();
        if let Some(w) = pages.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidLayout(format!("page {} used twice", w[0])));
        }
        Ok(pages)
    }

    /// Gaps between consecutive sorted addresses.
    pub fn neighbor_distances(&self) -> Result<Vec<u64>> {
        Ok(self.sorted()?.windows(2).map(|w| w[1] - w[0]).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpreadMetrics {
    pub range_pages: u64,
    pub near_distances: u64,
    pub adjacent_distances: u64,
    pub max_distance: u64,
}

pub fn spread_metrics(layout: &RegionLayout) -> Result<SpreadMetrics> {
    let pages = layout.sorted()?;
    let gaps = layout.neighbor_distances()?;
    let m = SpreadMetrics {
        range_pages: pages[pages.len() - 1] - pages[0],
        near_distances: gaps.iter().filter(|&&g| g <= NEAR_PAGES).count() as u64,
        adjacent_distances: gaps.iter().filter(|&&g| g == 1).count() as u64,
        max_distance: gaps.iter().copied().max().unwrap_or(0),
    };
    assert!(m.adjacent_distances <= m.near_distances);
    assert!(m.near_distances <= gaps.len() as u64);
    assert!(m.max_distance <= m.range_pages);
    Ok(m)
}

/// Header matching [`SpreadMetrics::row`].
pub fn spread_header() -> String {
    format!(
        "{:>4} {:>15} {:>16} {:>15} {:>15} {:>12}",
        "#",
        "Inconsistencies",
        "Range (in pages)",
        "Distances <=10",
        "Distances =1",
        "Max distance"
    )
}

impl SpreadMetrics {
    pub fn row(&self, label: &str, inconsistencies: Option<usize>) -> String {
        let inc = inconsistencies.map_or_else(|| "-".to_string(), |n| n.to_string());
        format!(
            "{:>4} {:>15} {:>16} {:>15} {:>15} {:>12}",
            label,
            inc,
            Grouped(self.range_pages),
            self.near_distances,
            self.adjacent_distances,
            Grouped(self.max_distance)
        )
    }
}

/// Thousands-grouped integer.
struct Grouped(u64);

impl fmt::Display for Grouped {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.0.to_string();
        let mut out = String::with_capacity(digits.len() + digits.len() / 3);
        for (i, c) in digits.chars().enumerate() {
            if i > 0 && (digits.len() - i).is_multiple_of(3) {
                out.push(',');
            }
            out.push(c);
        }
        f.pad(&out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Clustering {
    /// Consecutive pages.
    Packed,
    /// Constant gap between neighbors.
    Uniform { gap: u64 },
    /// Small gaps of 1..=10 pages with one large gap at a seeded position.
    Bimodal { gap: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub region_count: usize,
    pub clustering: Clustering,
}

/// Places `region_count` regions plus the counter array on synthetic pages.
/// Region ids are shuffled over the slots so address order differs from id
/// order.
pub fn layout_for_simulation(config: &LayoutConfig, seed: u64) -> RegionLayout {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots = config.region_count + 1;
    let base: u64 = rng.gen_range(0x1000..0x10_0000);
    let gaps: Vec<u64> = match config.clustering {
        Clustering::Packed => vec![1; slots - 1],
        Clustering::Uniform { gap } => vec![gap.max(1); slots - 1],
        Clustering::Bimodal { gap } => {
            let mut g: Vec<u64> = (0..slots - 1)
                .map(|_| rng.gen_range(1..=NEAR_PAGES))
                .collect();
            if !g.is_empty() {
                let at = rng.gen_range(0..g.len());
                g[at] = gap.max(1);
            }
            g
        }
    };
    let mut pages = Vec::with_capacity(slots);
    let mut page = base;
    pages.push(page);
    for g in gaps {
        page += g;
        pages.push(page);
    }
    // The counter array keeps the last slot; regions are permuted over the rest.
    let gca_page = pages.pop().expect("at least one slot");
    let mut ids: Vec<usize> = (0..config.region_count).collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.gen_range(0..=i));
    }
    let mut addresses = vec![0; config.region_count];
    for (slot, &id) in ids.iter().enumerate() {
        addresses[id] = pages[slot];
    }
    addresses.push(gca_page);
    RegionLayout::new(addresses)
}
