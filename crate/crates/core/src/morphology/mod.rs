//! Basin detection, convex hulls, and marker-controlled watershed.

mod hminima;
mod hull;
mod watershed;

pub use hminima::{h_minima_basins, reconstruct_by_erosion, regional_minima, HMinimaParams};
pub use hull::{convex_hull, convex_hull_mask, hull_mask_from_points};
pub use watershed::{build_markers, extract_line, thin_lines, watershed, MarkerSet};

use std::cmp::Ordering;

/// Priority-queue entry ordered by value, then by insertion sequence (FIFO on ties).
#[derive(Debug, Clone, Copy)]
struct QueueItem {
    value: f64,
    seq: u64,
    index: usize,
}

impl PartialEq for QueueItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueItem {}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueItem {
    // reversed so `BinaryHeap` pops the smallest value, earliest sequence first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
