use std::collections::{BinaryHeap, VecDeque};

use super::QueueItem;
use crate::error::{Error, Result};
use crate::raster::{Connectivity, Grid, LabelField, ScalarField};

/// Minimum depth a regional minimum must have to survive, in field units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HMinimaParams {
    h: f64,
}

impl HMinimaParams {
    pub fn new(h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
        }
        Ok(Self { h })
    }

    pub fn h(&self) -> f64 {
        self.h
    }
}

/// Grayscale reconstruction by erosion of `marker` above `mask` (`marker >= mask`).
///
/// Computed as a min-max propagation: each pixel ends at the smallest value `v`
/// such that some pixel `q` with `marker(q) <= v` reaches it through pixels whose
/// mask is at most `v`.
pub fn reconstruct_by_erosion(
    marker: &ScalarField,
    mask: &ScalarField,
    connectivity: Connectivity,
) -> Result<ScalarField> {
    marker.ensure_dims(mask.dims())?;
    let dims = mask.dims();
    let mut out: Vec<f64> = marker
        .as_slice()
        .iter()
        .zip(mask.as_slice())
        .map(|(&m, &f)| m.max(f))
        .collect();
    let mut heap = BinaryHeap::with_capacity(dims.len());
    for (index, &value) in out.iter().enumerate() {
        heap.push(QueueItem {
            value,
            seq: index as u64,
            index,
        });
    }
    let mut seq = dims.len() as u64;
    while let Some(QueueItem { value, index, .. }) = heap.pop() {
        if value > out[index] {
            continue;
        }
        for q in connectivity.neighbors(dims, dims.pixel(index)) {
            let j = dims.index(q);
            let cand = value.max(mask.as_slice()[j]);
            if cand < out[j] {
                out[j] = cand;
                heap.push(QueueItem {
                    value: cand,
                    seq,
                    index: j,
                });
                seq += 1;
            }
        }
    }
    Grid::from_vec(dims, out)
}

/// Label plateaus whose every neighbor is strictly higher.
///
/// Labels are consecutive from 1 in raster order of each minimum's first pixel.
pub fn regional_minima(field: &ScalarField, connectivity: Connectivity) -> LabelField {
    let dims = field.dims();
    let values = field.as_slice();
    let mut plateau = vec![usize::MAX; dims.len()];
    let mut labels: LabelField = Grid::filled(dims, 0);
    let mut members = Vec::new();
    let mut queue = VecDeque::new();
    let mut next = 0u32;
    for start in 0..dims.len() {
        if plateau[start] != usize::MAX {
            continue;
        }
        let level = values[start];
        members.clear();
        plateau[start] = start;
        queue.push_back(start);
        let mut is_minimum = true;
        while let Some(i) = queue.pop_front() {
            members.push(i);
            for q in connectivity.neighbors(dims, dims.pixel(i)) {
                let j = dims.index(q);
                let v = values[j];
                if v < level {
                    is_minimum = false;
                } else if v == level && plateau[j] == usize::MAX {
                    plateau[j] = start;
                    queue.push_back(j);
                }
            }
        }
        if is_minimum {
            next += 1;
            for &i in &members {
                labels.as_mut_slice()[i] = next;
            }
        }
    }
    labels
}

/// Regional minima of the field after suppressing every minimum shallower than `h`.
///
/// A constant field yields one region covering the whole frame.
pub fn h_minima_basins(
    field: &ScalarField,
    params: HMinimaParams,
    connectivity: Connectivity,
) -> Result<LabelField> {
    field.ensure_finite()?;
    let raised = field.map(|&v| v + params.h);
    let filled = reconstruct_by_erosion(&raised, field, connectivity)?;
    Ok(regional_minima(&filled, connectivity))
}
