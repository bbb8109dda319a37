use std::collections::VecDeque;

use super::{Connectivity, ContourImage, Grid, LabelField};

/// Label connected foreground regions; background is 0.
///
/// Labels start at 1 and follow the raster-scan order of each region's first pixel.
pub fn connected_components(image: &ContourImage, connectivity: Connectivity) -> LabelField {
    let dims = image.dims();
    let mut labels: LabelField = Grid::filled(dims, 0);
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..dims.len() {
        if !image.as_slice()[start] || labels.as_slice()[start] != 0 {
            continue;
        }
        next += 1;
        labels.as_mut_slice()[start] = next;
        queue.push_back(dims.pixel(start));
        while let Some(p) = queue.pop_front() {
            for q in connectivity.neighbors(dims, p) {
                if image.get(q) && labels.get(q) == 0 {
                    labels.set(q, next);
                    queue.push_back(q);
                }
            }
        }
    }
    labels
}
