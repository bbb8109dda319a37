use std::collections::BinaryHeap;

use super::QueueItem;
use crate::error::{Error, Result};
use crate::raster::{Connectivity, ContourImage, Grid, LabelField, ScalarField};

/// Seed regions for the watershed.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerSet {
    pub labels: LabelField,
    /// Label of the region outside the convex hull, or 0 when there is none.
    pub outside_label: u32,
}

impl MarkerSet {
    /// Markers taken directly from a basin labeling, without an outside region.
    pub fn from_basins(basins: LabelField) -> Self {
        Self {
            labels: basins,
            outside_label: 0,
        }
    }

    pub fn region_count(&self) -> usize {
        self.labels.region_count()
    }
}

/// Combine basins with one extra marker covering every pixel outside `hull`.
///
/// A basin that reaches outside the hull is not kept as a separate marker: its
/// outside pixels join the outside region and its inside pixels are left to the
/// flood, so that distinct markers never touch.
pub fn build_markers(basins: &LabelField, hull: &ContourImage) -> Result<MarkerSet> {
    basins.ensure_dims(hull.dims())?;
    if hull.as_slice().iter().all(|&h| h) {
        return Ok(MarkerSet::from_basins(basins.clone()));
    }
    let max = basins.max_label() as usize;
    let mut escapes = vec![false; max + 1];
    for (&l, &inside) in basins.as_slice().iter().zip(hull.as_slice()) {
        if !inside {
            escapes[l as usize] = true;
        }
    }
    let outside_label = max as u32 + 1;
    let labels = basins
        .as_slice()
        .iter()
        .zip(hull.as_slice())
        .map(|(&l, &inside)| match (inside, escapes[l as usize]) {
            (false, _) => outside_label,
            (true, true) => 0,
            (true, false) => l,
        })
        .collect();
    Ok(MarkerSet {
        labels: Grid::from_vec(basins.dims(), labels)?,
        outside_label,
    })
}

const FREE: u8 = 0;
const QUEUED: u8 = 1;
const DONE: u8 = 2;

/// Marker-controlled priority flood (Meyer) with watershed lines.
///
/// Pixels are flooded in order of increasing field value, ties first-in
/// first-out, with marker neighbors seeded in raster order. A popped pixel
/// whose labeled neighbors all carry one label takes that label and queues its
/// free neighbors; a pixel that sees two or more labels becomes a line pixel
/// (label 0) and stays one. Pixels the flood never reaches are also set to 0.
pub fn watershed(field: &ScalarField, markers: &MarkerSet, connectivity: Connectivity) -> Result<LabelField> {
    field.ensure_dims(markers.labels.dims())?;
    if markers.labels.max_label() == 0 {
        return Err(Error::NoMarkers);
    }
    let dims = field.dims();
    let values = field.as_slice();
    let mut labels = markers.labels.clone();
    let mut state: Vec<u8> = labels
        .as_slice()
        .iter()
        .map(|&l| if l > 0 { DONE } else { FREE })
        .collect();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for i in 0..dims.len() {
        if labels.as_slice()[i] == 0 {
            continue;
        }
        for q in connectivity.neighbors(dims, dims.pixel(i)) {
            let j = dims.index(q);
            if state[j] == FREE {
                state[j] = QUEUED;
                heap.push(QueueItem {
                    value: values[j],
                    seq,
                    index: j,
                });
                seq += 1;
            }
        }
    }
    while let Some(QueueItem { index, .. }) = heap.pop() {
        let p = dims.pixel(index);
        let mut seen = 0u32;
        let mut conflict = false;
        for q in connectivity.neighbors(dims, p) {
            let j = dims.index(q);
            let l = labels.as_slice()[j];
            if state[j] == DONE && l > 0 {
                if seen == 0 {
                    seen = l;
                } else if seen != l {
                    conflict = true;
                }
            }
        }
        state[index] = DONE;
        if conflict || seen == 0 {
            labels.as_mut_slice()[index] = 0;
            continue;
        }
        labels.as_mut_slice()[index] = seen;
        for q in connectivity.neighbors(dims, p) {
            let j = dims.index(q);
            if state[j] == FREE {
                state[j] = QUEUED;
                heap.push(QueueItem {
                    value: values[j],
                    seq,
                    index: j,
                });
                seq += 1;
            }
        }
    }
    Ok(labels)
}

/// Hand line pixels back to a region when only that one region touches them
/// (4-neighborhood), repeating until stable.
///
/// Each pass decides every pixel from the previous pass's labels, and drops a
/// reassignment when a 4-neighbor would be reassigned to a different region in
/// the same pass. The result is therefore independent of scan order, and the
/// remaining line still separates every pair of distinct regions.
pub fn thin_lines(labels: &LabelField) -> LabelField {
    let dims = labels.dims();
    let mut out = labels.clone();
    let mut tentative = vec![0u32; dims.len()];
    loop {
        for (i, t) in tentative.iter_mut().enumerate() {
            *t = 0;
            if out.as_slice()[i] != 0 {
                continue;
            }
            let mut only = 0u32;
            for q in Connectivity::Four.neighbors(dims, dims.pixel(i)) {
                let l = out.get(q);
                if l == 0 {
                    continue;
                }
                if only == 0 {
                    only = l;
                } else if only != l {
                    only = u32::MAX;
                }
            }
            if only != u32::MAX {
                *t = only;
            }
        }
        let mut changed = false;
        for i in 0..dims.len() {
            let t = tentative[i];
            if t == 0 {
                continue;
            }
            let clash = Connectivity::Four.neighbors(dims, dims.pixel(i)).any(|q| {
                let u = tentative[dims.index(q)];
                u != 0 && u != t
            });
            if !clash {
                out.as_mut_slice()[i] = t;
                changed = true;
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Watershed-line pixels (label 0) as a contour image.
pub fn extract_line(labels: &LabelField) -> ContourImage {
    labels.map(|&l| l == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{connected_components, GridDims, Pixel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::VecDeque;

    fn dims(w: usize, h: usize) -> GridDims {
        GridDims::new(w, h).unwrap()
    }

    fn markers_at(d: GridDims, seeds: &[Pixel]) -> MarkerSet {
        let mut labels: LabelField = Grid::filled(d, 0);
        for (k, &p) in seeds.iter().enumerate() {
            labels.set(p, k as u32 + 1);
        }
        MarkerSet::from_basins(labels)
    }

    /// Adjacent pixels with two distinct non-zero labels.
    fn touching_regions(labels: &LabelField) -> bool {
        let d = labels.dims();
        (0..d.len()).any(|i| {
            let l = labels.as_slice()[i];
            l > 0
                && Connectivity::Four
                    .neighbors(d, d.pixel(i))
                    .any(|q| labels.get(q) > 0 && labels.get(q) != l)
        })
    }

    #[test]
    fn single_marker_floods_everything() {
        let d = dims(10, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Grid::from_fn(d, |_| rng.gen_range(0.0..10.0));
        let out = watershed(&f, &markers_at(d, &[(3, 3)]), Connectivity::Four).unwrap();
        assert!(out.as_slice().iter().all(|&l| l == 1));
        assert_eq!(extract_line(&out).count(), 0);
    }

    #[test]
    fn no_markers_rejected() {
        let d = dims(4, 4);
        let f = ScalarField::zeros(d);
        assert!(matches!(
            watershed(&f, &MarkerSet::from_basins(Grid::filled(d, 0)), Connectivity::Four),
            Err(Error::NoMarkers)
        ));
    }

    #[test]
    fn symmetric_pits_split_on_center_column() {
        let d = dims(17, 16);
        let pits = [(8usize, 3usize), (8, 13)];
        let f = Grid::from_fn(d, |(r, c)| {
            pits.iter()
                .map(|&(pr, pc)| ((r as f64 - pr as f64).powi(2) + (c as f64 - pc as f64).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min)
        });
        let out = watershed(&f, &markers_at(d, &pits), Connectivity::Four).unwrap();
        let line = extract_line(&out);
        let expected: Vec<Pixel> = (0..16).map(|r| (r, 8)).collect();
        assert_eq!(line.pixels().collect::<Vec<_>>(), expected);
        assert!((0..16).all(|r| out.get((r, 0)) == 1 && out.get((r, 16)) == 2));
    }

    /// Regions reachable from each marker without crossing the line; the labeling
    /// is consistent when each region is exactly its marker's reachable set.
    fn reachability_oracle(labels: &LabelField, markers: &MarkerSet) -> bool {
        let d = labels.dims();
        for l in markers.labels.distinct_labels() {
            let mut seen = vec![false; d.len()];
            let mut queue: VecDeque<usize> = (0..d.len()).filter(|&i| markers.labels.as_slice()[i] == l).collect();
            for &i in &queue {
                seen[i] = true;
            }
            while let Some(i) = queue.pop_front() {
                for q in Connectivity::Four.neighbors(d, d.pixel(i)) {
                    let j = d.index(q);
                    if !seen[j] && labels.as_slice()[j] != 0 {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            for i in 0..d.len() {
                if seen[i] != (labels.as_slice()[i] == l) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn random_fields_with_three_markers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = dims(24, 24);
        for _ in 0..50 {
            let f = Grid::from_fn(d, |_| rng.gen_range(0..20) as f64);
            let mut seeds = Vec::new();
            while seeds.len() < 3 {
                let p: Pixel = (rng.gen_range(0..24), rng.gen_range(0..24));
                // markers must not touch each other
                if seeds.iter().all(|s: &Pixel| s.0.abs_diff(p.0) + s.1.abs_diff(p.1) > 1) {
                    seeds.push(p);
                }
            }
            let m = markers_at(d, &seeds);
            let out = watershed(&f, &m, Connectivity::Four).unwrap();
            assert!(!touching_regions(&out));
            assert!(reachability_oracle(&out, &m));
            for (k, &s) in seeds.iter().enumerate() {
                assert_eq!(out.get(s), k as u32 + 1);
            }
            let thin = thin_lines(&out);
            assert_eq!(thin_lines(&out.rot90()), thin.rot90());
            assert_eq!(thin_lines(&out.flip_horizontal()), thin.flip_horizontal());
            assert!(!touching_regions(&thin));
            assert!(reachability_oracle(&thin, &m));
            for p in extract_line(&thin).pixels() {
                let mut distinct: Vec<u32> = Connectivity::Eight
                    .neighbors(d, p)
                    .map(|q| thin.get(q))
                    .filter(|&l| l > 0)
                    .collect();
                distinct.sort_unstable();
                distinct.dedup();
                let has_line_neighbor = Connectivity::Eight.neighbors(d, p).any(|q| thin.get(q) == 0);
                assert!(distinct.len() >= 2 || has_line_neighbor, "isolated line pixel {p:?}");
            }
        }
    }

    #[test]
    fn regions_are_connected_and_contain_markers() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = dims(30, 20);
        for _ in 0..20 {
            let f = Grid::from_fn(d, |_| rng.gen_range(0.0..5.0));
            let m = markers_at(d, &[(2, 2), (17, 27), (10, 15), (0, 29)]);
            let out = watershed(&f, &m, Connectivity::Four).unwrap();
            for l in out.distinct_labels() {
                let region = out.map(|&x| x == l);
                assert_eq!(connected_components(&region, Connectivity::Four).max_label(), 1);
            }
        }
    }

    #[test]
    fn build_markers_full_hull_is_identity() {
        let d = dims(8, 8);
        let basins = markers_at(d, &[(1, 1), (5, 6)]).labels;
        let hull = ContourImage::filled(d, true);
        let m = build_markers(&basins, &hull).unwrap();
        assert_eq!(m.labels, basins);
        assert_eq!(m.outside_label, 0);
    }

    #[test]
    fn build_markers_without_basins() {
        let d = dims(12, 12);
        let basins: LabelField = Grid::filled(d, 0);
        let hull = ContourImage::from_fn(d, |(r, c)| (3..9).contains(&r) && (3..9).contains(&c));
        let m = build_markers(&basins, &hull).unwrap();
        assert_eq!(m.outside_label, 1);
        assert_eq!(m.region_count(), 1);
        let outside = m.labels.map(|&l| l == 1);
        assert_eq!(outside, hull.map(|&h| !h));
        assert_eq!(connected_components(&outside, Connectivity::Four).max_label(), 1);
    }

    #[test]
    fn build_markers_absorbs_outside_basin() {
        let d = dims(32, 32);
        let mut basins: LabelField = Grid::filled(d, 0);
        for r in 14..17 {
            for c in 14..17 {
                basins.set((r, c), 1);
            }
        }
        basins.set((1, 1), 2);
        basins.set((1, 2), 2);
        let hull = ContourImage::from_fn(d, |(r, c)| (6..26).contains(&r) && (6..26).contains(&c));
        let m = build_markers(&basins, &hull).unwrap();
        assert_eq!(m.region_count(), 2);
        assert_eq!(m.outside_label, 3);
        assert_eq!(m.labels.get((15, 15)), 1);
        assert_eq!(m.labels.get((1, 1)), 3);
        assert!(m.labels.as_slice().iter().all(|&l| l != 2));
    }

    #[test]
    fn extract_line_of_column() {
        let d = dims(5, 4);
        let labels = Grid::from_fn(d, |(_, c)| match c {
            0 | 1 => 1,
            2 => 0,
            _ => 2,
        });
        let line = extract_line(&labels);
        assert_eq!(line.pixels().collect::<Vec<_>>(), vec![(0, 2), (1, 2), (2, 2), (3, 2)]);
        let none: LabelField = Grid::filled(d, 1);
        assert!(!extract_line(&none).has_foreground());
    }
}
