use std::collections::VecDeque;

use super::edges::{junction_mask, EdgeSegment};
use super::GemsConfig;
use crate::error::{Error, Result};
use crate::raster::{Connectivity, ContourImage, GrayImage};

/// Presence masks of the input pool, each dilated by the presence radius.
#[derive(Debug, Clone)]
pub struct SupportPool {
    union: ContourImage,
    inputs: Vec<ContourImage>,
}

impl SupportPool {
    pub fn new(contours: &[ContourImage], dilation: usize) -> Result<Self> {
        let first = contours.first().ok_or(Error::EmptyInput)?;
        let mut union = ContourImage::empty(first.dims());
        let mut inputs = Vec::with_capacity(contours.len());
        for c in contours {
            let d = c.dilate_square(dilation);
            union = union.union(&d)?;
            inputs.push(d);
        }
        Ok(Self { union, inputs })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn union(&self) -> &ContourImage {
        &self.union
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneReason {
    /// No pixel lies near any input.
    Unsupported,
    /// Few inputs draw it and it runs over background-level intensity.
    Background,
}

/// Evidence gathered for one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSupport {
    /// Fraction of its pixels near the union of inputs.
    pub support_fraction: f64,
    /// Fraction of inputs that lie near at least half of its pixels.
    pub pool_fraction: f64,
    pub mean_intensity: Option<f64>,
    pub removed: Option<PruneReason>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PruneStats {
    pub unsupported: usize,
    pub background: usize,
    pub kept: usize,
    pub background_level: Option<u16>,
    pub segments: Vec<SegmentSupport>,
}

fn fraction(count: usize, total: usize) -> f64 {
    count as f64 / total as f64
}

fn assess(segment: &EdgeSegment, pool: &SupportPool, image: Option<&GrayImage>, background: Option<u16>, config: &GemsConfig) -> SegmentSupport {
    let n = segment.len();
    let near_union = segment.pixels.iter().filter(|&&p| pool.union.get(p)).count();
    let drawn_by = pool
        .inputs
        .iter()
        .filter(|m| 2 * segment.pixels.iter().filter(|&&p| m.get(p)).count() >= n)
        .count();
    let mean_intensity = image.map(|img| segment.pixels.iter().map(|&p| img.get(p) as f64).sum::<f64>() / n as f64);
    let pool_fraction = fraction(drawn_by, pool.len());
    let removed = if near_union == 0 {
        Some(PruneReason::Unsupported)
    } else {
        match (mean_intensity, background) {
            (Some(mean), Some(bg))
                if pool_fraction < config.edge_count_threshold
                    && (mean - bg as f64).abs() <= config.background_tolerance =>
            {
                Some(PruneReason::Background)
            }
            _ => None,
        }
    };
    SegmentSupport {
        support_fraction: fraction(near_union, n),
        pool_fraction,
        mean_intensity,
        removed,
    }
}

/// Remove segments the input pool does not support.
///
/// A segment goes when none of its pixels is near any input, or when fewer
/// than `edge_count_threshold` of the inputs draw it and its mean intensity is
/// within `background_tolerance` of the image's most common gray level. The
/// background test needs an image and is skipped without one. A cluster of
/// junction pixels survives when it touches a surviving segment.
pub fn prune_edges(
    segments: &[EdgeSegment],
    line: &ContourImage,
    pool: &SupportPool,
    image: Option<&GrayImage>,
    config: &GemsConfig,
) -> Result<(ContourImage, PruneStats)> {
    let dims = line.dims();
    pool.union.ensure_dims(dims)?;
    if let Some(img) = image {
        line.ensure_dims(img.dims())?;
    }
    let background = image.map(GrayImage::histogram_mode);
    let mut out = ContourImage::empty(dims);
    let mut stats = PruneStats {
        background_level: background,
        ..PruneStats::default()
    };
    for seg in segments {
        let support = assess(seg, pool, image, background, config);
        match support.removed {
            Some(PruneReason::Unsupported) => stats.unsupported += 1,
            Some(PruneReason::Background) => stats.background += 1,
            None => {
                stats.kept += 1;
                for &p in &seg.pixels {
                    out.set(p, true);
                }
            }
        }
        stats.segments.push(support);
    }

    let junctions = junction_mask(line);
    let mut visited = ContourImage::empty(dims);
    for start in junctions.pixels() {
        if visited.get(start) {
            continue;
        }
        let mut cluster = Vec::new();
        let mut queue = VecDeque::from([start]);
        visited.set(start, true);
        let mut touches = false;
        while let Some(p) = queue.pop_front() {
            cluster.push(p);
            for q in Connectivity::Eight.neighbors(dims, p) {
                if junctions.get(q) {
                    if !visited.get(q) {
                        visited.set(q, true);
                        queue.push_back(q);
                    }
                } else if out.get(q) {
                    touches = true;
                }
            }
        }
        if touches {
            for p in cluster {
                out.set(p, true);
            }
        }
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gems::decompose_edges;
    use crate::raster::{draw_segment, GridDims};

    fn dims() -> GridDims {
        GridDims::new(21, 21).unwrap()
    }

    /// A T: a vertical stem meeting a horizontal bar at (10, 10).
    fn tee() -> ContourImage {
        let mut line = ContourImage::empty(dims());
        draw_segment(&mut line, (10, 0), (10, 20));
        draw_segment(&mut line, (10, 10), (20, 10));
        line
    }

    fn bar() -> ContourImage {
        let mut c = ContourImage::empty(dims());
        draw_segment(&mut c, (10, 0), (10, 20));
        c
    }

    #[test]
    fn unsupported_stem_removed() {
        let line = tee();
        let segs = decompose_edges(&line);
        assert_eq!(segs.len(), 3);
        let pool = SupportPool::new(&[bar(), bar()], 0).unwrap();
        let (out, stats) = prune_edges(&segs, &line, &pool, None, &GemsConfig::consensus(1.0)).unwrap();
        assert_eq!(stats.unsupported, 1);
        assert_eq!(stats.kept, 2);
        assert_eq!(out, bar());
    }

    fn stem_pool(with_stem: usize, total: usize) -> SupportPool {
        let mut inputs = Vec::new();
        for k in 0..total {
            inputs.push(if k < with_stem { tee() } else { bar() });
        }
        SupportPool::new(&inputs, 1).unwrap()
    }

    fn flat_image(level: u16) -> GrayImage {
        GrayImage::filled(dims(), 255, level).unwrap()
    }

    #[test]
    fn rarely_drawn_background_edge_removed() {
        let line = tee();
        let segs = decompose_edges(&line);
        let img = flat_image(30);
        let (out, stats) = prune_edges(&segs, &line, &stem_pool(1, 10), Some(&img), &GemsConfig::consensus(1.0)).unwrap();
        assert_eq!(stats.background, 1);
        assert_eq!(stats.background_level, Some(30));
        assert_eq!(out, bar());
    }

    #[test]
    fn bright_edge_kept_despite_low_count() {
        let line = tee();
        let segs = decompose_edges(&line);
        let mut img = flat_image(30);
        for r in 11..21 {
            img.set((r, 10), 200);
        }
        let (out, stats) = prune_edges(&segs, &line, &stem_pool(1, 10), Some(&img), &GemsConfig::consensus(1.0)).unwrap();
        assert_eq!(stats.background, 0);
        assert_eq!(out, line);
    }

    #[test]
    fn frequently_drawn_edge_kept() {
        let line = tee();
        let segs = decompose_edges(&line);
        let img = flat_image(30);
        let (out, stats) = prune_edges(&segs, &line, &stem_pool(3, 10), Some(&img), &GemsConfig::consensus(1.0)).unwrap();
        assert_eq!(stats.kept, 3);
        assert_eq!(out, line);
        assert!(stats.segments.iter().all(|s| s.support_fraction == 1.0));
    }

    #[test]
    fn isolated_junction_dropped() {
        let line = tee();
        let segs = decompose_edges(&line);
        let far = ContourImage::from_pixels(dims(), [(0, 0)]).unwrap();
        let pool = SupportPool::new(&[far], 0).unwrap();
        let (out, stats) = prune_edges(&segs, &line, &pool, None, &GemsConfig::consensus(1.0)).unwrap();
        assert_eq!(stats.unsupported, 3);
        assert!(!out.has_foreground());
    }
}
