//! The end-to-end median/mean shape pipeline.
//!
//! ```text
//! contours ─▶ accumulate ─▶ invert ─▶ h-minima basins ─┐
//!        └──▶ convex hull ───────────────────────────┴▶ markers ─▶ watershed ─▶ line
//! ```
//!
//! The augmented consensus mode drops the outside-hull marker (inputs may
//! touch the frame) and repairs the resulting over-segmentation by pruning
//! line segments that the pool of inputs does not support.

mod audit;
mod edges;
mod prune;

pub use audit::{enclosed_region, local_optimality_audit, perturb, AuditReport, Perturbation};
pub use edges::{decompose_edges, junction_mask, EdgeSegment};
pub use prune::{prune_edges, PruneReason, PruneStats, SegmentSupport, SupportPool};

use crate::edt::{accumulate, edt, invert, AccumulatedField, AccumulationMode};
use crate::error::{Error, Result};
use crate::metrics::{contour_cost, symmetric_distance_with, CurveDistance};
use crate::morphology::{
    build_markers, convex_hull_mask, extract_line, h_minima_basins, thin_lines, watershed, HMinimaParams,
    MarkerSet,
};
use crate::raster::{Connectivity, ContourImage, GrayImage, LabelField, ScalarField};

/// Which central shape to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeMode {
    /// Minimizes summed distances.
    Median,
    /// Minimizes summed squared distances.
    Mean,
}

impl ShapeMode {
    pub fn accumulation(self) -> AccumulationMode {
        match self {
            ShapeMode::Median => AccumulationMode::Linear,
            ShapeMode::Mean => AccumulationMode::Squared,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GemsConfig {
    /// Minimum basin depth, in units of the accumulated field.
    pub h: f64,
    pub mode: ShapeMode,
    pub augmented: bool,
    /// Pool fraction below which a background-level edge is pruned.
    pub edge_count_threshold: f64,
    /// Pixels within this Chebyshev radius of an input count as present in it.
    pub presence_dilation: usize,
    pub background_tolerance: f64,
}

impl GemsConfig {
    pub fn median(h: f64) -> Self {
        Self {
            h,
            mode: ShapeMode::Median,
            augmented: false,
            edge_count_threshold: 0.20,
            presence_dilation: 1,
            background_tolerance: 10.0,
        }
    }

    pub fn mean(h: f64) -> Self {
        Self {
            mode: ShapeMode::Mean,
            ..Self::median(h)
        }
    }

    pub fn consensus(h: f64) -> Self {
        Self {
            augmented: true,
            ..Self::median(h)
        }
    }

    pub fn validate(&self) -> Result<HMinimaParams> {
        if !(self.edge_count_threshold > 0.0 && self.edge_count_threshold <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "edge count threshold {} not in (0, 1]",
                self.edge_count_threshold
            )));
        }
        if !(self.background_tolerance >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "background tolerance {} is negative",
                self.background_tolerance
            )));
        }
        HMinimaParams::new(self.h)
    }
}

/// Counters describing one pipeline run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub basin_count: usize,
    pub marker_count: usize,
    pub line_pixels: usize,
    pub segments: usize,
    pub pruned_unsupported: usize,
    pub pruned_background: usize,
}

impl Diagnostics {
    pub fn pruned_edges(&self) -> usize {
        self.pruned_unsupported + self.pruned_background
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianResult {
    pub contour: ContourImage,
    /// Linear `d_g` from the result to each input, in input order.
    pub per_input_distance: Vec<CurveDistance>,
    /// Accumulated field summed over the result's pixels.
    pub total_cost: f64,
    /// `total_cost` per result pixel.
    pub normalized_cost: f64,
    pub h_used: f64,
    pub mode: ShapeMode,
    pub diagnostics: Diagnostics,
}

/// Intermediate rasters of a run, for debugging dumps.
#[derive(Debug, Clone)]
pub struct PipelineTrace {
    pub accumulated: AccumulatedField,
    pub inverted: ScalarField,
    pub basins: LabelField,
    pub markers: MarkerSet,
    pub labels: LabelField,
    pub hull: Option<ContourImage>,
}

fn check_inputs(contours: &[ContourImage]) -> Result<()> {
    let first = contours.first().ok_or(Error::EmptyInput)?;
    for c in contours {
        first.ensure_dims(c.dims())?;
        c.ensure_foreground()?;
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, U>(items: &[T], f: impl Fn(&T) -> U) -> Vec<U> {
    items.iter().map(f).collect()
}

fn per_input_distances(line: &ContourImage, contours: &[ContourImage]) -> Result<Vec<CurveDistance>> {
    let line_distance = edt(line)?;
    par_map(contours, |c| {
        let cd = edt(c)?;
        symmetric_distance_with(line, &line_distance, c, &cd)
    })
    .into_iter()
    .collect()
}

fn finish(
    line: ContourImage,
    contours: &[ContourImage],
    accumulated: &AccumulatedField,
    config: &GemsConfig,
    diagnostics: Diagnostics,
) -> Result<MedianResult> {
    let cost = contour_cost(&line, accumulated)?;
    Ok(MedianResult {
        per_input_distance: per_input_distances(&line, contours)?,
        contour: line,
        total_cost: cost.raw,
        normalized_cost: cost.normalized,
        h_used: config.h,
        mode: config.mode,
        diagnostics,
    })
}

/// Run the pipeline and keep every intermediate raster.
///
/// `image` is only consulted in augmented mode.
pub fn run_traced(
    contours: &[ContourImage],
    image: Option<&GrayImage>,
    config: &GemsConfig,
) -> Result<(MedianResult, PipelineTrace)> {
    let params = config.validate()?;
    check_inputs(contours)?;
    if let Some(img) = image {
        contours[0].ensure_dims(img.dims())?;
    }
    let accumulated = accumulate(contours, config.mode.accumulation())?;
    let inverted = invert(&accumulated.field);
    let basins = h_minima_basins(&inverted, params, Connectivity::Four)?;
    let basin_count = basins.region_count();

    let (markers, hull) = if config.augmented {
        (MarkerSet::from_basins(basins.clone()), None)
    } else {
        let hull = convex_hull_mask(contours)?;
        (build_markers(&basins, &hull)?, Some(hull))
    };
    let marker_count = markers.region_count();
    if marker_count < 2 {
        return Err(Error::NoCohesiveMedian {
            h: config.h,
            reason: "fewer than two markers survive; try a smaller h",
        });
    }
    let labels = thin_lines(&watershed(&inverted, &markers, Connectivity::Four)?);
    let mut line = extract_line(&labels);
    if let Some(hull) = &hull {
        line = line.intersection(hull)?;
    }
    let mut diagnostics = Diagnostics {
        basin_count,
        marker_count,
        line_pixels: line.count(),
        ..Diagnostics::default()
    };

    if config.augmented {
        let segments = decompose_edges(&line);
        diagnostics.segments = segments.len();
        let pool = SupportPool::new(contours, config.presence_dilation)?;
        let (pruned, stats) = prune_edges(&segments, &line, &pool, image, config)?;
        diagnostics.pruned_unsupported = stats.unsupported;
        diagnostics.pruned_background = stats.background;
        line = pruned;
    }
    if !line.has_foreground() {
        return Err(Error::NoCohesiveMedian {
            h: config.h,
            reason: "the watershed produced no line",
        });
    }
    let result = finish(line, contours, &accumulated, config, diagnostics)?;
    let trace = PipelineTrace {
        accumulated,
        inverted,
        basins,
        markers,
        labels,
        hull,
    };
    Ok((result, trace))
}

/// Geometric median shape (or mean shape when `config.mode` is `Mean`).
pub fn gems_median(contours: &[ContourImage], config: &GemsConfig) -> Result<MedianResult> {
    if config.augmented {
        return Err(Error::InvalidParameter(
            "augmented mode needs an image; use gems_consensus".into(),
        ));
    }
    run_traced(contours, None, config).map(|(r, _)| r)
}

/// Mean shape: the same pipeline over squared distances.
pub fn gems_mean(contours: &[ContourImage], config: &GemsConfig) -> Result<MedianResult> {
    let config = GemsConfig {
        mode: ShapeMode::Mean,
        ..config.clone()
    };
    gems_median(contours, &config)
}

/// Consensus of frame-touching segmentations with edge pruning.
pub fn gems_consensus(contours: &[ContourImage], image: &GrayImage, config: &GemsConfig) -> Result<MedianResult> {
    let config = GemsConfig {
        augmented: true,
        ..config.clone()
    };
    run_traced(contours, Some(image), &config).map(|(r, _)| r)
}

impl MedianResult {
    /// Human-readable summary of the run.
    pub fn diagnostics_text(&self) -> String {
        let d = &self.diagnostics;
        let mut s = String::new();
        s.push_str(&format!("mode: {:?}\n", self.mode));
        s.push_str(&format!("h: {}\n", self.h_used));
        s.push_str(&format!("basins: {}\n", d.basin_count));
        s.push_str(&format!("markers: {}\n", d.marker_count));
        s.push_str(&format!("line pixels: {}\n", d.line_pixels));
        s.push_str(&format!("contour pixels: {}\n", self.contour.count()));
        if d.segments > 0 {
            s.push_str(&format!("segments: {}\n", d.segments));
            s.push_str(&format!("pruned (unsupported): {}\n", d.pruned_unsupported));
            s.push_str(&format!("pruned (background): {}\n", d.pruned_background));
        }
        s.push_str(&format!("total cost: {:.6}\n", self.total_cost));
        s.push_str(&format!("normalized cost: {:.6}\n", self.normalized_cost));
        s
    }
}

#[cfg(test)]
mod tests;
