//! Outlier-robustness evaluation over synthetic pools.
//!
//! The median and mean of the clean circles are the references. Outliers are
//! added one at a time and each new central shape is compared to its reference.

use crate::error::{Error, Result};
use crate::gems::{gems_median, GemsConfig, MedianResult, ShapeMode};
use crate::metrics::symmetric_distance;
use crate::raster::{ContourImage, GrayImage};
use crate::synth::SynthSet;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    /// Number of outliers in the pool.
    pub k: usize,
    pub d_median: Option<f64>,
    pub d_mean: Option<f64>,
    /// Failures of either run at this `k`, joined.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub rows: Vec<EvalRow>,
    pub medians: Vec<Option<ContourImage>>,
    pub means: Vec<Option<ContourImage>>,
}

/// Depth thresholds for the two shapes; the mean works in squared units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalHeights {
    pub median: f64,
    pub mean: f64,
}

fn run_curve(set: &SynthSet, k_max: usize, config: &GemsConfig) -> Vec<Result<MedianResult>> {
    (0..=k_max).map(|k| gems_median(&set.pool(k), config)).collect()
}

fn distances(runs: &[Result<MedianResult>]) -> Vec<Result<f64, String>> {
    let reference = match &runs[0] {
        Ok(r) => &r.contour,
        Err(e) => return runs.iter().map(|_| Err(format!("reference failed: {e}"))).collect(),
    };
    runs.iter()
        .map(|r| match r {
            Ok(r) => symmetric_distance(&r.contour, reference)
                .map(|d| d.symmetric)
                .map_err(|e| e.to_string()),
            Err(e) => Err(e.to_string()),
        })
        .collect()
}

/// Median and mean distance to the clean-pool reference for `k = 0..=k_max`.
///
/// `base` supplies every parameter except the mode and height.
pub fn eval_outliers(set: &SynthSet, k_max: usize, base: &GemsConfig, heights: EvalHeights) -> Result<EvalOutcome> {
    if k_max > set.outliers.len() {
        return Err(Error::InvalidParameter(format!(
            "k_max {k_max} exceeds the {} generated outliers",
            set.outliers.len()
        )));
    }
    let median_cfg = GemsConfig {
        h: heights.median,
        mode: ShapeMode::Median,
        ..base.clone()
    };
    let mean_cfg = GemsConfig {
        h: heights.mean,
        mode: ShapeMode::Mean,
        ..base.clone()
    };
    median_cfg.validate()?;
    mean_cfg.validate()?;
    let median_runs = run_curve(set, k_max, &median_cfg);
    let mean_runs = run_curve(set, k_max, &mean_cfg);
    let dm = distances(&median_runs);
    let da = distances(&mean_runs);
    let rows = (0..=k_max)
        .map(|k| {
            let errors: Vec<String> = [("median", &dm[k]), ("mean", &da[k])]
                .iter()
                .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
                .collect();
            EvalRow {
                k,
                d_median: dm[k].as_ref().ok().copied(),
                d_mean: da[k].as_ref().ok().copied(),
                error: (!errors.is_empty()).then(|| errors.join("; ")),
            }
        })
        .collect();
    let keep = |runs: Vec<Result<MedianResult>>| runs.into_iter().map(|r| r.ok().map(|r| r.contour)).collect();
    Ok(EvalOutcome {
        rows,
        medians: keep(median_runs),
        means: keep(mean_runs),
    })
}

/// Inputs in a dim gray with each successive shape drawn one gray level brighter.
pub fn overlay(inputs: &[ContourImage], shapes: &[Option<ContourImage>]) -> Result<GrayImage> {
    let dims = inputs.first().ok_or(Error::EmptyInput)?.dims();
    let mut img = GrayImage::filled(dims, 255, 0)?;
    for c in inputs {
        c.ensure_dims(dims)?;
        for p in c.pixels() {
            img.set(p, 50);
        }
    }
    let steps = shapes.len().max(2) - 1;
    for (k, shape) in shapes.iter().enumerate() {
        let level = (100 + 155 * k / steps) as u16;
        if let Some(s) = shape {
            s.ensure_dims(dims)?;
            for p in s.pixels() {
                img.set(p, level);
            }
        }
    }
    Ok(img)
}
