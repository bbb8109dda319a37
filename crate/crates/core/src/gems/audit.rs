use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MedianResult;
use crate::edt::{squared_edt, AccumulatedField};
use crate::error::{Error, Result};
use crate::metrics::contour_cost;
use crate::raster::{Connectivity, ContourImage, Pixel};

/// A local change to a closed contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    Identity,
    /// Grow (`amount > 0`) or shrink (`amount < 0`) the enclosed region by
    /// `|amount|` pixels, everywhere or only within `window = (center, radius)`.
    Offset {
        amount: i32,
        window: Option<(Pixel, f64)>,
    },
}

/// The contour together with everything it encloses: all pixels that cannot
/// be reached from the frame border through 4-steps over background pixels.
pub fn enclosed_region(contour: &ContourImage) -> ContourImage {
    let dims = contour.dims();
    let mut outside = ContourImage::empty(dims);
    let mut queue = VecDeque::new();
    for i in 0..dims.len() {
        let p = dims.pixel(i);
        if dims.on_border(p) && !contour.get(p) {
            outside.set(p, true);
            queue.push_back(p);
        }
    }
    while let Some(p) = queue.pop_front() {
        for q in Connectivity::Four.neighbors(dims, p) {
            if !contour.get(q) && !outside.get(q) {
                outside.set(q, true);
                queue.push_back(q);
            }
        }
    }
    outside.map(|&o| !o)
}

/// Inner 4-boundary of a region: its pixels with a 4-neighbor outside it.
fn boundary(region: &ContourImage) -> Result<ContourImage> {
    let dims = region.dims();
    let mut out = ContourImage::empty(dims);
    for p in region.pixels() {
        if dims.on_border(p) {
            return Err(Error::OutOfFrame);
        }
        if Connectivity::Four.neighbors(dims, p).any(|q| !region.get(q)) {
            out.set(p, true);
        }
    }
    out.ensure_foreground()?;
    Ok(out)
}

/// Apply a perturbation and return the boundary of the changed region.
///
/// Fails with `OutOfFrame` when the changed region reaches the frame border.
pub fn perturb(contour: &ContourImage, perturbation: &Perturbation) -> Result<ContourImage> {
    let (amount, window) = match *perturbation {
        Perturbation::Identity => return Ok(contour.clone()),
        Perturbation::Offset { amount, window } => (amount, window),
    };
    if amount == 0 {
        return Ok(contour.clone());
    }
    let dims = contour.dims();
    let region = enclosed_region(contour);
    let in_window = |p: Pixel| match window {
        None => true,
        Some((c, radius)) => {
            let (dr, dc) = (p.0 as f64 - c.0 as f64, p.1 as f64 - c.1 as f64);
            dr * dr + dc * dc <= radius * radius
        }
    };
    let k2 = (amount as i64 * amount as i64) as u64;
    let changed = if amount > 0 {
        let to_region = squared_edt(&region)?;
        ContourImage::from_fn(dims, |p| region.get(p) || (to_region.get(p) <= k2 && in_window(p)))
    } else {
        let complement = region.map(|&r| !r);
        let to_outside = squared_edt(&complement)?;
        ContourImage::from_fn(dims, |p| region.get(p) && (to_outside.get(p) > k2 || !in_window(p)))
    };
    boundary(&changed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub median_cost: f64,
    /// Normalized cost of each evaluated perturbation.
    pub costs: Vec<f64>,
    /// Trials discarded because the perturbation left the frame or vanished.
    pub skipped: usize,
}

impl AuditReport {
    pub fn not_lower(&self) -> usize {
        self.costs.iter().filter(|&&c| c >= self.median_cost).count()
    }

    /// Fraction of evaluated perturbations whose cost is at least the median's.
    pub fn ratio(&self) -> f64 {
        if self.costs.is_empty() {
            return 1.0;
        }
        self.not_lower() as f64 / self.costs.len() as f64
    }
}

fn random_perturbation(rng: &mut ChaCha8Rng, pixels: &[Pixel], extent: f64) -> Perturbation {
    let magnitude = rng.gen_range(1..=3);
    let amount = if rng.gen_bool(0.5) { magnitude } else { -magnitude };
    let window = if rng.gen_bool(0.5) {
        None
    } else {
        let center = pixels[rng.gen_range(0..pixels.len())];
        let radius = rng.gen_range(4.0..(0.5 * extent).max(5.0));
        Some((center, radius))
    };
    Perturbation::Offset { amount, window }
}

/// Compare a result against random local offsets of itself.
///
/// Each trial grows or shrinks the enclosed region by 1 to 3 pixels, either
/// globally or within a random disk centered on the contour, and records the
/// normalized cost of the new boundary over `accumulated`.
pub fn local_optimality_audit(
    result: &MedianResult,
    accumulated: &AccumulatedField,
    trials: usize,
    seed: u64,
) -> Result<AuditReport> {
    let pixels: Vec<Pixel> = result.contour.pixels().collect();
    if pixels.is_empty() {
        return Err(Error::EmptyContour);
    }
    let (lo_r, hi_r) = pixels.iter().fold((usize::MAX, 0), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (lo_c, hi_c) = pixels.iter().fold((usize::MAX, 0), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let extent = (hi_r - lo_r).max(hi_c - lo_c) as f64;
    let median_cost = contour_cost(&result.contour, accumulated)?.normalized;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AuditReport {
        median_cost,
        costs: Vec::with_capacity(trials),
        skipped: 0,
    };
    for _ in 0..trials {
        let perturbation = random_perturbation(&mut rng, &pixels, extent);
        match perturb(&result.contour, &perturbation) {
            Ok(candidate) => report.costs.push(contour_cost(&candidate, accumulated)?.normalized),
            Err(Error::OutOfFrame | Error::EmptyContour) => report.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{draw_closed_polyline, GridDims};

    fn square(d: GridDims, lo: i64, hi: i64) -> ContourImage {
        let mut c = ContourImage::empty(d);
        draw_closed_polyline(&mut c, &[(lo, lo), (lo, hi), (hi, hi), (hi, lo)]);
        c
    }

    #[test]
    fn region_of_square_is_filled() {
        let d = GridDims::new(20, 20).unwrap();
        let r = enclosed_region(&square(d, 5, 14));
        assert_eq!(r.count(), 100);
        assert!(r.get((9, 9)) && !r.get((4, 9)));
    }

    #[test]
    fn identity_returns_contour() {
        let d = GridDims::new(20, 20).unwrap();
        let c = square(d, 5, 14);
        assert_eq!(perturb(&c, &Perturbation::Identity).unwrap(), c);
        let zero = Perturbation::Offset { amount: 0, window: None };
        assert_eq!(perturb(&c, &zero).unwrap(), c);
    }

    #[test]
    fn global_offsets_move_square_edges() {
        let d = GridDims::new(30, 30).unwrap();
        let c = square(d, 10, 19);
        let grow = perturb(&c, &Perturbation::Offset { amount: 1, window: None }).unwrap();
        // a one-pixel Euclidean dilation does not reach the diagonal corners
        assert!(grow.get((9, 15)) && grow.get((15, 20)) && grow.get((9, 10)));
        assert!(!grow.get((9, 9)));
        assert!(!grow.get((10, 15)));
        let shrink = perturb(&c, &Perturbation::Offset { amount: -1, window: None }).unwrap();
        assert_eq!(shrink, square(d, 11, 18));
    }

    #[test]
    fn leaving_the_frame_is_an_error() {
        let d = GridDims::new(12, 12).unwrap();
        let c = square(d, 1, 10);
        assert!(matches!(
            perturb(&c, &Perturbation::Offset { amount: 2, window: None }),
            Err(Error::OutOfFrame)
        ));
    }

    #[test]
    fn windowed_offset_is_local() {
        let d = GridDims::new(40, 40).unwrap();
        let c = square(d, 10, 29);
        let p = Perturbation::Offset {
            amount: 2,
            window: Some(((10, 20), 4.0)),
        };
        let out = perturb(&c, &p).unwrap();
        assert!(out.get((8, 20)));
        assert!(out.get((29, 20)) && out.get((20, 10)));
        assert!(!out.get((10, 20)));
    }
}
