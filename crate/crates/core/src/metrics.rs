//! Curve-to-curve distances, the contour cost functional, and the point
//! geometric median.
//!
//! Arc length is discretized as one unit per contour pixel, so the directed
//! distance from `source` to `target` is the mean over source pixels of the
//! target's distance transform.

use crate::edt::{edt, AccumulatedField};
use crate::error::{Error, Result};
use crate::exact::ExactSum;
use crate::raster::{ContourImage, ScalarField};

/// Directed and symmetric distances between two contours, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveDistance {
    /// `d(a, b)`: mean distance from pixels of `a` to `b`.
    pub forward: f64,
    /// `d(b, a)`.
    pub backward: f64,
    /// `(forward + backward) / 2`.
    pub symmetric: f64,
}

impl CurveDistance {
    fn new(forward: f64, backward: f64) -> Self {
        Self {
            forward,
            backward,
            // addition commutes bitwise, so swapping the pair gives the same value
            symmetric: (forward + backward) / 2.0,
        }
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.backward, self.forward)
    }
}

/// Mean of `target_distance` over the foreground of `source`.
pub fn directed_distance_to_field(source: &ContourImage, target_distance: &ScalarField) -> Result<f64> {
    source.ensure_dims(target_distance.dims())?;
    let n = source.count();
    if n == 0 {
        return Err(Error::EmptyContour);
    }
    let sum: ExactSum = source.pixels().map(|p| target_distance.get(p)).collect();
    Ok(sum.value() / n as f64)
}

/// Mean distance from the pixels of `source` to the curve `target`.
pub fn directed_distance(source: &ContourImage, target: &ContourImage) -> Result<f64> {
    source.ensure_dims(target.dims())?;
    source.ensure_foreground()?;
    directed_distance_to_field(source, &edt(target)?)
}

/// Both directed distances and their average.
pub fn symmetric_distance(a: &ContourImage, b: &ContourImage) -> Result<CurveDistance> {
    a.ensure_dims(b.dims())?;
    a.ensure_foreground()?;
    b.ensure_foreground()?;
    let (da, db) = (edt(a)?, edt(b)?);
    symmetric_distance_with(a, &da, b, &db)
}

/// [`symmetric_distance`] with precomputed distance transforms.
pub fn symmetric_distance_with(
    a: &ContourImage,
    a_distance: &ScalarField,
    b: &ContourImage,
    b_distance: &ScalarField,
) -> Result<CurveDistance> {
    Ok(CurveDistance::new(
        directed_distance_to_field(a, b_distance)?,
        directed_distance_to_field(b, a_distance)?,
    ))
}

/// Accumulated cost of a candidate contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourCost {
    /// Sum of the accumulated field over the candidate's pixels.
    pub raw: f64,
    /// `raw / length`: the mean per-pixel cost, i.e. the sum of directed
    /// distances from the candidate to every input when the field is linear.
    pub normalized: f64,
    /// Candidate pixel count.
    pub length: usize,
}

pub fn contour_cost(candidate: &ContourImage, accumulated: &AccumulatedField) -> Result<ContourCost> {
    candidate.ensure_dims(accumulated.dims())?;
    let length = candidate.count();
    if length == 0 {
        return Err(Error::EmptyContour);
    }
    let raw: ExactSum = candidate.pixels().map(|p| accumulated.field.get(p)).collect();
    let raw = raw.value();
    Ok(ContourCost {
        raw,
        normalized: raw / length as f64,
        length,
    })
}

/// A point in the plane; `x` is the column axis and `y` the row axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Sum of Euclidean distances from `p` to every anchor.
pub fn weiszfeld_objective(anchors: &[Point2], p: Point2) -> f64 {
    anchors.iter().map(|a| a.distance(&p)).sum()
}

/// Result of a Weiszfeld run, with the objective after every iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct WeiszfeldRun {
    pub median: Point2,
    pub objectives: Vec<f64>,
}

/// Geometric median of points by Weiszfeld iteration.
pub fn weiszfeld_median(anchors: &[Point2], tol: f64, max_iter: usize) -> Result<Point2> {
    weiszfeld_run(anchors, tol, max_iter).map(|r| r.median)
}

/// Weiszfeld iteration starting from the centroid, stopping once a step is
/// shorter than `tol` or after `max_iter` steps.
///
/// An iterate within `tol` of an anchor is treated as sitting on it: the
/// anchor is returned when it satisfies the optimality condition, otherwise the
/// step follows the anchor-aware update of Vardi and Zhang, which keeps the
/// objective non-increasing.
pub fn weiszfeld_run(anchors: &[Point2], tol: f64, max_iter: usize) -> Result<WeiszfeldRun> {
    if anchors.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(a) = anchors.iter().find(|a| !a.x.is_finite() || !a.y.is_finite()) {
        return Err(Error::NonFinite(if a.x.is_finite() { a.y } else { a.x }));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let n = anchors.len() as f64;
    let mut x = Point2::new(
        anchors.iter().map(|a| a.x).sum::<f64>() / n,
        anchors.iter().map(|a| a.y).sum::<f64>() / n,
    );
    let mut objectives = vec![weiszfeld_objective(anchors, x)];
    for _ in 0..max_iter {
        let mut coincident = 0.0;
        let mut snap = None;
        let (mut wx, mut wy, mut wsum) = (0.0, 0.0, 0.0);
        let (mut rx, mut ry) = (0.0, 0.0);
        for a in anchors {
            let d = a.distance(&x);
            if d < tol {
                coincident += 1.0;
                snap.get_or_insert(*a);
                continue;
            }
            wx += a.x / d;
            wy += a.y / d;
            wsum += 1.0 / d;
            rx += (a.x - x.x) / d;
            ry += (a.y - x.y) / d;
        }
        if wsum == 0.0 {
            // every anchor coincides with the iterate
            x = snap.unwrap_or(x);
            objectives.push(weiszfeld_objective(anchors, x));
            break;
        }
        let target = Point2::new(wx / wsum, wy / wsum);
        let next = if coincident > 0.0 {
            let r = rx.hypot(ry);
            if r <= coincident {
                // the anchor is optimal
                x = snap.expect("coincident anchor recorded");
                objectives.push(weiszfeld_objective(anchors, x));
                break;
            }
            let keep = coincident / r;
            Point2::new(
                (1.0 - keep) * target.x + keep * x.x,
                (1.0 - keep) * target.y + keep * x.y,
            )
        } else {
            target
        };
        let step = next.distance(&x);
        x = next;
        objectives.push(weiszfeld_objective(anchors, x));
        if step < tol {
            break;
        }
    }
    Ok(WeiszfeldRun { median: x, objectives })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edt::{accumulate, AccumulationMode};
    use crate::raster::{draw_closed_polyline, Grid, GridDims, Pixel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dims(w: usize, h: usize) -> GridDims {
        GridDims::new(w, h).unwrap()
    }

    fn pairwise_directed(a: &ContourImage, b: &ContourImage) -> f64 {
        let bp: Vec<Pixel> = b.pixels().collect();
        let mins: Vec<f64> = a
            .pixels()
            .map(|(r, c)| {
                bp.iter()
                    .map(|&(br, bc)| ((r as f64 - br as f64).powi(2) + (c as f64 - bc as f64).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        mins.iter().sum::<f64>() / mins.len() as f64
    }

    fn random_loop(rng: &mut ChaCha8Rng, d: GridDims) -> ContourImage {
        let mut img = ContourImage::empty(d);
        let k = rng.gen_range(3..8);
        let (cr, cc) = (d.height as f64 / 2.0, d.width as f64 / 2.0);
        let verts: Vec<(i64, i64)> = (0..k)
            .map(|i| {
                let t = i as f64 / k as f64 * std::f64::consts::TAU;
                let rad = rng.gen_range(5.0..(d.width.min(d.height) as f64 / 2.0 - 2.0));
                ((cr + rad * t.sin()) as i64, (cc + rad * t.cos()) as i64)
            })
            .collect();
        draw_closed_polyline(&mut img, &verts);
        img
    }

    #[test]
    fn self_distance_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_loop(&mut rng, dims(40, 40));
        assert_eq!(directed_distance(&a, &a).unwrap(), 0.0);
        let d = symmetric_distance(&a, &a).unwrap();
        assert_eq!((d.forward, d.backward, d.symmetric), (0.0, 0.0, 0.0));
    }

    #[test]
    fn matches_pairwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let a = random_loop(&mut rng, dims(64, 64));
            let b = random_loop(&mut rng, dims(64, 64));
            let fast = directed_distance(&a, &b).unwrap();
            assert!((fast - pairwise_directed(&a, &b)).abs() < 1e-9);
        }
    }

    #[test]
    fn translated_copy_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_loop(&mut rng, dims(80, 80));
        let b = a.translate(7, -3).unwrap();
        let d = symmetric_distance(&a, &b).unwrap();
        let oracle = (pairwise_directed(&a, &b) + pairwise_directed(&b, &a)) / 2.0;
        assert!((d.symmetric - oracle).abs() < 1e-9);
        assert!(d.symmetric > 0.0);
    }

    #[test]
    fn symmetric_is_order_independent_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let a = random_loop(&mut rng, dims(50, 50));
            let b = random_loop(&mut rng, dims(50, 50));
            let ab = symmetric_distance(&a, &b).unwrap();
            let ba = symmetric_distance(&b, &a).unwrap();
            assert_eq!(ab.symmetric.to_bits(), ba.symmetric.to_bits());
            assert_eq!(ab, ba.reversed());
        }
    }

    #[test]
    fn errors() {
        let a = ContourImage::from_pixels(dims(4, 4), [(1, 1)]).unwrap();
        let empty = ContourImage::empty(dims(4, 4));
        let other = ContourImage::from_pixels(dims(5, 4), [(1, 1)]).unwrap();
        assert!(matches!(directed_distance(&empty, &a), Err(Error::EmptyContour)));
        assert!(matches!(directed_distance(&a, &empty), Err(Error::EmptyContour)));
        assert!(matches!(directed_distance(&a, &other), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn cost_examples() {
        let img = ContourImage::from_pixels(dims(6, 6), [(1, 1), (4, 4)]).unwrap();
        let acc = accumulate(std::slice::from_ref(&img), AccumulationMode::Linear).unwrap();
        let on = contour_cost(&img, &acc).unwrap();
        assert_eq!((on.raw, on.length), (0.0, 2));
        let single = ContourImage::from_pixels(dims(6, 6), [(3, 1)]).unwrap();
        let c = contour_cost(&single, &acc).unwrap();
        assert_eq!(c.raw, acc.field.get((3, 1)));
        assert_eq!(c.normalized, c.raw);
    }

    #[test]
    fn cost_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = dims(30, 20);
        let field = Grid::from_fn(d, |_| rng.gen_range(0.0..100.0));
        let acc = AccumulatedField {
            field: field.clone(),
            count: 1,
            mode: AccumulationMode::Linear,
        };
        let cand = ContourImage::from_fn(d, |_| rng.gen_bool(0.2));
        let direct: f64 = cand.pixels().map(|p| field.get(p)).sum();
        let cost = contour_cost(&cand, &acc).unwrap();
        assert!((cost.raw - direct).abs() < 1e-9);
        assert!((cost.normalized - direct / cand.count() as f64).abs() < 1e-9);
    }

    #[test]
    fn weiszfeld_identical_anchors() {
        let p = Point2::new(3.5, -2.0);
        assert_eq!(weiszfeld_median(&[p; 4], 1e-9, 100).unwrap(), p);
        assert_eq!(weiszfeld_median(&[p], 1e-9, 100).unwrap(), p);
    }

    #[test]
    fn weiszfeld_square() {
        let anchors = [
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 2.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
        ];
        let m = weiszfeld_median(&anchors, 1e-12, 1000).unwrap();
        assert!(m.distance(&Point2::new(1.0, 1.0)) < 1e-9);
    }

    #[test]
    fn weiszfeld_starting_on_non_optimal_anchor() {
        // centroid is (1, 0), an anchor, but the median is the heavy cluster at (3, 0)
        let anchors = [
            Point2::new(-6.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(4.0, 0.0),
        ];
        let m = weiszfeld_median(&anchors, 1e-10, 10_000).unwrap();
        assert!(m.distance(&Point2::new(3.0, 0.0)) < 1e-6, "{m:?}");
    }

    #[test]
    fn weiszfeld_rejects_non_finite() {
        assert!(weiszfeld_median(&[Point2::new(f64::NAN, 0.0)], 1e-6, 10).is_err());
        assert!(weiszfeld_median(&[], 1e-6, 10).is_err());
    }

    /// Coarse grid search followed by progressively finer local grids.
    fn grid_search(anchors: &[Point2]) -> Point2 {
        let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
        for a in anchors {
            lo_x = lo_x.min(a.x);
            hi_x = hi_x.max(a.x);
            lo_y = lo_y.min(a.y);
            hi_y = hi_y.max(a.y);
        }
        let mut best = Point2::new(lo_x, lo_y);
        let mut step = ((hi_x - lo_x).max(hi_y - lo_y) / 200.0).max(1e-3);
        let (mut cx, mut cy, mut half) = ((lo_x + hi_x) / 2.0, (lo_y + hi_y) / 2.0, (hi_x - lo_x).max(hi_y - lo_y) / 2.0 + step);
        while step >= 1e-4 {
            let k = (half / step).ceil() as i64;
            let mut best_val = f64::INFINITY;
            for i in -k..=k {
                for j in -k..=k {
                    let p = Point2::new(cx + i as f64 * step, cy + j as f64 * step);
                    let v = weiszfeld_objective(anchors, p);
                    if v < best_val {
                        best_val = v;
                        best = p;
                    }
                }
            }
            cx = best.x;
            cy = best.y;
            half = 3.0 * step;
            step /= 10.0;
        }
        // the optimum may sit on an anchor, where the objective has a kink
        anchors
            .iter()
            .copied()
            .chain([best])
            .min_by(|a, b| weiszfeld_objective(anchors, *a).total_cmp(&weiszfeld_objective(anchors, *b)))
            .unwrap()
    }

    #[test]
    fn weiszfeld_matches_grid_search_and_descends() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let anchors: Vec<Point2> = (0..5)
                .map(|_| Point2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
                .collect();
            let run = weiszfeld_run(&anchors, 1e-12, 10_000).unwrap();
            let oracle = grid_search(&anchors);
            let (fw, fg) = (
                weiszfeld_objective(&anchors, run.median),
                weiszfeld_objective(&anchors, oracle),
            );
            assert!(fw <= fg + 1e-6, "weiszfeld {fw} vs grid {fg}");
            assert!((fw - fg).abs() < 1e-6, "weiszfeld {fw} vs grid {fg}");
            for pair in run.objectives.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12, "{pair:?}");
            }
        }
    }
}
