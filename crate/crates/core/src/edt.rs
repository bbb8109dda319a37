//! Exact Euclidean distance transform and per-contour accumulation.
//!
//! The transform is the two-pass separable lower-envelope scheme of Meijster
//! et al.: a column scan gives the vertical distance to the nearest foreground
//! pixel in each column, then a row scan takes the lower envelope of the
//! parabolas `(x - i)^2 + g(i)^2`. Everything runs in integer arithmetic, so
//! squared distances are exact.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact::{from_fixed, int_to_fixed, to_fixed};
use crate::raster::{ContourImage, Grid, GridDims, Pixel, ScalarField};

/// Reusable work buffers for the transform of one image size.
#[derive(Debug)]
pub struct EdtScratch {
    dims: GridDims,
    /// Vertical distance to the nearest foreground pixel in the same column.
    column: Vec<i64>,
    squared: Vec<u64>,
    envelope_s: Vec<usize>,
    envelope_t: Vec<usize>,
}

impl EdtScratch {
    pub fn new(dims: GridDims) -> Self {
        Self {
            dims,
            column: vec![0; dims.len()],
            squared: vec![0; dims.len()],
            envelope_s: vec![0; dims.width],
            envelope_t: vec![0; dims.width],
        }
    }

    /// Squared distances from the last call to [`EdtScratch::compute`].
    pub fn squared(&self) -> &[u64] {
        &self.squared
    }

    fn bytes(dims: GridDims) -> usize {
        dims.len() * (std::mem::size_of::<i64>() + std::mem::size_of::<u64>())
    }

    /// Compute squared distances of `contour` into this scratch.
    pub fn compute(&mut self, contour: &ContourImage) -> Result<()> {
        self.dims.ensure_same(&contour.dims())?;
        contour.ensure_foreground()?;
        let GridDims { width, height } = self.dims;
        let inf = (width + height) as i64;
        let fg = contour.as_slice();

        for c in 0..width {
            let mut g = if fg[c] { 0 } else { inf };
            self.column[c] = g;
            for r in 1..height {
                let i = r * width + c;
                g = if fg[i] { 0 } else { (g + 1).min(inf) };
                self.column[i] = g;
            }
            for r in (0..height.saturating_sub(1)).rev() {
                let i = r * width + c;
                let below = self.column[i + width];
                if below < self.column[i] {
                    self.column[i] = below + 1;
                }
            }
        }

        let s = &mut self.envelope_s;
        let t = &mut self.envelope_t;
        for r in 0..height {
            let g = &self.column[r * width..(r + 1) * width];
            let f = |x: usize, i: usize| {
                let dx = x as i64 - i as i64;
                dx * dx + g[i] * g[i]
            };
            let sep = |i: usize, u: usize| {
                let (ii, uu) = (i as i64, u as i64);
                (uu * uu - ii * ii + g[u] * g[u] - g[i] * g[i]).div_euclid(2 * (uu - ii))
            };
            let mut q: isize = 0;
            s[0] = 0;
            t[0] = 0;
            for u in 1..width {
                while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
                    q -= 1;
                }
                if q < 0 {
                    q = 0;
                    s[0] = u;
                } else {
                    let w = 1 + sep(s[q as usize], u);
                    if w < width as i64 {
                        q += 1;
                        s[q as usize] = u;
                        t[q as usize] = w as usize;
                    }
                }
            }
            for u in (0..width).rev() {
                self.squared[r * width + u] = f(u, s[q as usize]) as u64;
                if u == t[q as usize] {
                    q -= 1;
                }
            }
        }
        Ok(())
    }
}

/// Exact squared Euclidean distance to the nearest foreground pixel.
pub fn squared_edt(contour: &ContourImage) -> Result<Grid<u64>> {
    let mut scratch = EdtScratch::new(contour.dims());
    scratch.compute(contour)?;
    Grid::from_vec(contour.dims(), scratch.squared)
}

/// Exact Euclidean distance transform; zero exactly on the foreground.
pub fn edt(contour: &ContourImage) -> Result<ScalarField> {
    Ok(squared_edt(contour)?.map(|&d2| (d2 as f64).sqrt()))
}

/// Coordinates of one closest foreground pixel for each pixel.
pub type FeatureField = Grid<Pixel>;

/// Nearest-foreground (feature) transform.
///
/// When several foreground pixels are equally close the lexicographically
/// smallest `(row, col)` is returned.
pub fn feature_transform(contour: &ContourImage) -> Result<FeatureField> {
    contour.ensure_foreground()?;
    let dims = contour.dims();
    let GridDims { width, height } = dims;
    // nearest foreground row at or above / at or below, per column
    let mut up = vec![None; dims.len()];
    let mut down = vec![None; dims.len()];
    for c in 0..width {
        let mut last = None;
        for r in 0..height {
            if contour.get((r, c)) {
                last = Some(r);
            }
            up[r * width + c] = last;
        }
        last = None;
        for r in (0..height).rev() {
            if contour.get((r, c)) {
                last = Some(r);
            }
            down[r * width + c] = last;
        }
    }
    let squared = squared_edt(contour)?;
    Ok(Grid::from_fn(dims, |(r, c)| {
        let d2 = squared.get((r, c));
        let reach = isqrt(d2) as usize;
        let lo = c.saturating_sub(reach);
        let hi = (c + reach).min(width - 1);
        let mut best: Option<Pixel> = None;
        for cc in lo..=hi {
            let i = r * width + cc;
            let above = up[i].map(|ur| r - ur);
            let below = down[i].map(|dr| dr - r);
            let (row, dv) = match (above, below) {
                (Some(a), Some(b)) if a <= b => (r - a, a),
                (_, Some(b)) => (r + b, b),
                (Some(a), None) => (r - a, a),
                (None, None) => continue,
            };
            let dh = cc.abs_diff(c);
            if (dv * dv + dh * dh) as u64 == d2 {
                let cand = (row, cc);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        best.expect("window always contains the nearest pixel")
    }))
}

fn isqrt(v: u64) -> u64 {
    let mut r = (v as f64).sqrt() as u64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// How per-contour distances are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccumulationMode {
    /// Sum of distances (median shape).
    Linear,
    /// Sum of squared distances (mean shape).
    Squared,
}

/// Pointwise sum of the distance fields of `count` contours.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatedField {
    pub field: ScalarField,
    pub count: usize,
    pub mode: AccumulationMode,
}

impl AccumulatedField {
    pub fn dims(&self) -> GridDims {
        self.field.dims()
    }
}

/// Tracks live bytes of full-size buffers allocated by the accumulator.
#[derive(Debug, Default, Clone)]
pub struct MemoryProbe {
    inner: Arc<ProbeInner>,
}

#[derive(Debug, Default)]
struct ProbeInner {
    live: AtomicUsize,
    peak: AtomicUsize,
}

impl MemoryProbe {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn peak_bytes(&self) -> usize {
        self.inner.peak.load(Ordering::SeqCst)
    }

    pub fn live_bytes(&self) -> usize {
        self.inner.live.load(Ordering::SeqCst)
    }

    fn acquire(&self, bytes: usize) -> ProbeGuard<'_> {
        let live = self.inner.live.fetch_add(bytes, Ordering::SeqCst) + bytes;
        self.inner.peak.fetch_max(live, Ordering::SeqCst);
        ProbeGuard { probe: self, bytes }
    }
}

struct ProbeGuard<'a> {
    probe: &'a MemoryProbe,
    bytes: usize,
}

impl Drop for ProbeGuard<'_> {
    fn drop(&mut self) {
        self.probe.inner.live.fetch_sub(self.bytes, Ordering::SeqCst);
    }
}

/// Streaming sum over a chunk of contours, in fixed-point units.
fn accumulate_chunk<'a>(
    contours: impl IntoIterator<Item = Result<std::borrow::Cow<'a, ContourImage>>>,
    dims: GridDims,
    mode: AccumulationMode,
    probe: &MemoryProbe,
) -> Result<(Vec<u128>, usize)> {
    let _sum_guard = probe.acquire(dims.len() * std::mem::size_of::<u128>());
    let mut sum = vec![0u128; dims.len()];
    let _scratch_guard = probe.acquire(EdtScratch::bytes(dims));
    let mut scratch = EdtScratch::new(dims);
    let mut count = 0;
    for contour in contours {
        let contour = contour?;
        dims.ensure_same(&contour.dims())?;
        scratch.compute(&contour)?;
        match mode {
            AccumulationMode::Linear => {
                for (acc, &d2) in sum.iter_mut().zip(scratch.squared()) {
                    *acc += to_fixed((d2 as f64).sqrt());
                }
            }
            AccumulationMode::Squared => {
                for (acc, &d2) in sum.iter_mut().zip(scratch.squared()) {
                    *acc += int_to_fixed(d2);
                }
            }
        }
        count += 1;
    }
    Ok((sum, count))
}

fn finish(dims: GridDims, sum: &[u128], count: usize, mode: AccumulationMode) -> Result<AccumulatedField> {
    if count == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(AccumulatedField {
        field: Grid::from_vec(dims, sum.iter().map(|&u| from_fixed(u)).collect())?,
        count,
        mode,
    })
}

/// Sum the distance transforms of all `contours`.
///
/// Uses every available worker; see [`accumulate_with`].
pub fn accumulate(contours: &[ContourImage], mode: AccumulationMode) -> Result<AccumulatedField> {
    #[cfg(feature = "parallel")]
    let workers = rayon::current_num_threads();
    #[cfg(not(feature = "parallel"))]
    let workers = 1;
    accumulate_with(contours, mode, workers, &MemoryProbe::new())
}

/// Sum the distance transforms of `contours` with at most `workers` parallel workers.
///
/// Contours are split into contiguous index ranges, one per worker, and the
/// partial sums are combined in ascending range order. The sum itself is exact
/// integer arithmetic, so the result is bitwise identical for any worker count
/// and any ordering of the inputs. Each worker holds one partial sum and one
/// transform scratch, independent of the number of contours.
pub fn accumulate_with(
    contours: &[ContourImage],
    mode: AccumulationMode,
    workers: usize,
    probe: &MemoryProbe,
) -> Result<AccumulatedField> {
    let first = contours.first().ok_or(Error::EmptyInput)?;
    let dims = first.dims();
    for c in contours {
        dims.ensure_same(&c.dims())?;
    }
    let workers = workers.clamp(1, contours.len());
    let ranges: Vec<_> = (0..workers)
        .map(|k| (k * contours.len() / workers)..((k + 1) * contours.len() / workers))
        .collect();
    let run = |range: std::ops::Range<usize>| {
        accumulate_chunk(
            contours[range].iter().map(|c| Ok(std::borrow::Cow::Borrowed(c))),
            dims,
            mode,
            probe,
        )
    };
    #[cfg(feature = "parallel")]
    let partials: Vec<Result<(Vec<u128>, usize)>> = {
        use rayon::prelude::*;
        ranges.into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<Result<(Vec<u128>, usize)>> = ranges.into_iter().map(run).collect();

    let mut total: Option<Vec<u128>> = None;
    let mut count = 0;
    for partial in partials {
        let (sum, n) = partial?;
        count += n;
        match total.as_mut() {
            None => total = Some(sum),
            Some(t) => t.iter_mut().zip(&sum).for_each(|(a, b)| *a += b),
        }
    }
    finish(dims, &total.expect("at least one worker"), count, mode)
}

/// Sum distance transforms of contours produced one at a time (e.g. read from disk).
///
/// Only one input contour, one partial sum and one scratch are resident at a time.
pub fn accumulate_streaming<I>(contours: I, mode: AccumulationMode, probe: &MemoryProbe) -> Result<AccumulatedField>
where
    I: IntoIterator<Item = Result<ContourImage>>,
{
    let mut iter = contours.into_iter().peekable();
    let dims = match iter.peek() {
        None => return Err(Error::EmptyInput),
        Some(Err(_)) => return Err(iter.next().unwrap().unwrap_err()),
        Some(Ok(c)) => c.dims(),
    };
    let (sum, count) = accumulate_chunk(iter.map(|c| c.map(std::borrow::Cow::Owned)), dims, mode, probe)?;
    finish(dims, &sum, count, mode)
}

/// `max(field) - field`, pointwise.
pub fn invert(field: &ScalarField) -> ScalarField {
    let max = field.max_value();
    field.map(|&v| max - v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dims(w: usize, h: usize) -> GridDims {
        GridDims::new(w, h).unwrap()
    }

    fn brute_force(img: &ContourImage) -> ScalarField {
        let fg: Vec<Pixel> = img.pixels().collect();
        Grid::from_fn(img.dims(), |(r, c)| {
            fg.iter()
                .map(|&(fr, fc)| {
                    let (dr, dc) = (r as f64 - fr as f64, c as f64 - fc as f64);
                    (dr * dr + dc * dc).sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
    }

    fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> ContourImage {
        let mut img = ContourImage::from_fn(dims(w, h), |_| rng.gen_bool(density));
        if !img.has_foreground() {
            img.set((rng.gen_range(0..h), rng.gen_range(0..w)), true);
        }
        img
    }

    #[test]
    fn center_pixel() {
        let img = ContourImage::from_pixels(dims(3, 3), [(1, 1)]).unwrap();
        let d = edt(&img).unwrap();
        let s2 = 2f64.sqrt();
        assert_eq!(d.as_slice(), &[s2, 1.0, s2, 1.0, 0.0, 1.0, s2, 1.0, s2]);
    }

    #[test]
    fn empty_foreground_rejected() {
        let img = ContourImage::empty(dims(4, 4));
        assert!(matches!(edt(&img), Err(Error::EmptyContour)));
        assert!(matches!(feature_transform(&img), Err(Error::EmptyContour)));
    }

    #[test]
    fn matches_brute_force_on_sparse_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let img = random_image(&mut rng, 48, 48, 0.01);
            let fast = edt(&img).unwrap();
            let slow = brute_force(&img);
            for (a, b) in fast.as_slice().iter().zip(slow.as_slice()) {
                assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
            }
            for p in img.pixels() {
                assert_eq!(fast.get(p), 0.0);
            }
        }
    }

    #[test]
    fn thin_and_wide_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (w, h) in [(1, 1), (1, 30), (30, 1), (2, 17), (17, 2)] {
            let img = random_image(&mut rng, w, h, 0.1);
            assert_eq!(edt(&img).unwrap(), brute_force(&img));
        }
    }

    #[test]
    fn feature_single_pixel() {
        let img = ContourImage::from_pixels(dims(5, 4), [(2, 3)]).unwrap();
        let ft = feature_transform(&img).unwrap();
        assert!(ft.as_slice().iter().all(|&p| p == (2, 3)));
    }

    #[test]
    fn feature_tie_prefers_lexicographically_smaller() {
        // (2,2) is equidistant from (0,2) and (4,2), and from (2,0) and (2,4)
        let img = ContourImage::from_pixels(dims(5, 5), [(4, 2), (0, 2)]).unwrap();
        assert_eq!(feature_transform(&img).unwrap().get((2, 2)), (0, 2));
        let img = ContourImage::from_pixels(dims(5, 5), [(2, 4), (2, 0)]).unwrap();
        assert_eq!(feature_transform(&img).unwrap().get((2, 2)), (2, 0));
        // diagonal candidates (1,3) and (3,1): row order decides
        let img = ContourImage::from_pixels(dims(5, 5), [(3, 1), (1, 3)]).unwrap();
        assert_eq!(feature_transform(&img).unwrap().get((2, 2)), (1, 3));
    }

    #[test]
    fn feature_attains_edt_and_is_brute_force_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let img = random_image(&mut rng, 33, 27, 0.03);
            let ft = feature_transform(&img).unwrap();
            let d = edt(&img).unwrap();
            let fg: Vec<Pixel> = img.pixels().collect();
            for i in 0..img.dims().len() {
                let (r, c) = img.dims().pixel(i);
                let (nr, nc) = ft.as_slice()[i];
                assert!(img.get((nr, nc)));
                let dist = ((r as f64 - nr as f64).powi(2) + (c as f64 - nc as f64).powi(2)).sqrt();
                assert_eq!(dist, d.as_slice()[i]);
                let d2 = |&(fr, fc): &Pixel| (fr.abs_diff(r).pow(2) + fc.abs_diff(c).pow(2)) as u64;
                let best = fg.iter().map(d2).min().unwrap();
                let lex = fg.iter().filter(|p| d2(p) == best).min().unwrap();
                assert_eq!(*lex, (nr, nc));
            }
        }
    }

    #[test]
    fn accumulate_single_and_double() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let img = random_image(&mut rng, 20, 20, 0.05);
        let one = accumulate(std::slice::from_ref(&img), AccumulationMode::Linear).unwrap();
        assert_eq!(one.field, edt(&img).unwrap());
        assert_eq!(one.count, 1);
        let two = accumulate(&[img.clone(), img.clone()], AccumulationMode::Linear).unwrap();
        let doubled = edt(&img).unwrap().map(|v| 2.0 * v);
        assert_eq!(two.field, doubled);
    }

    #[test]
    fn accumulate_squared_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let imgs: Vec<_> = (0..3).map(|_| random_image(&mut rng, 40, 30, 0.02)).collect();
        let acc = accumulate(&imgs, AccumulationMode::Squared).unwrap();
        let naive: Vec<f64> = (0..imgs[0].dims().len())
            .map(|i| imgs.iter().map(|im| brute_force(im).as_slice()[i].powi(2)).sum())
            .collect();
        for (a, b) in acc.field.as_slice().iter().zip(&naive) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn accumulate_rejects_bad_input() {
        assert!(matches!(accumulate(&[], AccumulationMode::Linear), Err(Error::EmptyInput)));
        let a = ContourImage::from_pixels(dims(4, 4), [(0, 0)]).unwrap();
        let b = ContourImage::from_pixels(dims(5, 4), [(0, 0)]).unwrap();
        assert!(matches!(
            accumulate(&[a, b], AccumulationMode::Linear),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn worker_count_and_order_do_not_change_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut imgs: Vec<_> = (0..9).map(|_| random_image(&mut rng, 31, 29, 0.01)).collect();
        let probe = MemoryProbe::new();
        let base = accumulate_with(&imgs, AccumulationMode::Linear, 1, &probe).unwrap();
        for workers in [2, 3, 8, 32] {
            assert_eq!(accumulate_with(&imgs, AccumulationMode::Linear, workers, &probe).unwrap(), base);
        }
        imgs.reverse();
        imgs.swap(0, 4);
        assert_eq!(accumulate_with(&imgs, AccumulationMode::Linear, 3, &probe).unwrap(), base);
        let streamed = accumulate_streaming(imgs.into_iter().map(Ok), AccumulationMode::Linear, &probe).unwrap();
        assert_eq!(streamed, base);
    }

    #[test]
    fn peak_memory_independent_of_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let imgs: Vec<_> = (0..16).map(|_| random_image(&mut rng, 64, 64, 0.01)).collect();
        let peaks: Vec<usize> = [2usize, 8, 16]
            .iter()
            .map(|&n| {
                let probe = MemoryProbe::new();
                accumulate_with(&imgs[..n], AccumulationMode::Linear, 2, &probe).unwrap();
                assert_eq!(probe.live_bytes(), 0);
                probe.peak_bytes()
            })
            .collect();
        assert!(peaks.iter().all(|&p| p <= peaks[0]), "{peaks:?}");
    }

    #[test]
    fn invert_examples() {
        let c = ScalarField::filled(dims(3, 2), 4.5);
        assert!(invert(&c).as_slice().iter().all(|&v| v == 0.0));
        let f = ScalarField::from_vec(dims(3, 1), vec![0.0, 5.0, 10.0]).unwrap();
        assert_eq!(invert(&f).as_slice(), &[10.0, 5.0, 0.0]);
    }

    fn arg_sets(f: &ScalarField) -> (Vec<usize>, Vec<usize>) {
        let (lo, hi) = (f.min_value(), f.max_value());
        let s = f.as_slice();
        (
            (0..s.len()).filter(|&i| s[i] == lo).collect(),
            (0..s.len()).filter(|&i| s[i] == hi).collect(),
        )
    }

    proptest! {
        #[test]
        fn double_inversion_preserves_extrema(vals in proptest::collection::vec(-50i32..50, 36)) {
            let f = ScalarField::from_vec(dims(6, 6), vals.iter().map(|&v| v as f64 * 0.5).collect()).unwrap();
            let once = invert(&f);
            let twice = invert(&once);
            let (fmin, fmax) = arg_sets(&f);
            let (omin, omax) = arg_sets(&once);
            prop_assert_eq!(&fmin, &omax);
            prop_assert_eq!(&fmax, &omin);
            prop_assert_eq!(arg_sets(&twice), (fmin, fmax));
            let shift = f.min_value();
            for (a, b) in twice.as_slice().iter().zip(f.as_slice()) {
                prop_assert_eq!(*a, b - shift);
            }
        }

        #[test]
        fn commutes_with_grid_isometries(seed in any::<u64>(), w in 1usize..24, h in 1usize..24) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let img = random_image(&mut rng, w, h, 0.05);
            let d = edt(&img).unwrap();
            prop_assert_eq!(edt(&img.rot90()).unwrap(), d.rot90());
            prop_assert_eq!(edt(&img.rot180()).unwrap(), d.rot180());
            prop_assert_eq!(edt(&img.flip_horizontal()).unwrap(), d.flip_horizontal());
            prop_assert_eq!(edt(&img.flip_vertical()).unwrap(), d.flip_vertical());
            prop_assert_eq!(edt(&img.transpose()).unwrap(), d.transpose());
        }
    }
}
