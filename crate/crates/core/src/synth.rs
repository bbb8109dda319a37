//! Deterministic synthetic datasets: wobbly circles with outliers, and
//! cell-grid tiles segmented by several simulated annotators.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::raster::{draw_closed_polyline, draw_segment, ContourImage, GrayImage, GridDims};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutlierKind {
    /// An irregular star-shaped loop.
    Blob,
    /// A long thin ellipse.
    Band,
    /// Several small disconnected loops.
    Scatter,
    /// Cycle through the other three.
    Mixed,
}

impl OutlierKind {
    pub fn name(self) -> &'static str {
        match self {
            OutlierKind::Blob => "blob",
            OutlierKind::Band => "band",
            OutlierKind::Scatter => "scatter",
            OutlierKind::Mixed => "mixed",
        }
    }
}

impl fmt::Display for OutlierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OutlierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blob" => Ok(OutlierKind::Blob),
            "band" => Ok(OutlierKind::Band),
            "scatter" => Ok(OutlierKind::Scatter),
            "mixed" => Ok(OutlierKind::Mixed),
            _ => Err(Error::InvalidParameter(format!("unknown outlier kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub dims: GridDims,
    pub circles: usize,
    pub radius: f64,
    /// Maximum center offset from the frame center, per axis.
    pub center_jitter: f64,
    pub radius_jitter: f64,
    /// Maximum radial wobble of each circle.
    pub wobble: f64,
    pub outliers: usize,
    pub outlier_kind: OutlierKind,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            dims: GridDims { width: 400, height: 400 },
            circles: 13,
            radius: 100.0,
            center_jitter: 3.0,
            radius_jitter: 4.0,
            wobble: 3.0,
            outliers: 14,
            outlier_kind: OutlierKind::Mixed,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourKind {
    Circle,
    Outlier(OutlierKind),
}

impl fmt::Display for ContourKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContourKind::Circle => f.write_str("circle"),
            ContourKind::Outlier(k) => write!(f, "outlier-{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthContour {
    pub kind: ContourKind,
    /// Stream index of the generator that drew this contour.
    pub seed_offset: u64,
    pub image: ContourImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSet {
    pub circles: Vec<SynthContour>,
    pub outliers: Vec<SynthContour>,
}

/// Streams at or above this offset draw outliers.
pub const OUTLIER_STREAM: u64 = 1 << 20;

fn stream(seed: u64, offset: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(offset);
    rng
}

fn check_fits(dims: GridDims, vertices: &[(i64, i64)]) -> Result<()> {
    let ok = vertices
        .iter()
        .all(|&(r, c)| r >= 1 && c >= 1 && r <= dims.height as i64 - 2 && c <= dims.width as i64 - 2);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("synthetic contour does not fit in a {dims} frame")))
    }
}

fn clamp_into(dims: GridDims, (r, c): (f64, f64)) -> (i64, i64) {
    (
        (r.round() as i64).clamp(1, dims.height as i64 - 2),
        (c.round() as i64).clamp(1, dims.width as i64 - 2),
    )
}

fn wobbly_circle(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<ContourImage> {
    let dims = spec.dims;
    let jitter = |rng: &mut ChaCha8Rng, a: f64| if a > 0.0 { rng.gen_range(-a..=a) } else { 0.0 };
    let cy = dims.height as f64 / 2.0 + jitter(rng, spec.center_jitter);
    let cx = dims.width as f64 / 2.0 + jitter(rng, spec.center_jitter);
    let radius = spec.radius + jitter(rng, spec.radius_jitter);
    let harmonics: Vec<(f64, f64)> = (2..=5).map(|_| (rng.gen::<f64>(), rng.gen_range(0.0..TAU))).collect();
    let total: f64 = harmonics.iter().map(|h| h.0).sum::<f64>().max(1e-9);
    let scale = spec.wobble * rng.gen_range(0.5..=1.0) / total;
    if radius <= spec.wobble + 1.0 {
        return Err(Error::InvalidParameter(format!("radius {radius} too small for wobble {}", spec.wobble)));
    }
    let m = ((TAU * radius).ceil() as usize).max(16);
    let vertices: Vec<(i64, i64)> = (0..m)
        .map(|k| {
            let t = TAU * k as f64 / m as f64;
            let r = radius
                + harmonics
                    .iter()
                    .enumerate()
                    .map(|(j, &(a, phase))| scale * a * ((j as f64 + 2.0) * t + phase).cos())
                    .sum::<f64>();
            ((cy + r * t.sin()).round() as i64, (cx + r * t.cos()).round() as i64)
        })
        .collect();
    check_fits(dims, &vertices)?;
    let mut img = ContourImage::empty(dims);
    draw_closed_polyline(&mut img, &vertices);
    Ok(img)
}

fn random_center(dims: GridDims, rng: &mut ChaCha8Rng) -> (f64, f64) {
    (
        rng.gen_range(0.15..0.85) * dims.height as f64,
        rng.gen_range(0.15..0.85) * dims.width as f64,
    )
}

fn blob(dims: GridDims, rng: &mut ChaCha8Rng, img: &mut ContourImage) {
    let size = dims.width.min(dims.height) as f64;
    let (cy, cx) = random_center(dims, rng);
    let mean = rng.gen_range(0.05..0.3) * size;
    let n = rng.gen_range(5..=12);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
    angles.sort_by(f64::total_cmp);
    let vertices: Vec<(i64, i64)> = angles
        .iter()
        .map(|&t| {
            let r = mean * rng.gen_range(0.4..1.4);
            clamp_into(dims, (cy + r * t.sin(), cx + r * t.cos()))
        })
        .collect();
    draw_closed_polyline(img, &vertices);
}

fn band(dims: GridDims, rng: &mut ChaCha8Rng, img: &mut ContourImage) {
    let size = dims.width.min(dims.height) as f64;
    let (cy, cx) = random_center(dims, rng);
    let a = rng.gen_range(0.2..0.45) * size;
    let b = (a / rng.gen_range(4.0..10.0)).max(2.0);
    let rot = rng.gen_range(0.0..PI);
    let vertices: Vec<(i64, i64)> = (0..48)
        .map(|k| {
            let t = TAU * k as f64 / 48.0;
            let (u, v) = (a * t.cos(), b * t.sin());
            clamp_into(dims, (cy + u * rot.sin() + v * rot.cos(), cx + u * rot.cos() - v * rot.sin()))
        })
        .collect();
    draw_closed_polyline(img, &vertices);
}

fn scatter(dims: GridDims, rng: &mut ChaCha8Rng, img: &mut ContourImage) {
    let size = dims.width.min(dims.height) as f64;
    for _ in 0..rng.gen_range(2..=4) {
        let (cy, cx) = random_center(dims, rng);
        let r = rng.gen_range(4.0..(0.06 * size).max(5.0));
        let n = ((TAU * r).ceil() as usize).max(8);
        let vertices: Vec<(i64, i64)> = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                clamp_into(dims, (cy + r * t.sin(), cx + r * t.cos()))
            })
            .collect();
        draw_closed_polyline(img, &vertices);
    }
}

fn outlier(dims: GridDims, kind: OutlierKind, rng: &mut ChaCha8Rng) -> ContourImage {
    let mut img = ContourImage::empty(dims);
    match kind {
        OutlierKind::Blob => blob(dims, rng, &mut img),
        OutlierKind::Band => band(dims, rng, &mut img),
        OutlierKind::Scatter | OutlierKind::Mixed => scatter(dims, rng, &mut img),
    }
    img
}

/// Draw `spec.circles` wobbly circles followed by `spec.outliers` outliers.
///
/// Every contour comes from its own random stream, so outlier `j` is the same
/// whatever the outlier count.
pub fn synth_circles(spec: &SynthSpec) -> Result<SynthSet> {
    if spec.circles == 0 {
        return Err(Error::InvalidParameter("at least one circle is required".into()));
    }
    if !(spec.radius.is_finite() && spec.radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {}", spec.radius)));
    }
    let circles = (0..spec.circles as u64)
        .map(|offset| {
            Ok(SynthContour {
                kind: ContourKind::Circle,
                seed_offset: offset,
                image: wobbly_circle(spec, &mut stream(spec.seed, offset))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kinds = [OutlierKind::Blob, OutlierKind::Band, OutlierKind::Scatter];
    let outliers = (0..spec.outliers)
        .map(|j| {
            let kind = match spec.outlier_kind {
                OutlierKind::Mixed => kinds[j % 3],
                k => k,
            };
            let offset = OUTLIER_STREAM + j as u64;
            SynthContour {
                kind: ContourKind::Outlier(kind),
                seed_offset: offset,
                image: outlier(spec.dims, kind, &mut stream(spec.seed, offset)),
            }
        })
        .collect();
    Ok(SynthSet { circles, outliers })
}

impl SynthSet {
    /// All circles plus the first `k` outliers.
    pub fn pool(&self, k: usize) -> Vec<ContourImage> {
        self.circles
            .iter()
            .chain(self.outliers.iter().take(k))
            .map(|c| c.image.clone())
            .collect()
    }

    pub fn all(&self) -> impl Iterator<Item = &SynthContour> {
        self.circles.iter().chain(&self.outliers)
    }
}

/// A cell-grid tile with several noisy segmentations of it.
#[derive(Debug, Clone, PartialEq)]
pub struct TileSpec {
    pub dims: GridDims,
    /// Cells per axis.
    pub cells: usize,
    pub segmentations: usize,
    /// Per-vertex displacement bound of each annotator, in pixels.
    pub jitter: i64,
    /// How many of the segmentations (the last ones) carry a dangling scribble.
    pub scribbles: usize,
    pub seed: u64,
}

impl Default for TileSpec {
    fn default() -> Self {
        Self {
            dims: GridDims { width: 800, height: 800 },
            cells: 6,
            segmentations: 16,
            jitter: 1,
            scribbles: 1,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileSet {
    /// The boundaries the annotators were tracing.
    pub truth: ContourImage,
    pub segmentations: Vec<ContourImage>,
    /// Scribble pixels farther than one pixel from `truth`, per segmentation.
    pub scribbles: Vec<ContourImage>,
    pub image: GrayImage,
}

pub const TILE_BACKGROUND: u16 = 60;
pub const TILE_BOUNDARY: u16 = 180;

type Polyline = Vec<(i64, i64)>;

fn grid_lines(spec: &TileSpec, rng: &mut ChaCha8Rng) -> Vec<Polyline> {
    let (w, h) = (spec.dims.width as i64, spec.dims.height as i64);
    let mut lines = Vec::new();
    for axis in 0..2 {
        let (along, across) = if axis == 0 { (h, w) } else { (w, h) };
        let pitch = across as f64 / spec.cells as f64;
        let wiggle = (pitch / 12.0).max(1.0) as i64;
        let step = (pitch / 3.0).max(4.0) as i64;
        for k in 1..spec.cells {
            let base = (pitch * k as f64).round() as i64;
            let mut pts = Vec::new();
            let mut t = 0;
            loop {
                let off = (base + rng.gen_range(-wiggle..=wiggle)).clamp(1, across - 2);
                pts.push(if axis == 0 { (t, off) } else { (off, t) });
                if t == along - 1 {
                    break;
                }
                t = (t + step).min(along - 1);
            }
            lines.push(pts);
        }
    }
    lines
}

fn draw_open(img: &mut ContourImage, pts: &[(i64, i64)]) {
    for w in pts.windows(2) {
        draw_segment(img, w[0], w[1]);
    }
}

fn scribble(spec: &TileSpec, truth: &ContourImage, rng: &mut ChaCha8Rng) -> Polyline {
    let dims = spec.dims;
    let pitch = dims.width.min(dims.height) as f64 / spec.cells as f64;
    let anchors: Vec<_> = truth
        .pixels()
        .filter(|&(r, c)| {
            let margin = pitch as usize;
            r > margin && c > margin && r + margin < dims.height && c + margin < dims.width
        })
        .collect();
    let start = anchors[rng.gen_range(0..anchors.len())];
    let mut pts = vec![(start.0 as i64, start.1 as i64)];
    let heading = rng.gen_range(0.0..TAU);
    for _ in 0..rng.gen_range(3..=5) {
        let &(r, c) = pts.last().unwrap();
        let t = heading + rng.gen_range(-0.6..0.6);
        let len = rng.gen_range(0.1..0.25) * pitch;
        pts.push(clamp_into(dims, (r as f64 + len * t.sin(), c as f64 + len * t.cos())));
    }
    pts
}

/// Simulate `spec.segmentations` annotators tracing a wobbly cell grid.
pub fn synth_tiles(spec: &TileSpec) -> Result<TileSet> {
    if spec.cells < 2 || spec.segmentations == 0 || spec.jitter < 0 || spec.scribbles > spec.segmentations {
        return Err(Error::InvalidParameter(format!("invalid tile spec {spec:?}")));
    }
    let pitch = spec.dims.width.min(spec.dims.height) / spec.cells;
    if pitch < 12 {
        return Err(Error::InvalidParameter(format!("{} cells do not fit in a {} frame", spec.cells, spec.dims)));
    }
    let dims = spec.dims;
    let lines = grid_lines(spec, &mut stream(spec.seed, 0));
    let mut truth = ContourImage::empty(dims);
    for l in &lines {
        draw_open(&mut truth, l);
    }
    let near_truth = truth.dilate_square(1);
    let mut segmentations = Vec::with_capacity(spec.segmentations);
    let mut scribbles = Vec::with_capacity(spec.segmentations);
    for s in 0..spec.segmentations {
        let mut rng = stream(spec.seed, 1 + s as u64);
        let mut img = ContourImage::empty(dims);
        for l in &lines {
            let moved: Polyline = l
                .iter()
                .map(|&(r, c)| {
                    let j = spec.jitter;
                    let on_edge_r = r == 0 || r == dims.height as i64 - 1;
                    let on_edge_c = c == 0 || c == dims.width as i64 - 1;
                    let dr = if on_edge_r { 0 } else { rng.gen_range(-j..=j) };
                    let dc = if on_edge_c { 0 } else { rng.gen_range(-j..=j) };
                    (r + dr, c + dc)
                })
                .collect();
            draw_open(&mut img, &moved);
        }
        let mut extra = ContourImage::empty(dims);
        if s >= spec.segmentations - spec.scribbles {
            let pts = scribble(spec, &truth, &mut rng);
            draw_open(&mut img, &pts);
            draw_open(&mut extra, &pts);
        }
        segmentations.push(img);
        scribbles.push(ContourImage::from_fn(dims, |p| extra.get(p) && !near_truth.get(p)));
    }
    let mut rng = stream(spec.seed, u64::MAX);
    let bright = truth.dilate_square(1);
    let data = (0..dims.len())
        .map(|i| {
            let base = if bright.as_slice()[i] { TILE_BOUNDARY } else { TILE_BACKGROUND };
            base + rng.gen_range(0..=4) - 2
        })
        .collect();
    Ok(TileSet {
        truth,
        segmentations,
        scribbles,
        image: GrayImage::new(dims, 255, data)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        SynthSpec {
            dims: GridDims::new(160, 160).unwrap(),
            circles: 5,
            radius: 40.0,
            outliers: 6,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        assert_eq!(synth_circles(&small()).unwrap(), synth_circles(&small()).unwrap());
        let other = SynthSpec { seed: 2, ..small() };
        assert_ne!(synth_circles(&small()).unwrap(), synth_circles(&other).unwrap());
    }

    #[test]
    fn outliers_do_not_depend_on_count() {
        let few = synth_circles(&SynthSpec { outliers: 2, ..small() }).unwrap();
        let many = synth_circles(&small()).unwrap();
        assert_eq!(few.outliers[..], many.outliers[..2]);
        assert_eq!(few.circles, many.circles);
        assert_eq!(many.pool(3).len(), 8);
    }

    #[test]
    fn circles_are_closed_and_near_the_radius() {
        let set = synth_circles(&small()).unwrap();
        for c in &set.circles {
            let img = &c.image;
            assert!(img.has_foreground());
            for (r, col) in img.pixels() {
                let d = ((r as f64 - 80.0).powi(2) + (col as f64 - 80.0).powi(2)).sqrt();
                assert!((d - 40.0).abs() <= 12.0, "pixel at distance {d}");
            }
            let region = crate::gems::enclosed_region(img);
            assert!(region.get((80, 80)), "circle is not closed");
        }
    }

    #[test]
    fn mixed_cycles_kinds() {
        let set = synth_circles(&small()).unwrap();
        let kinds: Vec<_> = set.outliers.iter().map(|o| o.kind).collect();
        assert_eq!(kinds[0], ContourKind::Outlier(OutlierKind::Blob));
        assert_eq!(kinds[1], ContourKind::Outlier(OutlierKind::Band));
        assert_eq!(kinds[2], ContourKind::Outlier(OutlierKind::Scatter));
        assert!(set.outliers.iter().all(|o| o.image.has_foreground()));
    }

    #[test]
    fn oversized_circle_rejected() {
        let spec = SynthSpec { radius: 90.0, ..small() };
        assert!(synth_circles(&spec).is_err());
    }

    #[test]
    fn kind_parsing() {
        for k in ["blob", "band", "scatter", "mixed"] {
            assert_eq!(k.parse::<OutlierKind>().unwrap().name(), k);
        }
        assert!("ring".parse::<OutlierKind>().is_err());
    }

    #[test]
    fn tiles_touch_the_frame() {
        let spec = TileSpec {
            dims: GridDims::new(200, 200).unwrap(),
            cells: 4,
            segmentations: 5,
            ..TileSpec::default()
        };
        let t = synth_tiles(&spec).unwrap();
        assert_eq!(t.segmentations.len(), 5);
        let d = spec.dims;
        assert!(t.truth.pixels().any(|p| d.on_border(p)));
        assert!(t.segmentations.iter().all(|s| s.pixels().any(|p| d.on_border(p))));
        assert!(t.scribbles[..4].iter().all(|s| !s.has_foreground()));
        assert!(t.scribbles[4].has_foreground());
        assert_eq!(t.image.histogram_mode().abs_diff(TILE_BACKGROUND) <= 2, true);
        assert_eq!(synth_tiles(&spec).unwrap(), t);
    }
}
