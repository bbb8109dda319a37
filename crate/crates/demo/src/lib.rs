//! Browser demo: three views over synthetic data, rendered to RGBA buffers
//! that the page copies straight into a canvas.

use gems_core::edt::{accumulate, invert, AccumulationMode};
use gems_core::gems::{gems_consensus, gems_mean, gems_median, GemsConfig};
use gems_core::metrics::symmetric_distance;
use gems_core::morphology::{h_minima_basins, HMinimaParams};
use gems_core::raster::{Connectivity, ContourImage, GridDims, Pixel};
use gems_core::synth::{synth_circles, synth_tiles, OutlierKind, SynthSpec, TileSpec};
use wasm_bindgen::prelude::*;

const SIZE: usize = 200;
const MAX_OUTLIERS: usize = 8;

/// A rendered view plus a line of text describing it.
#[wasm_bindgen]
pub struct Frame {
    width: usize,
    height: usize,
    rgba: Vec<u8>,
    info: String,
}

#[wasm_bindgen]
impl Frame {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn info(&self) -> String {
        self.info.clone()
    }
}

struct Canvas {
    dims: GridDims,
    rgba: Vec<u8>,
}

impl Canvas {
    fn new(dims: GridDims, rgb: [u8; 3]) -> Self {
        let mut rgba = Vec::with_capacity(dims.len() * 4);
        for _ in 0..dims.len() {
            rgba.extend_from_slice(&[rgb[0], rgb[1], rgb[2], 255]);
        }
        Self { dims, rgba }
    }

    fn put(&mut self, p: Pixel, rgb: [u8; 3]) {
        let i = self.dims.index(p) * 4;
        self.rgba[i..i + 3].copy_from_slice(&rgb);
    }

    fn draw(&mut self, contour: &ContourImage, rgb: [u8; 3]) {
        for p in contour.pixels() {
            self.put(p, rgb);
        }
    }

    fn frame(self, info: String) -> Frame {
        Frame {
            width: self.dims.width,
            height: self.dims.height,
            rgba: self.rgba,
            info,
        }
    }
}

fn circles(seed: u32) -> gems_core::Result<gems_core::synth::SynthSet> {
    synth_circles(&SynthSpec {
        dims: GridDims::new(SIZE, SIZE)?,
        circles: 9,
        radius: 50.0,
        outliers: MAX_OUTLIERS,
        outlier_kind: OutlierKind::Mixed,
        seed: seed as u64,
        ..SynthSpec::default()
    })
}

fn error_frame(e: gems_core::Error) -> Frame {
    let dims = GridDims::new(SIZE, SIZE).expect("fixed size");
    Canvas::new(dims, [40, 40, 40]).frame(format!("error: {e}"))
}

/// Median (red) and mean (blue) of nine circles plus `outliers` outliers (gray).
#[wasm_bindgen]
pub fn outlier_overlay(outliers: usize, seed: u32) -> Frame {
    overlay_inner(outliers.min(MAX_OUTLIERS), seed).unwrap_or_else(error_frame)
}

fn overlay_inner(k: usize, seed: u32) -> gems_core::Result<Frame> {
    let set = circles(seed)?;
    let median = GemsConfig::median(30.0);
    let mean = GemsConfig::mean(3000.0);
    let (m0, a0) = (gems_median(&set.pool(0), &median)?, gems_mean(&set.pool(0), &mean)?);
    let pool = set.pool(k);
    let (m, a) = (gems_median(&pool, &median)?, gems_mean(&pool, &mean)?);
    let mut canvas = Canvas::new(set.circles[0].image.dims(), [255, 255, 255]);
    for c in &pool {
        canvas.draw(c, [200, 200, 200]);
    }
    canvas.draw(&a.contour, [40, 90, 230]);
    canvas.draw(&m.contour, [220, 30, 30]);
    let dm = symmetric_distance(&m.contour, &m0.contour)?.symmetric;
    let da = symmetric_distance(&a.contour, &a0.contour)?.symmetric;
    Ok(canvas.frame(format!("{k} outliers: median moved {dm:.2} px, mean moved {da:.2} px")))
}

/// Accumulated distance field in gray, its h-minima basins tinted, and the median line in red.
#[wasm_bindgen]
pub fn basin_view(h: f64, outliers: usize, seed: u32) -> Frame {
    basin_inner(h, outliers.min(MAX_OUTLIERS), seed).unwrap_or_else(error_frame)
}

const TINTS: [[u8; 3]; 6] = [[80, 160, 80], [200, 160, 40], [60, 140, 200], [170, 80, 190], [40, 180, 170], [210, 110, 60]];

fn basin_inner(h: f64, k: usize, seed: u32) -> gems_core::Result<Frame> {
    let pool = circles(seed)?.pool(k);
    let acc = accumulate(&pool, AccumulationMode::Linear)?;
    let inverted = invert(&acc.field);
    let basins = h_minima_basins(&inverted, HMinimaParams::new(h)?, Connectivity::Four)?;
    let (lo, hi) = (acc.field.min_value(), acc.field.max_value());
    let dims = acc.dims();
    let mut canvas = Canvas::new(dims, [0, 0, 0]);
    for i in 0..dims.len() {
        let p = dims.pixel(i);
        let g = (255.0 * (acc.field.get(p) - lo) / (hi - lo).max(f64::MIN_POSITIVE)) as u8;
        let label = basins.get(p);
        let rgb = if label == 0 {
            [g, g, g]
        } else {
            let t = TINTS[(label as usize - 1) % TINTS.len()];
            [(g as u16 / 2 + t[0] as u16 / 2) as u8, (g as u16 / 2 + t[1] as u16 / 2) as u8, (g as u16 / 2 + t[2] as u16 / 2) as u8]
        };
        canvas.put(p, rgb);
    }
    let count = basins.region_count();
    let info = match gems_median(&pool, &GemsConfig::median(h)) {
        Ok(r) => {
            canvas.draw(&r.contour, [230, 30, 30]);
            format!("h = {h}: {count} basins, {} markers", r.diagnostics.marker_count)
        }
        Err(e) => format!("h = {h}: {count} basins, {e}"),
    };
    Ok(canvas.frame(info))
}

/// Consensus of cell-grid segmentations (green) over the tile, with the
/// segmentations in dark gray and any scribble pixels in orange.
#[wasm_bindgen]
pub fn consensus_view(h: f64, segmentations: usize, scribbles: usize, edge_count_threshold: f64, seed: u32) -> Frame {
    consensus_inner(h, segmentations, scribbles, edge_count_threshold, seed).unwrap_or_else(error_frame)
}

fn consensus_inner(h: f64, n: usize, scribbles: usize, threshold: f64, seed: u32) -> gems_core::Result<Frame> {
    let n = n.clamp(1, 16);
    let tiles = synth_tiles(&TileSpec {
        dims: GridDims::new(240, 240)?,
        cells: 4,
        segmentations: n,
        jitter: 1,
        scribbles: scribbles.min(n),
        seed: seed as u64,
    })?;
    let config = GemsConfig {
        edge_count_threshold: threshold,
        ..GemsConfig::consensus(h)
    };
    let r = gems_consensus(&tiles.segmentations, &tiles.image, &config)?;
    let dims = tiles.image.dims();
    let max = tiles.image.maxval() as f64;
    let mut canvas = Canvas::new(dims, [0, 0, 0]);
    for i in 0..dims.len() {
        let p = dims.pixel(i);
        let g = (255.0 * tiles.image.get(p) as f64 / max) as u8;
        canvas.put(p, [g, g, g]);
    }
    for s in &tiles.segmentations {
        canvas.draw(s, [70, 70, 70]);
    }
    for s in &tiles.scribbles {
        canvas.draw(s, [240, 140, 20]);
    }
    canvas.draw(&r.contour, [40, 220, 80]);
    let d = r.diagnostics;
    Ok(canvas.frame(format!(
        "{} segments, pruned {} unsupported and {} background",
        d.segments, d.pruned_unsupported, d.pruned_background
    )))
}
