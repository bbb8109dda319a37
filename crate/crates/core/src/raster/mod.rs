//! Dense grid containers shared by every stage of the pipeline.
//!
//! All grids are row-major with `(row, col)` pixel coordinates and the origin
//! at the top-left corner. A [`ContourImage`] is a `Grid<bool>` whose `true`
//! pixels are the curve; distance and cost fields are `Grid<f64>`.

mod components;
mod draw;
mod pnm;

use std::fmt;

pub use components::connected_components;
pub use draw::{draw_closed_polyline, draw_segment};
pub use pnm::{
    decode_pnm, encode_pnm, read_pnm, write_pnm, write_scalar_pnm, PnmFormat, PnmImage,
    Quantization,
};

use crate::error::{Error, Result};

/// A pixel coordinate `(row, col)`.
pub type Pixel = (usize, usize);

/// Width and height of a raster in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridDims {
    pub width: usize,
    pub height: usize,
}

impl GridDims {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDims { width, height });
        }
        Ok(Self { width, height })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, (row, col): Pixel) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn pixel(&self, index: usize) -> Pixel {
        (index / self.width, index % self.width)
    }

    #[inline]
    pub fn contains(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    #[inline]
    pub fn on_border(&self, (row, col): Pixel) -> bool {
        row == 0 || col == 0 || row + 1 == self.height || col + 1 == self.width
    }

    /// Dims with width and height swapped.
    pub fn transposed(&self) -> Self {
        Self {
            width: self.height,
            height: self.width,
        }
    }

    pub fn ensure_same(&self, other: &GridDims) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch {
                expected: *self,
                found: *other,
            });
        }
        Ok(())
    }
}

impl fmt::Display for GridDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Pixel adjacency used by flooding and labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connectivity {
    Four,
    Eight,
}

const OFFSETS_4: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
const OFFSETS_8: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

impl Connectivity {
    /// Neighbor offsets in raster order.
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &OFFSETS_4,
            Connectivity::Eight => &OFFSETS_8,
        }
    }

    /// In-frame neighbors of `pixel`, in raster order.
    pub fn neighbors(self, dims: GridDims, pixel: Pixel) -> impl Iterator<Item = Pixel> {
        let (r, c) = (pixel.0 as isize, pixel.1 as isize);
        self.offsets().iter().filter_map(move |&(dr, dc)| {
            let (nr, nc) = (r + dr, c + dc);
            dims.contains(nr, nc).then_some((nr as usize, nc as usize))
        })
    }
}

/// A dense row-major grid of values.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    dims: GridDims,
    data: Vec<T>,
}

/// Binary raster whose foreground is one or more 8-connected curves.
pub type ContourImage = Grid<bool>;
/// Dense real-valued field (distance transforms, accumulated cost).
pub type ScalarField = Grid<f64>;
/// Region labels; label 0 is reserved for watershed-line pixels.
pub type LabelField = Grid<u32>;

impl<T: Clone> Grid<T> {
    pub fn filled(dims: GridDims, value: T) -> Self {
        Self {
            dims,
            data: vec![value; dims.len()],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_vec(dims: GridDims, data: Vec<T>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::DataLength {
                dims,
                len: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: GridDims, mut f: impl FnMut(Pixel) -> T) -> Self {
        let data = (0..dims.len()).map(|i| f(dims.pixel(i))).collect();
        Self { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.dims.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.dims.height
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn ensure_dims(&self, dims: GridDims) -> Result<()> {
        dims.ensure_same(&self.dims)
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            dims: self.dims,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Copy> Grid<T> {
    #[inline]
    pub fn get(&self, pixel: Pixel) -> T {
        self.data[self.dims.index(pixel)]
    }

    #[inline]
    pub fn set(&mut self, pixel: Pixel, value: T) {
        let i = self.dims.index(pixel);
        self.data[i] = value;
    }

    fn remap(&self, dims: GridDims, source: impl Fn(Pixel) -> Pixel) -> Self {
        Grid::from_fn(dims, |p| self.get(source(p)))
    }

    /// Rotate 90 degrees clockwise.
    pub fn rot90(&self) -> Self {
        let h = self.dims.height;
        self.remap(self.dims.transposed(), |(r, c)| (h - 1 - c, r))
    }

    pub fn rot180(&self) -> Self {
        let (h, w) = (self.dims.height, self.dims.width);
        self.remap(self.dims, |(r, c)| (h - 1 - r, w - 1 - c))
    }

    pub fn rot270(&self) -> Self {
        let w = self.dims.width;
        self.remap(self.dims.transposed(), |(r, c)| (c, w - 1 - r))
    }

    /// Mirror left-right.
    pub fn flip_horizontal(&self) -> Self {
        let w = self.dims.width;
        self.remap(self.dims, |(r, c)| (r, w - 1 - c))
    }

    /// Mirror top-bottom.
    pub fn flip_vertical(&self) -> Self {
        let h = self.dims.height;
        self.remap(self.dims, |(r, c)| (h - 1 - r, c))
    }

    pub fn transpose(&self) -> Self {
        self.remap(self.dims.transposed(), |(r, c)| (c, r))
    }
}

impl Grid<bool> {
    pub fn empty(dims: GridDims) -> Self {
        Grid::filled(dims, false)
    }

    pub fn from_pixels(dims: GridDims, pixels: impl IntoIterator<Item = Pixel>) -> Result<Self> {
        let mut img = Self::empty(dims);
        for (r, c) in pixels {
            if r >= dims.height || c >= dims.width {
                return Err(Error::InvalidParameter(format!(
                    "pixel ({r}, {c}) outside {dims}"
                )));
            }
            img.set((r, c), true);
        }
        Ok(img)
    }

    /// Foreground pixels in raster order.
    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        let dims = self.dims;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &on)| on)
            .map(move |(i, _)| dims.pixel(i))
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn has_foreground(&self) -> bool {
        self.data.iter().any(|&b| b)
    }

    pub fn ensure_foreground(&self) -> Result<()> {
        if self.has_foreground() {
            Ok(())
        } else {
            Err(Error::EmptyContour)
        }
    }

    /// Shift every foreground pixel by `(d_row, d_col)`; fails if any pixel leaves the frame.
    pub fn translate(&self, d_row: isize, d_col: isize) -> Result<Self> {
        let mut out = Self::empty(self.dims);
        for (r, c) in self.pixels() {
            let (nr, nc) = (r as isize + d_row, c as isize + d_col);
            if !self.dims.contains(nr, nc) {
                return Err(Error::OutOfFrame);
            }
            out.set((nr as usize, nc as usize), true);
        }
        Ok(out)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.ensure_dims(other.dims)?;
        Ok(Grid {
            dims: self.dims,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a || *b).collect(),
        })
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.ensure_dims(other.dims)?;
        Ok(Grid {
            dims: self.dims,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a && *b).collect(),
        })
    }

    /// Dilation by a `(2r+1)x(2r+1)` square (Chebyshev ball of radius `r`).
    pub fn dilate_square(&self, radius: usize) -> Self {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.dims.width, self.dims.height);
        // separable: rows then columns
        let mut rows = Self::empty(self.dims);
        for r in 0..h {
            for c in 0..w {
                let lo = c.saturating_sub(radius);
                let hi = (c + radius).min(w - 1);
                if (lo..=hi).any(|cc| self.get((r, cc))) {
                    rows.set((r, c), true);
                }
            }
        }
        let mut out = Self::empty(self.dims);
        for r in 0..h {
            let lo = r.saturating_sub(radius);
            let hi = (r + radius).min(h - 1);
            for c in 0..w {
                if (lo..=hi).any(|rr| rows.get((rr, c))) {
                    out.set((r, c), true);
                }
            }
        }
        out
    }
}

impl Grid<f64> {
    pub fn zeros(dims: GridDims) -> Self {
        Grid::filled(dims, 0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.data.iter().find(|v| !v.is_finite()) {
            Some(&v) => Err(Error::NonFinite(v)),
            None => Ok(()),
        }
    }
}

impl Grid<u32> {
    pub fn max_label(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    /// Distinct non-zero labels in ascending order.
    pub fn distinct_labels(&self) -> Vec<u32> {
        let mut labels: Vec<u32> = self.data.iter().copied().filter(|&l| l > 0).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    pub fn region_count(&self) -> usize {
        self.distinct_labels().len()
    }
}

/// Grayscale raster with a fixed maximum value (255 or up to 65535).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    dims: GridDims,
    maxval: u16,
    data: Vec<u16>,
}

impl GrayImage {
    pub fn new(dims: GridDims, maxval: u16, data: Vec<u16>) -> Result<Self> {
        if maxval == 0 {
            return Err(Error::InvalidParameter("maxval must be positive".into()));
        }
        if data.len() != dims.len() {
            return Err(Error::DataLength {
                dims,
                len: data.len(),
            });
        }
        if let Some(&v) = data.iter().find(|&&v| v > maxval) {
            return Err(Error::InvalidParameter(format!(
                "intensity {v} exceeds maxval {maxval}"
            )));
        }
        Ok(Self { dims, maxval, data })
    }

    pub fn filled(dims: GridDims, maxval: u16, value: u16) -> Result<Self> {
        Self::new(dims, maxval, vec![value; dims.len()])
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn maxval(&self) -> u16 {
        self.maxval
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.data
    }

    #[inline]
    pub fn get(&self, pixel: Pixel) -> u16 {
        self.data[self.dims.index(pixel)]
    }

    /// Sets a pixel, clamping to `maxval`.
    pub fn set(&mut self, pixel: Pixel, value: u16) {
        let i = self.dims.index(pixel);
        self.data[i] = value.min(self.maxval);
    }

    /// Most frequent intensity; ties resolve to the smaller value.
    pub fn histogram_mode(&self) -> u16 {
        let mut hist = vec![0usize; self.maxval as usize + 1];
        for &v in &self.data {
            hist[v as usize] += 1;
        }
        let mut best = 0;
        for (v, &n) in hist.iter().enumerate() {
            if n > hist[best] {
                best = v;
            }
        }
        best as u16
    }
}
