//! Netpbm bitmap/graymap I/O (P1, P2, P4, P5).
//!
//! Output is deterministic: the magic number and every header value are each
//! followed by a single `\n`, no comments are emitted, plain rasters put one
//! image row per line. Bitmaps use `1` for foreground.

use std::fs;
use std::path::Path;

use super::{ContourImage, GrayImage, Grid, GridDims, ScalarField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PnmFormat {
    /// Plain bitmap.
    P1,
    /// Plain graymap.
    P2,
    /// Raw bitmap.
    P4,
    /// Raw graymap.
    P5,
}

impl PnmFormat {
    pub fn magic(self) -> &'static str {
        match self {
            PnmFormat::P1 => "P1",
            PnmFormat::P2 => "P2",
            PnmFormat::P4 => "P4",
            PnmFormat::P5 => "P5",
        }
    }

    pub fn is_bitmap(self) -> bool {
        matches!(self, PnmFormat::P1 | PnmFormat::P4)
    }
}

/// Decoded PNM payload.
#[derive(Debug, Clone, PartialEq)]
pub enum PnmImage {
    Bitmap(ContourImage),
    Graymap(GrayImage),
}

impl PnmImage {
    pub fn dims(&self) -> GridDims {
        match self {
            PnmImage::Bitmap(b) => b.dims(),
            PnmImage::Graymap(g) => g.dims(),
        }
    }

    pub fn into_bitmap(self) -> Option<ContourImage> {
        match self {
            PnmImage::Bitmap(b) => Some(b),
            PnmImage::Graymap(_) => None,
        }
    }

    pub fn into_graymap(self) -> Option<GrayImage> {
        match self {
            PnmImage::Graymap(g) => Some(g),
            PnmImage::Bitmap(_) => None,
        }
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&b) = self.data.get(self.pos) {
                    self.pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(&b) = self.data.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u32::from(b - b'0')))
                .ok_or_else(|| Error::pnm(start, format!("{what} overflows")))?;
            self.pos += 1;
        }
        if self.pos == start {
            return if self.pos >= self.data.len() {
                Err(Error::pnm(start, format!("truncated: expected {what}")))
            } else {
                Err(Error::pnm(start, format!("expected {what}")))
            };
        }
        Ok(value)
    }

    /// The single whitespace byte separating the header from a raw raster.
    fn raster_separator(&mut self) -> Result<()> {
        match self.data.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(Error::pnm(self.pos, "expected whitespace before raster")),
            None => Err(Error::pnm(self.pos, "truncated: missing raster")),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.data.len() {
            return Err(Error::pnm(
                self.data.len(),
                format!("truncated payload: need {n} bytes, have {}", self.data.len() - self.pos),
            ));
        }
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }
}

/// Decode a PNM byte stream.
pub fn decode_pnm(data: &[u8]) -> Result<PnmImage> {
    if data.len() < 2 {
        return Err(Error::pnm(0, "truncated: missing magic number"));
    }
    let format = match &data[..2] {
        b"P1" => PnmFormat::P1,
        b"P2" => PnmFormat::P2,
        b"P4" => PnmFormat::P4,
        b"P5" => PnmFormat::P5,
        _ => return Err(Error::pnm(0, "unsupported magic number")),
    };
    let mut cur = Cursor { data, pos: 2 };
    let width_at = cur.pos;
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let dims = GridDims::new(width, height).map_err(|_| Error::pnm(width_at, "zero dimension"))?;

    match format {
        PnmFormat::P1 => {
            let mut bits = Vec::with_capacity(dims.len());
            while bits.len() < dims.len() {
                cur.skip_space_and_comments();
                match cur.data.get(cur.pos) {
                    Some(b'0') => bits.push(false),
                    Some(b'1') => bits.push(true),
                    Some(_) => return Err(Error::pnm(cur.pos, "invalid bit in plain bitmap")),
                    None => return Err(Error::pnm(cur.pos, "truncated payload")),
                }
                cur.pos += 1;
            }
            Ok(PnmImage::Bitmap(Grid::from_vec(dims, bits)?))
        }
        PnmFormat::P4 => {
            cur.raster_separator()?;
            let stride = width.div_ceil(8);
            let raw = cur.take(stride * height)?;
            let bits = (0..dims.len())
                .map(|i| {
                    let (r, c) = dims.pixel(i);
                    raw[r * stride + c / 8] & (0x80 >> (c % 8)) != 0
                })
                .collect();
            Ok(PnmImage::Bitmap(Grid::from_vec(dims, bits)?))
        }
        PnmFormat::P2 | PnmFormat::P5 => {
            let maxval_at = cur.pos;
            let maxval = cur.number("maxval")?;
            if maxval == 0 || maxval > 65535 {
                return Err(Error::pnm(maxval_at, format!("maxval {maxval} out of range")));
            }
            let maxval = maxval as u16;
            let mut values = Vec::with_capacity(dims.len());
            if format == PnmFormat::P2 {
                for _ in 0..dims.len() {
                    let at = cur.pos;
                    let v = cur.number("sample")?;
                    if v > u32::from(maxval) {
                        return Err(Error::pnm(at, format!("sample {v} exceeds maxval")));
                    }
                    values.push(v as u16);
                }
            } else {
                cur.raster_separator()?;
                let wide = maxval > 255;
                let raw = cur.take(dims.len() * if wide { 2 } else { 1 })?;
                let start = cur.pos - raw.len();
                for i in 0..dims.len() {
                    let v = if wide {
                        u16::from_be_bytes([raw[2 * i], raw[2 * i + 1]])
                    } else {
                        u16::from(raw[i])
                    };
                    if v > maxval {
                        let at = start + if wide { 2 * i } else { i };
                        return Err(Error::pnm(at, format!("sample {v} exceeds maxval")));
                    }
                    values.push(v);
                }
            }
            Ok(PnmImage::Graymap(GrayImage::new(dims, maxval, values)?))
        }
    }
}

/// Encode an image; bitmap formats need a bitmap and graymap formats a graymap.
pub fn encode_pnm(image: &PnmImage, format: PnmFormat) -> Result<Vec<u8>> {
    let dims = image.dims();
    let mut out = Vec::new();
    let mut header = format!("{}\n{}\n{}\n", format.magic(), dims.width, dims.height);
    match (image, format) {
        (PnmImage::Bitmap(bits), PnmFormat::P1) => {
            out.extend_from_slice(header.as_bytes());
            for row in bits.as_slice().chunks(dims.width) {
                out.extend(row.iter().map(|&b| if b { b'1' } else { b'0' }));
                out.push(b'\n');
            }
        }
        (PnmImage::Bitmap(bits), PnmFormat::P4) => {
            out.extend_from_slice(header.as_bytes());
            for row in bits.as_slice().chunks(dims.width) {
                for byte in row.chunks(8) {
                    let packed = byte
                        .iter()
                        .enumerate()
                        .fold(0u8, |acc, (k, &b)| if b { acc | (0x80 >> k) } else { acc });
                    out.push(packed);
                }
            }
        }
        (PnmImage::Graymap(gray), PnmFormat::P2) => {
            header.push_str(&format!("{}\n", gray.maxval()));
            out.extend_from_slice(header.as_bytes());
            for row in gray.as_slice().chunks(dims.width) {
                let line: Vec<String> = row.iter().map(u16::to_string).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        (PnmImage::Graymap(gray), PnmFormat::P5) => {
            header.push_str(&format!("{}\n", gray.maxval()));
            out.extend_from_slice(header.as_bytes());
            if gray.maxval() > 255 {
                for &v in gray.as_slice() {
                    out.extend_from_slice(&v.to_be_bytes());
                }
            } else {
                out.extend(gray.as_slice().iter().map(|&v| v as u8));
            }
        }
        (_, f) => return Err(Error::FormatMismatch(f.magic())),
    }
    Ok(out)
}

pub fn read_pnm(path: impl AsRef<Path>) -> Result<PnmImage> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    decode_pnm(&data)
}

pub fn write_pnm(path: impl AsRef<Path>, image: &PnmImage, format: PnmFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_pnm(image, format)?;
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Linear map from `[0, max_value]` onto `[0, maxval]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantization {
    pub max_value: f64,
    pub maxval: u16,
}

impl Quantization {
    pub fn new(max_value: f64, maxval: u16) -> Result<Self> {
        if !(max_value.is_finite() && max_value > 0.0) || maxval == 0 {
            return Err(Error::InvalidParameter(format!(
                "quantization range [0, {max_value}] -> [0, {maxval}]"
            )));
        }
        Ok(Self { max_value, maxval })
    }

    /// Scale so the field's largest value maps to `maxval`.
    pub fn fit(field: &ScalarField, maxval: u16) -> Result<Self> {
        let max = field.max_value();
        Self::new(if max > 0.0 { max } else { 1.0 }, maxval)
    }

    pub fn apply(&self, field: &ScalarField) -> Result<GrayImage> {
        let scale = f64::from(self.maxval) / self.max_value;
        let mut out = Vec::with_capacity(field.dims().len());
        for &v in field.as_slice() {
            if !(0.0..=self.max_value).contains(&v) {
                return Err(Error::QuantizationOverflow {
                    value: v,
                    max: self.max_value,
                });
            }
            out.push((v * scale).round() as u16);
        }
        GrayImage::new(field.dims(), self.maxval, out)
    }
}

pub fn write_scalar_pnm(
    path: impl AsRef<Path>,
    field: &ScalarField,
    quantization: Quantization,
    format: PnmFormat,
) -> Result<()> {
    if format.is_bitmap() {
        return Err(Error::FormatMismatch(format.magic()));
    }
    let gray = quantization.apply(field)?;
    write_pnm(path, &PnmImage::Graymap(gray), format)
}
