use crate::error::{Error, Result};
use crate::raster::{draw_segment, ContourImage, GridDims};

type Pt = (i64, i64);

fn cross(o: Pt, a: Pt, b: Pt) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull of integer points `(row, col)` by monotone chain.
///
/// Vertices are returned in a consistent orientation without collinear points:
/// for every edge `a -> b` and every hull point `p`, `cross(a, b, p) >= 0`.
pub fn convex_hull(points: &[Pt]) -> Vec<Pt> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Pt> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Pt> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

// floor(a / b) for b > 0
fn div_floor(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -div_floor(-a, b)
}

/// Rasterize the hull of `points`: every pixel whose center is inside or on it.
///
/// Collinear input rasterizes as the 8-connected segment between its extremes.
pub fn hull_mask_from_points(dims: GridDims, points: &[Pt]) -> Result<ContourImage> {
    let hull = convex_hull(points);
    let mut mask = ContourImage::empty(dims);
    match hull.len() {
        0 => return Err(Error::EmptyContour),
        1 => draw_segment(&mut mask, hull[0], hull[0]),
        2 => draw_segment(&mut mask, hull[0], hull[1]),
        _ => {
            let lo_row = hull.iter().map(|p| p.0).min().unwrap().max(0);
            let hi_row = hull.iter().map(|p| p.0).max().unwrap().min(dims.height as i64 - 1);
            let last_col = dims.width as i64 - 1;
            for row in lo_row..=hi_row {
                let (mut lo, mut hi) = (0i64, last_col);
                for (k, &a) in hull.iter().enumerate() {
                    let b = hull[(k + 1) % hull.len()];
                    // cross(a, b, (row, x)) = slope * x + offset >= 0
                    let slope = b.0 - a.0;
                    let offset = -slope * a.1 - (b.1 - a.1) * (row - a.0);
                    if slope > 0 {
                        lo = lo.max(div_ceil(-offset, slope));
                    } else if slope < 0 {
                        hi = hi.min(div_floor(offset, -slope));
                    } else if offset < 0 {
                        hi = -1;
                    }
                }
                for col in lo.max(0)..=hi.min(last_col) {
                    mask.set((row as usize, col as usize), true);
                }
            }
        }
    }
    Ok(mask)
}

/// Filled convex hull of the union of all contour foregrounds.
pub fn convex_hull_mask(contours: &[ContourImage]) -> Result<ContourImage> {
    let dims = contours.first().ok_or(Error::EmptyInput)?.dims();
    let mut points = Vec::new();
    for c in contours {
        dims.ensure_same(&c.dims())?;
        // only the extreme pixels of each row can be hull vertices
        for row in 0..dims.height {
            let mut first = None;
            let mut last = None;
            for col in 0..dims.width {
                if c.get((row, col)) {
                    first.get_or_insert(col);
                    last = Some(col);
                }
            }
            if let (Some(f), Some(l)) = (first, last) {
                points.push((row as i64, f as i64));
                points.push((row as i64, l as i64));
            }
        }
    }
    hull_mask_from_points(dims, &points)
}
