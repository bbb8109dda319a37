use super::ContourImage;

/// Rasterize the segment between two pixels as an 8-connected Bresenham line.
/// Points outside the frame are skipped.
pub fn draw_segment(image: &mut ContourImage, from: (i64, i64), to: (i64, i64)) {
    let dims = image.dims();
    let (mut r, mut c) = from;
    let dr = (to.0 - r).abs();
    let dc = (to.1 - c).abs();
    let sr = if to.0 >= r { 1 } else { -1 };
    let sc = if to.1 >= c { 1 } else { -1 };
    let mut err = dc - dr;
    loop {
        if dims.contains(r as isize, c as isize) {
            image.set((r as usize, c as usize), true);
        }
        if (r, c) == to {
            break;
        }
        let e2 = 2 * err;
        if e2 > -dr {
            err -= dr;
            c += sc;
        }
        if e2 < dc {
            err += dc;
            r += sr;
        }
    }
}

/// Rasterize a closed polygon through `vertices` (row, col), closing the last edge.
pub fn draw_closed_polyline(image: &mut ContourImage, vertices: &[(i64, i64)]) {
    for (i, &v) in vertices.iter().enumerate() {
        let next = vertices[(i + 1) % vertices.len()];
        draw_segment(image, v, next);
    }
}
