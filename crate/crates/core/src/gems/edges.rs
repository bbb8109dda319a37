use std::collections::VecDeque;

use crate::raster::{Connectivity, ContourImage, GridDims, Pixel};

/// A maximal run of line pixels between junctions or the frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSegment {
    /// Pixels in walking order from the first endpoint.
    pub pixels: Vec<Pixel>,
    /// Pixels of the run with at most one neighbor in it; empty for a closed loop.
    pub endpoints: Vec<Pixel>,
    /// Junction pixels 8-adjacent to the run, in raster order.
    pub junctions: Vec<Pixel>,
}

impl EdgeSegment {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.endpoints.is_empty()
    }

    pub fn touches_border(&self, dims: GridDims) -> bool {
        self.pixels.iter().any(|&p| dims.on_border(p))
    }
}

// clockwise from north
const RING: [(isize, isize); 8] = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)];

/// Number of separate branches leaving `p`: runs of neighbors accepted by
/// `member` around its 8-neighborhood, counted cyclically.
fn branch_count(dims: GridDims, p: Pixel, member: impl Fn(Pixel) -> bool) -> usize {
    let on: Vec<bool> = RING
        .iter()
        .map(|&(dr, dc)| {
            let (r, c) = (p.0 as isize + dr, p.1 as isize + dc);
            dims.contains(r, c) && member((r as usize, c as usize))
        })
        .collect();
    if on.iter().all(|&b| b) {
        return 1;
    }
    (0..8).filter(|&k| on[k] && !on[(k + 7) % 8]).count()
}

/// Line pixels where three or more branches meet.
pub fn junction_mask(line: &ContourImage) -> ContourImage {
    let dims = line.dims();
    ContourImage::from_fn(dims, |p| line.get(p) && branch_count(dims, p, |q| line.get(q)) >= 3)
}

/// 8-adjacency that refuses diagonal steps cutting the corner of a junction.
fn linked(junctions: &ContourImage, p: Pixel, q: Pixel) -> bool {
    let (dr, dc) = (p.0.abs_diff(q.0), p.1.abs_diff(q.1));
    match (dr, dc) {
        (0, 1) | (1, 0) => true,
        (1, 1) => !junctions.get((p.0, q.1)) && !junctions.get((q.0, p.1)),
        _ => false,
    }
}

/// Split a watershed line into segments at its junctions.
///
/// Segments are the connected components of the line with junction pixels
/// removed, ordered by their first pixel in raster order.
pub fn decompose_edges(line: &ContourImage) -> Vec<EdgeSegment> {
    let dims = line.dims();
    let junctions = junction_mask(line);
    let free = |p: Pixel| line.get(p) && !junctions.get(p);
    let mut component = vec![usize::MAX; dims.len()];
    let mut segments = Vec::new();
    for start in line.pixels() {
        if !free(start) || component[dims.index(start)] != usize::MAX {
            continue;
        }
        let id = segments.len();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        component[dims.index(start)] = id;
        while let Some(p) = queue.pop_front() {
            members.push(p);
            for q in Connectivity::Eight.neighbors(dims, p) {
                if free(q) && component[dims.index(q)] == usize::MAX && linked(&junctions, p, q) {
                    component[dims.index(q)] = id;
                    queue.push_back(q);
                }
            }
        }
        members.sort_unstable();
        let neighbor_in = |p: Pixel, q: Pixel| component[dims.index(q)] == id && linked(&junctions, p, q);
        let endpoints: Vec<Pixel> = members
            .iter()
            .copied()
            .filter(|&p| branch_count(dims, p, |q| neighbor_in(p, q)) <= 1)
            .collect();
        let mut adjacent: Vec<Pixel> = members
            .iter()
            .flat_map(|&p| Connectivity::Eight.neighbors(dims, p))
            .filter(|&q| junctions.get(q))
            .collect();
        adjacent.sort_unstable();
        adjacent.dedup();
        let first = endpoints.first().copied().unwrap_or(members[0]);
        let pixels = walk(dims, &members, first, &neighbor_in);
        segments.push(EdgeSegment {
            pixels,
            endpoints,
            junctions: adjacent,
        });
    }
    segments
}

/// Order `members` by walking from `first`, preferring 4-neighbors over
/// diagonal ones; anything the walk misses is appended in raster order.
fn walk(dims: GridDims, members: &[Pixel], first: Pixel, neighbor_in: &dyn Fn(Pixel, Pixel) -> bool) -> Vec<Pixel> {
    let mut visited = vec![false; members.len()];
    let slot = |p: Pixel| members.binary_search(&p).expect("member");
    let mut order = Vec::with_capacity(members.len());
    let mut current = Some(first);
    while let Some(p) = current {
        visited[slot(p)] = true;
        order.push(p);
        current = Connectivity::Four
            .neighbors(dims, p)
            .chain(Connectivity::Eight.neighbors(dims, p))
            .find(|&q| neighbor_in(p, q) && !visited[slot(q)]);
    }
    for (k, &p) in members.iter().enumerate() {
        if !visited[k] {
            order.push(p);
        }
    }
    order
}
