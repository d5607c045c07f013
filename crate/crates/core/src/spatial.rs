//! Uniform-grid indices for nearest-segment and point-in-triangle queries.

use crate::geometry::{barycentric, point_segment_distance, BoundingBox, Point};

const MAX_CELLS_PER_SIDE: usize = 1024;

#[derive(Debug, Clone)]
struct Grid {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl Grid {
    fn new(bbox: BoundingBox, items: usize) -> Self {
        let (w, h) = (bbox.width().max(1e-300), bbox.height().max(1e-300));
        let target = (items.max(1) as f64).sqrt().ceil();
        let cell = (w.max(h) / target).max(w.min(h) / MAX_CELLS_PER_SIDE as f64);
        let nx = ((w / cell).ceil() as usize).clamp(1, MAX_CELLS_PER_SIDE);
        let ny = ((h / cell).ceil() as usize).clamp(1, MAX_CELLS_PER_SIDE);
        let cell = (w / nx as f64).max(h / ny as f64);
        Self { origin: bbox.min, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] }
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let i = ((p.x - self.origin.x) / self.cell).floor();
        let j = ((p.y - self.origin.y) / self.cell).floor();
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        (clamp(i, self.nx), clamp(j, self.ny))
    }

    fn insert(&mut self, id: usize, bb: BoundingBox) {
        let (i0, j0) = self.cell_of(bb.min);
        let (i1, j1) = self.cell_of(bb.max);
        for j in j0..=j1 {
            for i in i0..=i1 {
                self.buckets[j * self.nx + i].push(id);
            }
        }
    }
}

/// Nearest-segment queries over a fixed set of segments.
#[derive(Debug, Clone)]
pub struct SegmentIndex {
    segments: Vec<(Point, Point)>,
    grid: Grid,
}

impl SegmentIndex {
    /// Panics if `segments` is empty.
    pub fn new(segments: Vec<(Point, Point)>) -> Self {
        assert!(!segments.is_empty(), "segment index needs at least one segment");
        let bbox = BoundingBox::of(segments.iter().flat_map(|&(a, b)| [a, b])).unwrap();
        let mut grid = Grid::new(bbox, segments.len());
        for (id, &(a, b)) in segments.iter().enumerate() {
            grid.insert(id, BoundingBox::of([a, b]).unwrap());
        }
        Self { segments, grid }
    }

    pub fn segments(&self) -> &[(Point, Point)] {
        &self.segments
    }

    /// Distance from `p` to the closest segment and that segment's index.
    pub fn nearest(&self, p: Point) -> (f64, usize) {
        let g = &self.grid;
        let (ci, cj) = g.cell_of(p);
        let mut best = (f64::INFINITY, usize::MAX);
        let mut ring = 0usize;
        loop {
            let (i0, i1) = (ci.saturating_sub(ring), (ci + ring).min(g.nx - 1));
            let (j0, j1) = (cj.saturating_sub(ring), (cj + ring).min(g.ny - 1));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let on_ring = i == ci.saturating_sub(ring)
                        || i == ci + ring
                        || j == cj.saturating_sub(ring)
                        || j == cj + ring;
                    if ring > 0 && !on_ring {
                        continue;
                    }
                    for &id in &g.buckets[j * g.nx + i] {
                        let (a, b) = self.segments[id];
                        let d = point_segment_distance(p, a, b);
                        if d < best.0 || (d == best.0 && id < best.1) {
                            best = (d, id);
                        }
                    }
                }
            }
            let covers_all = i0 == 0 && j0 == 0 && i1 == g.nx - 1 && j1 == g.ny - 1;
            if covers_all {
                return best;
            }
            // distance from p to the part of the plane outside the searched box
            let x0 = g.origin.x + i0 as f64 * g.cell;
            let x1 = g.origin.x + (i1 + 1) as f64 * g.cell;
            let y0 = g.origin.y + j0 as f64 * g.cell;
            let y1 = g.origin.y + (j1 + 1) as f64 * g.cell;
            let mut reach = f64::INFINITY;
            if i0 > 0 {
                reach = reach.min(p.x - x0);
            }
            if i1 < g.nx - 1 {
                reach = reach.min(x1 - p.x);
            }
            if j0 > 0 {
                reach = reach.min(p.y - y0);
            }
            if j1 < g.ny - 1 {
                reach = reach.min(y1 - p.y);
            }
            if best.0 <= reach {
                return best;
            }
            ring += 1;
        }
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.nearest(p).0
    }
}

/// Point location in a triangle soup.
#[derive(Debug, Clone)]
pub struct TriangleIndex {
    triangles: Vec<[Point; 3]>,
    grid: Grid,
}

impl TriangleIndex {
    pub fn new(triangles: Vec<[Point; 3]>) -> Self {
        assert!(!triangles.is_empty(), "triangle index needs at least one triangle");
        let bbox = BoundingBox::of(triangles.iter().flatten().copied()).unwrap();
        let mut grid = Grid::new(bbox, triangles.len());
        for (id, tri) in triangles.iter().enumerate() {
            grid.insert(id, BoundingBox::of(tri.iter().copied()).unwrap());
        }
        Self { triangles, grid }
    }

    /// Triangle containing `p` (closed, with a small relative slack) and the
    /// barycentric coordinates of `p` in it. Among several candidates the one
    /// where `p` lies deepest wins, ties going to the lower index.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let g = &self.grid;
        let outside = p.x < g.origin.x
            || p.y < g.origin.y
            || p.x > g.origin.x + g.nx as f64 * g.cell
            || p.y > g.origin.y + g.ny as f64 * g.cell;
        if outside {
            return None;
        }
        let (i, j) = g.cell_of(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &id in &g.buckets[j * g.nx + i] {
            let [a, b, c] = self.triangles[id];
            let Some(l) = barycentric(p, a, b, c) else { continue };
            let depth = l[0].min(l[1]).min(l[2]);
            if depth >= -1e-12 && best.is_none_or(|(_, _, d)| depth > d) {
                best = Some((id, l, depth));
            }
        }
        best.map(|(id, l, _)| (id, l))
    }
}
