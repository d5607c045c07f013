//! Planar point and segment primitives shared by the packing, embedding and
//! Brownian modules.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise rotation by `angle` radians.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Twice the signed area of triangle `abc`; positive when counterclockwise.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

pub fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * orient(a, b, c)
}

/// Interior angle at `a` of triangle `abc`, in `[0, π]`.
pub fn corner_angle(a: Point, b: Point, c: Point) -> f64 {
    let u = b - a;
    let v = c - a;
    u.cross(v).abs().atan2(u.dot(v))
}

/// Barycentric coordinates of `p` with respect to triangle `abc`.
/// Returns `None` for a degenerate triangle.
pub fn barycentric(p: Point, a: Point, b: Point, c: Point) -> Option<[f64; 3]> {
    let det = orient(a, b, c);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let l1 = orient(p, b, c) / det;
    let l2 = orient(a, p, c) / det;
    Some([l1, l2, 1.0 - l1 - l2])
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Closed segments `ab` and `cd` share at least one point.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, o: f64| {
        o == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

pub fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// First pair of crossing edges found by a sweep over x-extents. Edges are
/// vertex-index pairs into `coords`; pairs sharing an endpoint only conflict
/// when they overlap collinearly beyond that endpoint.
pub fn find_crossing(
    edges: &[(usize, usize)],
    coords: &[Point],
) -> Option<((usize, usize), (usize, usize))> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    let min_x = |e: (usize, usize)| coords[e.0].x.min(coords[e.1].x);
    let max_x = |e: (usize, usize)| coords[e.0].x.max(coords[e.1].x);
    order.sort_by(|&a, &b| min_x(edges[a]).total_cmp(&min_x(edges[b])).then(a.cmp(&b)));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let e = edges[i];
        let x0 = min_x(e);
        active.retain(|&j| max_x(edges[j]) >= x0);
        let (ymin, ymax) = {
            let (a, b) = (coords[e.0].y, coords[e.1].y);
            (a.min(b), a.max(b))
        };
        for &j in &active {
            let f = edges[j];
            let (fa, fb) = (coords[f.0].y, coords[f.1].y);
            if fa.max(fb) < ymin || fa.min(fb) > ymax {
                continue;
            }
            let shared = [e.0, e.1].iter().find(|v| **v == f.0 || **v == f.1).copied();
            let conflict = match shared {
                None => segments_intersect(coords[e.0], coords[e.1], coords[f.0], coords[f.1]),
                Some(s) => {
                    let eo = if e.0 == s { e.1 } else { e.0 };
                    let fo = if f.0 == s { f.1 } else { f.0 };
                    let (u, v) = (coords[eo] - coords[s], coords[fo] - coords[s]);
                    u.cross(v) == 0.0 && u.dot(v) > 0.0
                }
            };
            if conflict {
                return Some((f, e));
            }
        }
        active.push(i);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn of(points: impl IntoIterator<Item = Point>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut bb = BoundingBox {
            min: first,
            max: first,
        };
        for p in it {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diameter(&self) -> f64 {
        self.min.dist(self.max)
    }
}
