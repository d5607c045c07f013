//! Straight-line embeddings of triangulations, their goodness constants, the
//! sausage check on non-adjacent edges, and the polygonal domain they cover.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{corner_angle, find_crossing, orient, segment_distance, BoundingBox, Point};
use crate::packing::{self, PackedLayout, PackingError, PackingLabel};
use crate::spatial::{SegmentIndex, TriangleIndex};
use crate::triangulation::{ExhaustionSequence, FaceId, Triangulation, TriangulationError, VertexId};

pub const DEFAULT_PAIR_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("{found} coordinates for {expected} vertices")]
    LengthMismatch { expected: usize, found: usize },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(VertexId),
    #[error("vertices {0} and {1} coincide")]
    Coincident(VertexId, VertexId),
    #[error("face {0} has zero area")]
    DegenerateFace(FaceId),
    #[error("face {0} is clockwise")]
    Clockwise(FaceId),
    #[error("edges {0:?} and {1:?} intersect")]
    Crossing((VertexId, VertexId), (VertexId, VertexId)),
    #[error(transparent)]
    Packing(#[from] PackingError),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    tri: Triangulation,
    coords: Vec<Point>,
}

impl Embedding {
    /// Checks coordinate count, finiteness, distinctness and face orientation.
    /// Edge crossings are checked separately by [`Embedding::check_planar`].
    pub fn new(tri: Triangulation, coords: Vec<Point>) -> Result<Self, EmbeddingError> {
        if coords.len() != tri.num_vertices() {
            return Err(EmbeddingError::LengthMismatch {
                expected: tri.num_vertices(),
                found: coords.len(),
            });
        }
        if let Some(v) = coords.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(EmbeddingError::NonFinite(v));
        }
        let mut order: Vec<usize> = (0..coords.len()).collect();
        order.sort_by(|&a, &b| {
            coords[a].x.total_cmp(&coords[b].x).then(coords[a].y.total_cmp(&coords[b].y))
        });
        for w in order.windows(2) {
            if coords[w[0]] == coords[w[1]] {
                return Err(EmbeddingError::Coincident(w[0].min(w[1]), w[0].max(w[1])));
            }
        }
        for (f, &[a, b, c]) in tri.faces().iter().enumerate() {
            let o = orient(coords[a], coords[b], coords[c]);
            if o == 0.0 {
                return Err(EmbeddingError::DegenerateFace(f));
            }
            if o < 0.0 {
                return Err(EmbeddingError::Clockwise(f));
            }
        }
        Ok(Self { tri, coords })
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.tri
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn edge_length(&self, u: VertexId, v: VertexId) -> f64 {
        self.coords[u].dist(self.coords[v])
    }

    pub fn face_points(&self, f: FaceId) -> [Point; 3] {
        self.tri.faces()[f].map(|v| self.coords[v])
    }

    pub fn face_area(&self, f: FaceId) -> f64 {
        let [a, b, c] = self.face_points(f);
        0.5 * orient(a, b, c)
    }

    pub fn check_planar(&self) -> Result<(), EmbeddingError> {
        match find_crossing(self.tri.edges(), &self.coords) {
            Some((e, f)) => Err(EmbeddingError::Crossing(e, f)),
            None => Ok(()),
        }
    }

    /// Applies a map to every coordinate; orientation-reversing maps fail.
    pub fn map(&self, f: impl Fn(Point) -> Point) -> Result<Self, EmbeddingError> {
        Self::new(self.tri.clone(), self.coords.iter().map(|&p| f(p)).collect())
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox::of(self.coords.iter().copied()).expect("non-empty")
    }
}

pub fn embedding_from_layout(
    t: &Triangulation,
    layout: &PackedLayout,
) -> Result<Embedding, EmbeddingError> {
    Embedding::new(t.clone(), layout.centers.clone())
}

/// Packs `t` with unit outer radii and embeds it at the circle centers.
///
/// A triangulation with several boundary cycles is first turned into a disk:
/// every cycle but the first gets a cone vertex over it. The cones are dropped
/// again from the returned layout.
pub fn packed_embedding(
    t: &Triangulation,
    root: VertexId,
    tol: f64,
) -> Result<(Embedding, PackedLayout), EmbeddingError> {
    let n = t.num_vertices();
    let capped;
    let disk = if t.is_disk() {
        t
    } else {
        let mut faces = t.faces().to_vec();
        let mut next = n;
        for cycle in &t.boundary_cycles()[1..] {
            for i in 0..cycle.len() {
                let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
                faces.push([b, a, next]);
            }
            next += 1;
        }
        capped = Triangulation::with_vertex_count(next, &faces)?;
        &capped
    };
    let radii = packing::uniform_boundary_radii(disk, 1.0);
    let label = packing::solve_radii(disk, &radii, tol)?;
    let mut layout = packing::layout_centers(disk, &label, root, tol)?;
    layout.centers.truncate(n);
    layout.label = PackingLabel {
        radii: label.radii[..n].to_vec(),
        prescribed: (0..n).map(|v| t.is_boundary(v)).collect(),
        ..label
    };
    let emb = embedding_from_layout(t, &layout)?;
    Ok((emb, layout))
}

/// Embedding of member `k`: the family's own coordinates where it has them,
/// otherwise the circle-packing embedding.
pub fn member_embedding(
    seq: &ExhaustionSequence,
    k: usize,
    tol: f64,
) -> Result<Embedding, EmbeddingError> {
    let t = seq.member(k)?;
    match seq.member_coords(k) {
        Some(coords) => Embedding::new(t.clone(), coords),
        None => packed_embedding(t, seq.root, tol).map(|(e, _)| e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodEmbeddingReport {
    /// Smallest face-corner angle, in radians.
    pub eta_min: f64,
    pub max_adjacent_length_ratio: f64,
    pub sausage_constant_observed: Option<f64>,
}

pub fn goodness_report(e: &Embedding) -> GoodEmbeddingReport {
    let mut eta_min = f64::INFINITY;
    let mut ratio: f64 = 1.0;
    for f in 0..e.tri.num_faces() {
        let p = e.face_points(f);
        for i in 0..3 {
            let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
            eta_min = eta_min.min(corner_angle(a, b, c));
            let (l1, l2) = (a.dist(b), a.dist(c));
            ratio = ratio.max(l1 / l2).max(l2 / l1);
        }
    }
    GoodEmbeddingReport {
        eta_min,
        max_adjacent_length_ratio: ratio,
        sausage_constant_observed: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SausageReport {
    /// Min over checked non-adjacent pairs of `d(e, f) / |e|`.
    pub c_obs: f64,
    /// `(e, f)` attaining `c_obs`; `e` is the edge whose length divides.
    pub witness: ((VertexId, VertexId), (VertexId, VertexId)),
    pub pairs_checked: u64,
    pub exhaustive: bool,
}

#[derive(Clone, Copy)]
struct PairScore {
    value: f64,
    e: usize,
    f: usize,
}

impl PairScore {
    const NONE: PairScore = PairScore { value: f64::INFINITY, e: usize::MAX, f: usize::MAX };

    fn better(self, other: PairScore) -> PairScore {
        let key = |s: &PairScore| (s.value, s.e.min(s.f), s.e.max(s.f));
        let (a, b) = (key(&self), key(&other));
        match a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))) {
            std::cmp::Ordering::Greater => other,
            _ => self,
        }
    }
}

fn pair_score(e: &Embedding, i: usize, j: usize) -> Option<PairScore> {
    let edges = e.tri.edges();
    let (a, b) = edges[i];
    let (c, d) = edges[j];
    if a == c || a == d || b == c || b == d {
        return None;
    }
    let p = &e.coords;
    let dist = segment_distance(p[a], p[b], p[c], p[d]);
    let (li, lj) = (p[a].dist(p[b]), p[c].dist(p[d]));
    // dividing by the longer edge gives the smaller ratio
    Some(if li >= lj {
        PairScore { value: dist / li, e: i, f: j }
    } else {
        PairScore { value: dist / lj, e: j, f: i }
    })
}

/// Non-adjacent edge pairs `(e, f)` and the ratio `d(e, f) / |e|`. All pairs
/// are checked when their number is at most `pair_cap`; otherwise every pair
/// within three hops plus random distant pairs drawn from `seed`.
pub fn sausage_check(e: &Embedding, pair_cap: u64, seed: u64) -> SausageReport {
    let m = e.tri.num_edges();
    let total = (m as u64) * (m as u64).saturating_sub(1) / 2;
    let (best, checked, exhaustive) = if total <= pair_cap {
        let best = (0..m)
            .into_par_iter()
            .map(|i| {
                (i + 1..m)
                    .filter_map(|j| pair_score(e, i, j))
                    .fold(PairScore::NONE, PairScore::better)
            })
            .reduce(|| PairScore::NONE, PairScore::better);
        (best, total, true)
    } else {
        let (best, local) = local_pairs(e);
        let budget = pair_cap.saturating_sub(local).max(m as u64);
        let mut rng = crate::rng::stream(seed, 0);
        let mut best = best;
        for _ in 0..budget {
            let (i, j) = (rng.random_range(0..m), rng.random_range(0..m));
            if let Some(s) = pair_score(e, i.min(j), i.max(j)) {
                best = best.better(s);
            }
        }
        (best, local + budget, false)
    };
    let edges = e.tri.edges();
    let witness = if best.e == usize::MAX {
        ((0, 0), (0, 0))
    } else {
        (edges[best.e], edges[best.f])
    };
    SausageReport { c_obs: best.value, witness, pairs_checked: checked, exhaustive }
}

fn local_pairs(e: &Embedding) -> (PairScore, u64) {
    let t = &e.tri;
    let index: BTreeMap<(VertexId, VertexId), usize> =
        t.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let results: Vec<(PairScore, u64)> = (0..t.num_edges())
        .into_par_iter()
        .map(|i| {
            let (a, b) = t.edges()[i];
            let mut depth = vec![usize::MAX; t.num_vertices()];
            let mut queue = VecDeque::from([a, b]);
            depth[a] = 0;
            depth[b] = 0;
            let mut near = Vec::new();
            while let Some(v) = queue.pop_front() {
                near.push(v);
                if depth[v] == 3 {
                    continue;
                }
                for &w in t.neighbors(v) {
                    if depth[w] == usize::MAX {
                        depth[w] = depth[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            let mut best = PairScore::NONE;
            let mut count = 0;
            for &v in &near {
                for &w in t.neighbors(v) {
                    let j = index[&(v.min(w), v.max(w))];
                    // each edge once: from its smaller endpoint when both are near
                    let other = if v < w { w } else { v };
                    if j <= i || (v > w && depth[other] != usize::MAX) {
                        continue;
                    }
                    if let Some(s) = pair_score(e, i, j) {
                        best = best.better(s);
                        count += 1;
                    }
                }
            }
            (best, count)
        })
        .collect();
    results
        .into_iter()
        .fold((PairScore::NONE, 0), |(b, c), (s, n)| (b.better(s), c + n))
}

/// The region covered by the closed faces and its boundary polylines.
#[derive(Debug, Clone)]
pub struct DomainApprox {
    pub boundary_cycles: Vec<Vec<VertexId>>,
    pub boundary: Vec<Vec<Point>>,
    pub bbox: BoundingBox,
    triangles: TriangleIndex,
    boundary_index: SegmentIndex,
    area: f64,
}

pub fn build_domain(e: &Embedding) -> DomainApprox {
    let t = &e.tri;
    let boundary_cycles = t.boundary_cycles().to_vec();
    let boundary: Vec<Vec<Point>> = boundary_cycles
        .iter()
        .map(|c| c.iter().map(|&v| e.coords[v]).collect())
        .collect();
    let segments = boundary
        .iter()
        .flat_map(|c| (0..c.len()).map(move |i| (c[i], c[(i + 1) % c.len()])))
        .collect();
    let tris: Vec<[Point; 3]> = (0..t.num_faces()).map(|f| e.face_points(f)).collect();
    let area = (0..t.num_faces()).map(|f| e.face_area(f)).sum();
    DomainApprox {
        boundary_cycles,
        boundary,
        bbox: e.bounding_box(),
        triangles: TriangleIndex::new(tris),
        boundary_index: SegmentIndex::new(segments),
        area,
    }
}

impl DomainApprox {
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Face containing `p` and its barycentric coordinates there.
    pub fn locate(&self, p: Point) -> Option<(FaceId, [f64; 3])> {
        self.triangles.locate(p)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.locate(p).is_some()
    }

    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.boundary_index.distance(p)
    }

    pub fn boundary_index(&self) -> &SegmentIndex {
        &self.boundary_index
    }
}

/// `.emb` text: `nv`, then `x y` per vertex in 17 significant digits.
pub fn write_emb(e: &Embedding) -> String {
    let mut out = String::new();
    writeln!(out, "{}", e.coords.len()).unwrap();
    for p in &e.coords {
        writeln!(out, "{:.16e} {:.16e}", p.x, p.y).unwrap();
    }
    out
}

pub fn read_emb(text: &str, tri: Triangulation) -> Result<Embedding, EmbeddingError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let n: usize = lines
        .next()
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| EmbeddingError::Parse("missing vertex count".into()))?;
    let mut coords = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| EmbeddingError::Parse(format!("bad record {i}")))?;
        let [x, y] = vals[..] else {
            return Err(EmbeddingError::Parse(format!("record {i} needs `x y`")));
        };
        coords.push(Point::new(x, y));
    }
    if coords.len() != n {
        return Err(EmbeddingError::Parse(format!("expected {n} records, got {}", coords.len())));
    }
    Embedding::new(tri, coords)
}

/// SVG drawing: faces, then circles when a layout is given, then boundary
/// cycles. Elements are emitted in index order.
pub fn render_svg(e: &Embedding, layout: Option<&PackedLayout>, size: f64) -> String {
    let mut bb = e.bounding_box();
    if let Some(l) = layout {
        for (c, r) in l.centers.iter().zip(&l.label.radii) {
            bb.min.x = bb.min.x.min(c.x - r);
            bb.min.y = bb.min.y.min(c.y - r);
            bb.max.x = bb.max.x.max(c.x + r);
            bb.max.y = bb.max.y.max(c.y + r);
        }
    }
    let span = bb.width().max(bb.height()).max(f64::MIN_POSITIVE);
    let margin = 0.02 * size;
    let scale = (size - 2.0 * margin) / span;
    let tx = |p: Point| {
        (margin + (p.x - bb.min.x) * scale, size - margin - (p.y - bb.min.y) * scale)
    };
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.0} {size:.0}">"#
    )
    .unwrap();
    writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##).unwrap();
    writeln!(out, r##"<g fill="none" stroke="#7a7a7a" stroke-width="0.5">"##).unwrap();
    for f in 0..e.tri.num_faces() {
        let pts: Vec<String> = e
            .face_points(f)
            .iter()
            .map(|&p| {
                let (x, y) = tx(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(out, r#"<polygon points="{}"/>"#, pts.join(" ")).unwrap();
    }
    writeln!(out, "</g>").unwrap();
    if let Some(l) = layout {
        writeln!(out, r##"<g fill="none" stroke="#2a6fb0" stroke-width="0.5">"##).unwrap();
        for (c, r) in l.centers.iter().zip(&l.label.radii) {
            let (x, y) = tx(*c);
            writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}"/>"#, r * scale).unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, r##"<g fill="none" stroke="#c0392b" stroke-width="1.5">"##).unwrap();
    for cycle in e.tri.boundary_cycles() {
        let pts: Vec<String> = cycle
            .iter()
            .map(|&v| {
                let (x, y) = tx(e.coords[v]);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(out, r#"<polygon points="{}"/>"#, pts.join(" ")).unwrap();
    }
    writeln!(out, "</g>\n</svg>").unwrap();
    out
}
