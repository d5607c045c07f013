//! Canonical test families and their exhaustions.
//!
//! Every family is generated once at its largest size with vertices numbered
//! so that each exhaustion member is a prefix `0..n_k` of the vertex set.
//! Members are then the induced sub-triangulations on those prefixes.
//!
//! Tree-of-tubes junction template (one per tube end): the frontier ring `A`
//! of `c` vertices is joined by a zipper strip to a middle ring `M` of
//! `2c + 2` vertices. `M` is joined by an equal-size strip to the closed walk
//! `b0 b1 .. b(c-1) b0 c0 c1 .. c(c-1) c0` that runs around two child rings
//! `B` and `C` connected by the bridge edge `b0 c0`. The child rings become
//! the frontiers of the two child tubes. Maximum degree stays at 9 for
//! `c = 5` (attained at the bridge endpoints).

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Triangulation, TriangulationError, VertexId};
use crate::geometry::Point;

/// Degree bound asserted for every generated member.
pub const MAX_FAMILY_DEGREE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    LatticeBall { radius: usize },
    HyperbolicBall { degree: usize, radius: usize },
    Tube { circumference: usize, length: usize },
    TreeOfTubes { circumference: usize, segment_len: usize, depth: usize },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::LatticeBall { .. } => "lattice_ball",
            Family::HyperbolicBall { .. } => "hyperbolic_ball",
            Family::Tube { .. } => "tube",
            Family::TreeOfTubes { .. } => "tree_of_tubes",
        }
    }

    pub fn generate(&self) -> Result<ExhaustionSequence, TriangulationError> {
        let range = |msg: String| Err(TriangulationError::ParamOutOfRange(msg));
        match *self {
            Family::LatticeBall { radius } => {
                if radius < 1 {
                    return range(format!("lattice_ball radius {radius} < 1"));
                }
                lattice_ball(radius)
            }
            Family::HyperbolicBall { degree, radius } => {
                if degree != 7 {
                    return range(format!("hyperbolic_ball degree {degree} != 7"));
                }
                if radius < 1 {
                    return range(format!("hyperbolic_ball radius {radius} < 1"));
                }
                layered_ball(degree, radius)
            }
            Family::Tube { circumference, length } => {
                if circumference < 3 || length < 1 {
                    return range(format!("tube({circumference}, {length})"));
                }
                tube(circumference, length)
            }
            Family::TreeOfTubes { circumference, segment_len, depth } => {
                if circumference < 3 || segment_len < 1 || depth < 1 {
                    return range(format!(
                        "tree_of_tubes({circumference}, {segment_len}, {depth})"
                    ));
                }
                tree_of_tubes(circumference, segment_len, depth)
            }
        }
    }
}

/// The set `K` of a capacity problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSet {
    pub vertices: Vec<VertexId>,
    /// Optional compact polygonal region carrying the continuous `K`.
    pub region: Option<Vec<Point>>,
}

impl SourceSet {
    pub fn vertices(mut vertices: Vec<VertexId>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Self { vertices, region: None }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn check_interior(&self, t: &Triangulation) -> Result<(), TriangulationError> {
        if self.vertices.is_empty() {
            return Err(TriangulationError::ParamOutOfRange("empty source set".into()));
        }
        for &v in &self.vertices {
            if v >= t.num_vertices() {
                return Err(TriangulationError::IndexOutOfRange {
                    index: v,
                    limit: t.num_vertices(),
                });
            }
            if t.is_boundary(v) {
                return Err(TriangulationError::ParamOutOfRange(format!(
                    "source vertex {v} lies on the boundary"
                )));
            }
        }
        Ok(())
    }
}

/// Nested finite members `T_1 ⊂ T_2 ⊂ …` with stable vertex numbering.
#[derive(Debug, Clone)]
pub struct ExhaustionSequence {
    pub family: Family,
    pub root: VertexId,
    pub source: SourceSet,
    members: Vec<Triangulation>,
    /// Explicit straight-line coordinates for the whole vertex set, when the
    /// family comes with one (lattice and tube).
    coords: Option<Vec<Point>>,
}

impl ExhaustionSequence {
    pub fn new(
        family: Family,
        root: VertexId,
        source: SourceSet,
        members: Vec<Triangulation>,
        coords: Option<Vec<Point>>,
    ) -> Result<Self, TriangulationError> {
        if members.is_empty() {
            return Err(TriangulationError::Empty);
        }
        for (i, t) in members.iter().enumerate() {
            source.check_interior(t)?;
            t.check_degree_bound(MAX_FAMILY_DEGREE)?;
            if let Some(next) = members.get(i + 1) {
                check_nested(t, next)?;
            }
        }
        Ok(Self { family, root, source, members, coords })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member `k`, 1-based.
    pub fn member(&self, k: usize) -> Result<&Triangulation, TriangulationError> {
        if k == 0 || k > self.members.len() {
            return Err(TriangulationError::IndexOutOfRange {
                index: k,
                limit: self.members.len(),
            });
        }
        Ok(&self.members[k - 1])
    }

    pub fn members(&self) -> &[Triangulation] {
        &self.members
    }

    pub fn last(&self) -> &Triangulation {
        self.members.last().expect("non-empty")
    }

    /// Natural coordinates restricted to member `k`, if the family has them.
    pub fn member_coords(&self, k: usize) -> Option<Vec<Point>> {
        let n = self.member(k).ok()?.num_vertices();
        self.coords.as_ref().map(|c| c[..n].to_vec())
    }

    /// Number of connected components of `T_{k+1} \ T_k` that reach the
    /// boundary of `T_{k+1}`; a finite stand-in for the number of ends.
    pub fn complement_components(&self, k: usize) -> Result<usize, TriangulationError> {
        if k == 0 || k + 1 > self.members.len() {
            return Err(TriangulationError::IndexOutOfRange {
                index: k,
                limit: self.members.len().saturating_sub(1),
            });
        }
        let inner = self.members[k - 1].num_vertices();
        let outer = &self.members[k];
        let n = outer.num_vertices();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in inner..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut touches = false;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                touches |= outer.is_boundary(v);
                for &w in outer.neighbors(v) {
                    if w >= inner && !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            if touches {
                count += 1;
            }
        }
        Ok(count)
    }
}

/// `small` must be the induced prefix of `big`, with interior vertices of
/// `small` keeping their full set of incident faces.
fn check_nested(small: &Triangulation, big: &Triangulation) -> Result<(), TriangulationError> {
    let n = small.num_vertices();
    let bad = |msg: String| Err(TriangulationError::InvalidEmbedding(msg));
    if n > big.num_vertices() {
        return bad("exhaustion members are not nested".into());
    }
    let induced = big.faces().iter().filter(|f| f.iter().all(|&v| v < n)).count();
    if induced != small.num_faces() {
        return bad("member is not an induced sub-triangulation".into());
    }
    for v in small.interior_vertices() {
        if small.vertex_faces(v).len() != big.vertex_faces(v).len() {
            return bad(format!("interior vertex {v} gains faces in the next member"));
        }
    }
    Ok(())
}

fn members_from_prefixes(
    full: &Triangulation,
    prefixes: &[usize],
) -> Result<Vec<Triangulation>, TriangulationError> {
    prefixes.iter().map(|&n| full.induced_prefix(n)).collect()
}

fn lattice_ball(radius: usize) -> Result<ExhaustionSequence, TriangulationError> {
    let r = radius as i64;
    // axial coordinates, ring by ring; each ring starts at (k, -k) and walks
    // counterclockwise
    let dirs = [(0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0)];
    let mut axial = vec![(0i64, 0i64)];
    let mut prefixes = Vec::new();
    for k in 1..=r {
        let (mut q, mut s) = (k, -k);
        for (dq, ds) in dirs {
            for _ in 0..k {
                axial.push((q, s));
                q += dq;
                s += ds;
            }
        }
        prefixes.push(axial.len());
    }
    let index: std::collections::HashMap<_, _> =
        axial.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut faces = Vec::new();
    // the base corner of a triangle may itself lie outside the ball
    let bases = (-r - 1..=r).flat_map(|q| (-r - 1..=r).map(move |s| (q, s)));
    for (q, s) in bases {
        let up = [(q, s), (q + 1, s), (q, s + 1)];
        let down = [(q + 1, s), (q + 1, s + 1), (q, s + 1)];
        for tri in [up, down] {
            if let (Some(&a), Some(&b), Some(&c)) =
                (index.get(&tri[0]), index.get(&tri[1]), index.get(&tri[2]))
            {
                faces.push([a, b, c]);
            }
        }
    }
    let coords = axial
        .iter()
        .map(|&(q, s)| Point::new(q as f64 + 0.5 * s as f64, s as f64 * 3f64.sqrt() / 2.0))
        .collect();
    let full = Triangulation::with_vertex_count(axial.len(), &faces)?;
    let members = members_from_prefixes(&full, &prefixes)?;
    ExhaustionSequence::new(
        Family::LatticeBall { radius },
        0,
        SourceSet::vertices(vec![0]),
        members,
        Some(coords),
    )
}

/// Ball of radius `radius` in the triangulation where every interior vertex
/// has degree `degree`, grown ring by ring around vertex 0.
fn layered_ball(degree: usize, radius: usize) -> Result<ExhaustionSequence, TriangulationError> {
    let mut faces = Vec::new();
    let ring: Vec<VertexId> = (1..=degree).collect();
    for i in 0..degree {
        faces.push([0, ring[i], ring[(i + 1) % degree]]);
    }
    let mut deg = vec![degree];
    deg.extend(std::iter::repeat_n(3, degree));
    let mut next_id = degree + 1;
    let mut prefixes = vec![next_id];
    let mut ring = ring;
    for _ in 1..radius {
        let m = ring.len();
        let mut owned: Vec<Vec<VertexId>> = Vec::with_capacity(m);
        for &v in &ring {
            let needed = degree.checked_sub(deg[v]).filter(|&t| t >= 1).ok_or_else(|| {
                TriangulationError::ParamOutOfRange(format!("degree {degree} too small to grow"))
            })?;
            let ids: Vec<_> = (next_id..next_id + needed - 1).collect();
            next_id += needed - 1;
            owned.push(ids);
        }
        deg.resize(next_id, 0);
        // last new neighbor of ring[i], shared with ring[i+1]
        let last = |i: usize| -> VertexId {
            let mut j = i;
            loop {
                if let Some(&v) = owned[j % m].last() {
                    return v;
                }
                j += m - 1;
            }
        };
        for i in 0..m {
            let v = ring[i];
            let mut fan = vec![last((i + m - 1) % m)];
            fan.extend(&owned[i]);
            for w in fan.windows(2) {
                faces.push([v, w[0], w[1]]);
            }
            let shared = *fan.last().unwrap();
            faces.push([ring[(i + 1) % m], v, shared]);
        }
        ring = owned.into_iter().flatten().collect();
        recount_degrees(&faces, &mut deg);
        prefixes.push(next_id);
    }
    let full = Triangulation::with_vertex_count(next_id, &faces)?;
    let members = members_from_prefixes(&full, &prefixes)?;
    ExhaustionSequence::new(
        Family::HyperbolicBall { degree, radius },
        0,
        SourceSet::vertices(vec![0]),
        members,
        None,
    )
}

fn recount_degrees(faces: &[[VertexId; 3]], deg: &mut [usize]) {
    let mut edges: Vec<_> = faces
        .iter()
        .flat_map(|f| (0..3).map(move |i| (f[i].min(f[(i + 1) % 3]), f[i].max(f[(i + 1) % 3]))))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    deg.iter_mut().for_each(|d| *d = 0);
    for (a, b) in edges {
        deg[a] += 1;
        deg[b] += 1;
    }
}

/// Faces of the annular strip between `inner` and `outer`, both listed
/// counterclockwise with the unfilled side of `inner` facing `outer`.
fn strip(inner: &[VertexId], outer: &[VertexId]) -> Vec<[VertexId; 3]> {
    let (p, q) = (inner.len(), outer.len());
    let mut faces = Vec::with_capacity(p + q);
    let (mut i, mut j) = (0, 0);
    while i < p || j < q {
        let advance_inner = j == q || (i < p && (i + 1) * q <= (j + 1) * p);
        if advance_inner {
            faces.push([inner[i], outer[j % q], inner[(i + 1) % p]]);
            i += 1;
        } else {
            faces.push([outer[j], outer[(j + 1) % q], inner[i % p]]);
            j += 1;
        }
    }
    faces
}

fn tube(circumference: usize, length: usize) -> Result<ExhaustionSequence, TriangulationError> {
    let c = circumference;
    // ring order 0, 1, -1, 2, -2, …
    let slot = |j: i64| -> usize {
        match j {
            0 => 0,
            j if j > 0 => 2 * j as usize - 1,
            j => 2 * (-j) as usize,
        }
    };
    let id = |j: i64, i: usize| slot(j) * c + i % c;
    let l = length as i64;
    let mut faces = Vec::new();
    for j in -l..l {
        let inner: Vec<_> = (0..c).map(|i| id(j, i)).collect();
        let outer: Vec<_> = (0..c).map(|i| id(j + 1, i)).collect();
        faces.extend(strip(&inner, &outer));
    }
    // log-polar layout with near-equilateral cells: ring j at radius q^j,
    // rotated by half a step per ring
    let step = 2.0 * PI / c as f64;
    let log_q = step * 3f64.sqrt() / 2.0;
    let n = (2 * length + 1) * c;
    let mut coords = vec![Point::ORIGIN; n];
    for j in -l..=l {
        for i in 0..c {
            let angle = step * (i as f64 + 0.5 * j as f64);
            coords[id(j, i)] = Point::polar((log_q * j as f64).exp(), angle);
        }
    }
    let full = Triangulation::with_vertex_count(n, &faces)?;
    let prefixes: Vec<_> = (1..=length).map(|k| (2 * k + 1) * c).collect();
    let members = members_from_prefixes(&full, &prefixes)?;
    ExhaustionSequence::new(
        Family::Tube { circumference, length },
        0,
        SourceSet::vertices((0..c).collect()),
        members,
        Some(coords),
    )
}

fn tree_of_tubes(
    circumference: usize,
    segment_len: usize,
    depth: usize,
) -> Result<ExhaustionSequence, TriangulationError> {
    let c = circumference;
    let mut next_id = 1;
    let fresh = |next_id: &mut usize, k: usize| -> Vec<VertexId> {
        let ids = (*next_id..*next_id + k).collect();
        *next_id += k;
        ids
    };
    let ring0 = fresh(&mut next_id, c);
    let mut faces: Vec<[VertexId; 3]> =
        (0..c).map(|i| [0, ring0[i], ring0[(i + 1) % c]]).collect();
    let mut frontiers = vec![ring0];
    let mut prefixes = Vec::with_capacity(depth);
    for _ in 0..depth {
        let mut children = Vec::with_capacity(2 * frontiers.len());
        for frontier in frontiers {
            let mut ring = frontier;
            for _ in 0..segment_len {
                let next = fresh(&mut next_id, c);
                faces.extend(strip(&ring, &next));
                ring = next;
            }
            // junction, drawn with the parent outside and the holes inside
            let a: Vec<_> = ring.iter().rev().copied().collect();
            let m = fresh(&mut next_id, 2 * c + 2);
            let b = fresh(&mut next_id, c);
            let cc = fresh(&mut next_id, c);
            let mut walk = b.clone();
            walk.push(b[0]);
            walk.extend(&cc);
            walk.push(cc[0]);
            faces.extend(strip(&m, &a));
            faces.extend(strip(&walk, &m));
            children.push(b.into_iter().rev().collect());
            children.push(cc.into_iter().rev().collect());
        }
        frontiers = children;
        prefixes.push(next_id);
    }
    let full = Triangulation::with_vertex_count(next_id, &faces)?;
    let members = members_from_prefixes(&full, &prefixes)?;
    ExhaustionSequence::new(
        Family::TreeOfTubes { circumference, segment_len, depth },
        0,
        SourceSet::vertices(vec![0]),
        members,
        None,
    )
}
