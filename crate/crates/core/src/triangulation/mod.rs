//! Finite planar triangulations with boundary.
//!
//! A [`Triangulation`] is built from a list of counterclockwise vertex triples
//! and validated on construction: every edge lies on one or two faces with
//! opposite orientations, every vertex link is a single fan, the complex is
//! connected and has genus zero. Everything else (edges, degrees, boundary
//! cycles, face adjacency) is derived once and never mutated.

mod augment;
mod families;
mod io;

pub use augment::{face_augment, face_augment_polygons};
pub use families::{ExhaustionSequence, Family, SourceSet, MAX_FAMILY_DEGREE};
pub use io::{read_tri, write_tri};

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

pub type VertexId = usize;
pub type FaceId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TriangulationError {
    #[error("no faces given")]
    Empty,
    #[error("edge ({0}, {1}) is not manifold")]
    NonManifold(VertexId, VertexId),
    #[error("vertex {0} has a non-manifold link")]
    NonManifoldVertex(VertexId),
    #[error("face complex is disconnected (vertex {0} unreachable)")]
    Disconnected(VertexId),
    #[error("face {0} repeats a vertex")]
    NonSimple(FaceId),
    #[error("edge ({0}, {1}) is traversed twice in the same direction")]
    OrientationInconsistent(VertexId, VertexId),
    #[error("surface has genus {0}, expected a planar piece")]
    NotPlanar(usize),
    #[error("maximum degree {found} exceeds bound {bound}")]
    DegreeBound { found: usize, bound: usize },
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    faces: Vec<[VertexId; 3]>,
    edges: Vec<(VertexId, VertexId)>,
    neighbors: Vec<Vec<VertexId>>,
    vertex_faces: Vec<Vec<FaceId>>,
    boundary: Vec<bool>,
    boundary_cycles: Vec<Vec<VertexId>>,
    half_edges: HashMap<(VertexId, VertexId), FaceId>,
}

impl Triangulation {
    /// Builds and validates a triangulation whose vertex set is `0..=max index`.
    pub fn from_faces(faces: &[[VertexId; 3]]) -> Result<Self, TriangulationError> {
        let n = faces.iter().flatten().max().map_or(0, |&m| m + 1);
        Self::with_vertex_count(n, faces)
    }

    pub fn with_vertex_count(
        n: usize,
        faces: &[[VertexId; 3]],
    ) -> Result<Self, TriangulationError> {
        if faces.is_empty() {
            return Err(TriangulationError::Empty);
        }
        let mut seen_faces = HashSet::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            if let Some(&v) = f.iter().find(|&&v| v >= n) {
                return Err(TriangulationError::IndexOutOfRange { index: v, limit: n });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(TriangulationError::NonSimple(fi));
            }
            let mut key = *f;
            key.sort_unstable();
            if !seen_faces.insert(key) {
                return Err(TriangulationError::NonManifold(key[0], key[1]));
            }
        }

        let mut edge_count: HashMap<(VertexId, VertexId), usize> = HashMap::new();
        for f in faces {
            for i in 0..3 {
                let (a, b) = (f[i], f[(i + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        if let Some((&(a, b), _)) = edge_count.iter().filter(|(_, &c)| c > 2).min() {
            return Err(TriangulationError::NonManifold(a, b));
        }

        let mut half_edges = HashMap::with_capacity(3 * faces.len());
        for (fi, f) in faces.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (f[i], f[(i + 1) % 3]);
                if half_edges.insert((a, b), fi).is_some() {
                    return Err(TriangulationError::OrientationInconsistent(a, b));
                }
            }
        }

        let mut edges: Vec<_> = edge_count.into_keys().collect();
        edges.sort_unstable();
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        let mut vertex_faces = vec![Vec::new(); n];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v].push(fi);
            }
        }

        if let Some(v) = (0..n).find(|&v| neighbors[v].is_empty()) {
            return Err(TriangulationError::Disconnected(v));
        }
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([0]);
        visited[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &neighbors[v] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = visited.iter().position(|&x| !x) {
            return Err(TriangulationError::Disconnected(v));
        }

        // Boundary half-edges are those whose twin is missing.
        let mut boundary_next: HashMap<VertexId, VertexId> = HashMap::new();
        let mut boundary = vec![false; n];
        for &(a, b) in half_edges.keys() {
            if !half_edges.contains_key(&(b, a)) {
                if boundary_next.insert(a, b).is_some() {
                    return Err(TriangulationError::NonManifoldVertex(a));
                }
                boundary[a] = true;
                boundary[b] = true;
            }
        }

        let tri = Triangulation {
            faces: faces.to_vec(),
            edges,
            neighbors,
            vertex_faces,
            boundary,
            boundary_cycles: Vec::new(),
            half_edges,
        };
        for v in 0..n {
            if tri.fan_size(v) != tri.vertex_faces[v].len() {
                return Err(TriangulationError::NonManifoldVertex(v));
            }
        }

        let mut starts: Vec<_> = boundary_next.keys().copied().collect();
        starts.sort_unstable();
        let mut on_cycle = HashSet::new();
        let mut cycles = Vec::new();
        for s in starts {
            if on_cycle.contains(&s) {
                continue;
            }
            let mut cycle = vec![s];
            on_cycle.insert(s);
            let mut v = boundary_next[&s];
            while v != s {
                cycle.push(v);
                on_cycle.insert(v);
                v = boundary_next[&v];
            }
            cycles.push(cycle);
        }

        let euler = n as i64 - tri.edges.len() as i64 + tri.faces.len() as i64;
        let genus2 = 2 - cycles.len() as i64 - euler;
        if genus2 != 0 {
            return Err(TriangulationError::NotPlanar((genus2.max(0) / 2) as usize));
        }
        Ok(Triangulation {
            boundary_cycles: cycles,
            ..tri
        })
    }

    /// Number of faces reachable around `v` by rotating across shared edges.
    fn fan_size(&self, v: VertexId) -> usize {
        let Some(&start) = self.vertex_faces[v].first() else {
            return 0;
        };
        let mut count = 1;
        // rotate clockwise: across the edge (v, next) of the current face
        let mut f = start;
        loop {
            let next = self.next_in_face(f, v);
            match self.half_edges.get(&(next, v)) {
                Some(&g) if g == start => return count,
                Some(&g) => {
                    count += 1;
                    f = g;
                }
                None => break,
            }
        }
        f = start;
        loop {
            let prev = self.prev_in_face(f, v);
            match self.half_edges.get(&(v, prev)) {
                Some(&g) => {
                    count += 1;
                    f = g;
                }
                None => return count,
            }
        }
    }

    fn local_index(&self, f: FaceId, v: VertexId) -> usize {
        self.faces[f].iter().position(|&w| w == v).expect("vertex on face")
    }

    /// Vertex following `v` counterclockwise in face `f`.
    pub fn next_in_face(&self, f: FaceId, v: VertexId) -> VertexId {
        self.faces[f][(self.local_index(f, v) + 1) % 3]
    }

    pub fn prev_in_face(&self, f: FaceId, v: VertexId) -> VertexId {
        self.faces[f][(self.local_index(f, v) + 2) % 3]
    }

    pub fn num_vertices(&self) -> usize {
        self.neighbors.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn faces(&self) -> &[[VertexId; 3]] {
        &self.faces
    }

    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn check_degree_bound(&self, bound: usize) -> Result<(), TriangulationError> {
        let found = self.max_degree();
        if found > bound {
            Err(TriangulationError::DegreeBound { found, bound })
        } else {
            Ok(())
        }
    }

    pub fn vertex_faces(&self, v: VertexId) -> &[FaceId] {
        &self.vertex_faces[v]
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.num_vertices()).filter(|&v| !self.boundary[v])
    }

    /// Boundary cycles, each listed in the direction induced by the faces
    /// (counterclockwise for the outer boundary of a disk).
    pub fn boundary_cycles(&self) -> &[Vec<VertexId>] {
        &self.boundary_cycles
    }

    pub fn is_disk(&self) -> bool {
        self.boundary_cycles.len() == 1
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.half_edges.contains_key(&(a, b)) || self.half_edges.contains_key(&(b, a))
    }

    /// Face containing the directed edge `a -> b`.
    pub fn face_of_half_edge(&self, a: VertexId, b: VertexId) -> Option<FaceId> {
        self.half_edges.get(&(a, b)).copied()
    }

    /// Face across local edge `i` (from corner `i` to corner `i+1`) of `f`.
    pub fn face_across(&self, f: FaceId, i: usize) -> Option<FaceId> {
        let tri = self.faces[f];
        self.face_of_half_edge(tri[(i + 1) % 3], tri[i])
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    /// Neighbors of `v` in counterclockwise order. For a boundary vertex the
    /// order starts at the neighbor following `v` along its boundary cycle.
    pub fn cyclic_neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let first = self.vertex_faces[v][0];
        let mut start = first;
        // rewind clockwise to the first face of the fan
        loop {
            let next = self.next_in_face(start, v);
            match self.half_edges.get(&(next, v)) {
                Some(&g) if g != first => start = g,
                _ => break,
            }
        }
        let mut out = vec![self.next_in_face(start, v)];
        let mut f = start;
        loop {
            let w = self.prev_in_face(f, v);
            if w == out[0] {
                break;
            }
            out.push(w);
            match self.half_edges.get(&(v, w)) {
                Some(&g) => f = g,
                None => break,
            }
        }
        out
    }

    /// Sub-triangulation induced by the vertex prefix `0..n`: the faces with
    /// all three corners below `n`.
    pub fn induced_prefix(&self, n: usize) -> Result<Self, TriangulationError> {
        let faces: Vec<_> = self
            .faces
            .iter()
            .filter(|f| f.iter().all(|&v| v < n))
            .copied()
            .collect();
        Self::with_vertex_count(n, &faces)
    }

    /// Graph distances from `sources`, `usize::MAX` where unreachable.
    pub fn bfs_distances(&self, sources: &[VertexId]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_vertices()];
        let mut queue = VecDeque::new();
        for &s in sources {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(v) = queue.pop_front() {
            for &w in &self.neighbors[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}
