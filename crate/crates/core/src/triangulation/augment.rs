//! Face augmentation: every face gains a vertex at the center of mass of its
//! corners, joined to each corner. Polygonal faces of `m` sides become `m`
//! triangles; the outer boundary is untouched.

use super::{Triangulation, TriangulationError, VertexId};
use crate::geometry::{find_crossing, Point};

pub fn face_augment(
    t: &Triangulation,
    coords: &[Point],
) -> Result<(Triangulation, Vec<Point>), TriangulationError> {
    let polygons: Vec<Vec<VertexId>> = t.faces().iter().map(|f| f.to_vec()).collect();
    face_augment_polygons(t.num_vertices(), &polygons, coords)
}

/// Augments a straight-line embedded planar graph given by counterclockwise
/// face cycles.
pub fn face_augment_polygons(
    n: usize,
    faces: &[Vec<VertexId>],
    coords: &[Point],
) -> Result<(Triangulation, Vec<Point>), TriangulationError> {
    if coords.len() != n {
        return Err(TriangulationError::InvalidEmbedding(format!(
            "{} coordinates for {n} vertices",
            coords.len()
        )));
    }
    let mut edges: Vec<(VertexId, VertexId)> = faces
        .iter()
        .flat_map(|f| (0..f.len()).map(move |i| (f[i], f[(i + 1) % f.len()])))
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    if let Some((e, f)) = find_crossing(&edges, coords) {
        return Err(TriangulationError::InvalidEmbedding(format!(
            "edges {e:?} and {f:?} cross"
        )));
    }

    let mut out_coords = coords.to_vec();
    let mut triangles = Vec::new();
    for face in faces {
        if face.len() < 3 {
            return Err(TriangulationError::ParamOutOfRange(format!(
                "face with {} sides",
                face.len()
            )));
        }
        let center = out_coords.len();
        let sum = face.iter().fold(Point::ORIGIN, |acc, &v| acc + coords[v]);
        out_coords.push(sum * (1.0 / face.len() as f64));
        for i in 0..face.len() {
            triangles.push([face[i], face[(i + 1) % face.len()], center]);
        }
    }
    let t = Triangulation::with_vertex_count(out_coords.len(), &triangles)?;
    Ok((t, out_coords))
}
