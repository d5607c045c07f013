//! Euclidean circle packings with prescribed boundary radii.
//!
//! Interior radii are found by sweeping the interior vertices in index order
//! and replacing each radius with the one that would close its flower if all
//! petals had the same radius (uniform-neighbor update). When the sweeps are
//! slow, Newton steps in log-radius finish the solve. Centers are then laid
//! out breadth-first from the root.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{corner_angle, Point};
use crate::linalg::{pcg, CsrMatrix};
use crate::triangulation::{Triangulation, VertexId};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 1_000_000;
const INNER_TOL_FACTOR: f64 = 1e-2;
const SWEEPS_BEFORE_NEWTON: usize = 500;
const MAX_NEWTON_STEPS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PackingError {
    #[error("radius iteration stopped after {sweeps} sweeps with residual {residual:e}")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("triangulation has {0} boundary components, expected a disk")]
    NotADisk(usize),
    #[error("no radius prescribed for boundary vertex {0}")]
    MissingBoundaryRadius(VertexId),
    #[error("radius for vertex {0} is not positive and finite")]
    NonPositiveRadius(VertexId),
    #[error("layout closure error {error:e} exceeds {limit:e}")]
    LayoutInconsistent { error: f64, limit: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingLabel {
    pub radii: Vec<f64>,
    pub prescribed: Vec<bool>,
    /// Sup-norm of interior angle-sum residuals at termination.
    pub residual: f64,
    pub sweeps: usize,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackedLayout {
    pub label: PackingLabel,
    pub centers: Vec<Point>,
    pub root: VertexId,
    /// Max relative tangency residual over all edges after placement.
    pub closure_error: f64,
}

/// Angle at a circle of radius `r` in the triangle formed with tangent
/// neighbors of radii `a` and `b`.
pub fn flower_angle(r: f64, a: f64, b: f64) -> f64 {
    // half-angle form; asin of the sine loses precision for tiny `r`
    2.0 * (a * b).sqrt().atan2((r * (r + a + b)).sqrt())
}

pub fn angle_sum(t: &Triangulation, radii: &[f64], v: VertexId) -> f64 {
    t.vertex_faces(v)
        .iter()
        .map(|&f| {
            let (a, b) = (t.next_in_face(f, v), t.prev_in_face(f, v));
            flower_angle(radii[v], radii[a], radii[b])
        })
        .sum()
}

pub fn uniform_boundary_radii(t: &Triangulation, r: f64) -> BTreeMap<VertexId, f64> {
    (0..t.num_vertices())
        .filter(|&v| t.is_boundary(v))
        .map(|v| (v, r))
        .collect()
}

fn max_residual(t: &Triangulation, radii: &[f64], interior: &[VertexId]) -> f64 {
    interior
        .iter()
        .map(|&v| (angle_sum(t, radii, v) - TAU).abs())
        .fold(0.0, f64::max)
}

pub fn solve_radii(
    t: &Triangulation,
    boundary_radii: &BTreeMap<VertexId, f64>,
    tol: f64,
) -> Result<PackingLabel, PackingError> {
    if !t.is_disk() {
        return Err(PackingError::NotADisk(t.boundary_cycles().len()));
    }
    let n = t.num_vertices();
    let mut radii = vec![1.0; n];
    let mut prescribed = vec![false; n];
    for v in 0..n {
        if t.is_boundary(v) {
            let r = *boundary_radii
                .get(&v)
                .ok_or(PackingError::MissingBoundaryRadius(v))?;
            if !(r > 0.0 && r.is_finite()) {
                return Err(PackingError::NonPositiveRadius(v));
            }
            radii[v] = r;
            prescribed[v] = true;
        }
    }
    // start interior radii at the mean boundary radius
    let mean = boundary_radii.values().sum::<f64>() / boundary_radii.len().max(1) as f64;
    let interior: Vec<_> = t.interior_vertices().collect();
    for &v in &interior {
        radii[v] = mean;
    }

    // Layout error grows with BFS depth, so the angle sums are driven well
    // below `tol` to keep tangency within a small multiple of it.
    let target = (tol * INNER_TOL_FACTOR).max(4e-14);
    let mut sweeps = 0;
    let mut newton_steps = 0;
    let mut residual = max_residual(t, &radii, &interior);
    while residual > target {
        if sweeps >= MAX_SWEEPS {
            return Err(PackingError::NoConvergence { sweeps, residual });
        }
        if sweeps == SWEEPS_BEFORE_NEWTON {
            // slow geometric convergence (long thin regions); finish in log-radius
            if let Some((steps, r)) = newton_polish(t, &mut radii, &interior, target) {
                newton_steps = steps;
                residual = r;
                if residual <= target {
                    break;
                }
            }
        }
        let mut sweep_residual: f64 = 0.0;
        for &v in &interior {
            let theta = angle_sum(t, &radii, v);
            sweep_residual = sweep_residual.max((theta - TAU).abs());
            let k = t.vertex_faces(v).len() as f64;
            let beta = (theta / (2.0 * k)).sin();
            let delta = (PI / k).sin();
            let petal = radii[v] * beta / (1.0 - beta);
            radii[v] = petal * (1.0 - delta) / delta;
        }
        sweeps += 1;
        // the sweep residual lags by one update; confirm before stopping
        residual = if sweep_residual <= target {
            max_residual(t, &radii, &interior)
        } else {
            sweep_residual
        };
    }
    Ok(PackingLabel { radii, prescribed, residual, sweeps, newton_steps })
}

/// Partial derivatives of `flower_angle(r, a, b)` with respect to
/// `ln r`, `ln a` and `ln b`.
fn flower_angle_gradient(r: f64, a: f64, b: f64) -> [f64; 3] {
    let q = r * (r + a + b);
    let t = a * b / q;
    let dtheta_dt = 1.0 / ((1.0 + t) * t.sqrt());
    [
        -dtheta_dt * t * r * (2.0 * r + a + b) / q,
        dtheta_dt * t * (1.0 - r * a / q),
        dtheta_dt * t * (1.0 - r * b / q),
    ]
}

/// Newton iteration on the angle sums as functions of log-radii. The
/// Jacobian is the negative of a symmetric diagonally dominant M-matrix, so
/// each step is one conjugate-gradient solve. Returns `None` if a step fails
/// to reduce the residual, leaving `radii` at the best iterate.
fn newton_polish(
    t: &Triangulation,
    radii: &mut [f64],
    interior: &[VertexId],
    target: f64,
) -> Option<(usize, f64)> {
    let mut slot = vec![usize::MAX; t.num_vertices()];
    for (i, &v) in interior.iter().enumerate() {
        slot[v] = i;
    }
    let residuals = |radii: &[f64]| -> Vec<f64> {
        interior.iter().map(|&v| angle_sum(t, radii, v) - TAU).collect()
    };
    let sup = |r: &[f64]| r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut res = residuals(radii);
    for step in 1..=MAX_NEWTON_STEPS {
        let mut entries = Vec::new();
        for (i, &v) in interior.iter().enumerate() {
            for &f in t.vertex_faces(v) {
                let (a, b) = (t.next_in_face(f, v), t.prev_in_face(f, v));
                let g = flower_angle_gradient(radii[v], radii[a], radii[b]);
                for (w, d) in [(v, g[0]), (a, g[1]), (b, g[2])] {
                    if slot[w] != usize::MAX {
                        entries.push((i, slot[w], -d));
                    }
                }
            }
        }
        let m = CsrMatrix::from_triplets(interior.len(), entries);
        let (delta, _) = pcg(&m, &res, 1e-13, 10 * interior.len() + 100).ok()?;
        let before = sup(&res);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = {
                let mut r = radii.to_vec();
                for (i, &v) in interior.iter().enumerate() {
                    r[v] *= (lambda * delta[i]).exp();
                }
                r
            };
            let trial_res = residuals(&trial);
            if sup(&trial_res) < before {
                radii.copy_from_slice(&trial);
                res = trial_res;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return None;
            }
        }
        let now = sup(&res);
        if now <= target {
            return Some((step, now));
        }
    }
    None
}

/// Places centers breadth-first over faces from `root`; the root sits at the
/// origin and its smallest-index neighbor on the positive x-axis.
pub fn layout_centers(
    t: &Triangulation,
    label: &PackingLabel,
    root: VertexId,
    tol: f64,
) -> Result<PackedLayout, PackingError> {
    let r = &label.radii;
    let n = t.num_vertices();
    let mut centers = vec![Point::ORIGIN; n];
    let mut placed = vec![false; n];
    let first = t.neighbors(root)[0];
    placed[root] = true;
    placed[first] = true;
    centers[first] = Point::new(r[root] + r[first], 0.0);

    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut queued = vec![false; t.num_faces()];
    for f in [t.face_of_half_edge(root, first), t.face_of_half_edge(first, root)]
        .into_iter()
        .flatten()
    {
        queued[f] = true;
        queue.push_back(f);
    }
    while let Some(f) = queue.pop_front() {
        let tri = t.faces()[f];
        let missing: Vec<usize> = (0..3).filter(|&i| !placed[tri[i]]).collect();
        if let [i] = missing[..] {
            let (a, b, c) = (tri[(i + 1) % 3], tri[(i + 2) % 3], tri[i]);
            // (a, b, c) is counterclockwise with a, b placed
            let alpha = flower_angle(r[a], r[b], r[c]);
            let dir = (centers[b] - centers[a]) * (1.0 / centers[b].dist(centers[a]));
            centers[c] = centers[a] + dir.rotate(alpha) * (r[a] + r[c]);
            placed[c] = true;
        }
        for j in 0..3 {
            if let Some(g) = t.face_across(f, j) {
                if !queued[g] {
                    queued[g] = true;
                    queue.push_back(g);
                }
            }
        }
    }
    let closure_error = tangency_residual(t, r, &centers);
    let limit = 100.0 * tol;
    if closure_error > limit || !closure_error.is_finite() {
        return Err(PackingError::LayoutInconsistent { error: closure_error, limit });
    }
    Ok(PackedLayout { label: label.clone(), centers, root, closure_error })
}

/// Max over edges of `| |c_u - c_v| - (r_u + r_v) | / (r_u + r_v)`.
pub fn tangency_residual(t: &Triangulation, radii: &[f64], centers: &[Point]) -> f64 {
    t.edges()
        .iter()
        .map(|&(u, v)| {
            let s = radii[u] + radii[v];
            (centers[u].dist(centers[v]) - s).abs() / s
        })
        .fold(0.0, f64::max)
}

/// Angle sums recomputed from laid-out centers, for interior vertices.
pub fn layout_angle_residual(t: &Triangulation, centers: &[Point]) -> f64 {
    t.interior_vertices()
        .map(|v| {
            let sum: f64 = t
                .vertex_faces(v)
                .iter()
                .map(|&f| {
                    let (a, b) = (t.next_in_face(f, v), t.prev_in_face(f, v));
                    corner_angle(centers[v], centers[a], centers[b])
                })
                .sum();
            (sum - TAU).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingReport {
    pub max_ratio: f64,
    pub worst_edge: (VertexId, VertexId),
    /// Max ratio over edges with both endpoints interior (1.0 if none).
    pub interior_max_ratio: f64,
    /// Max ratio keyed by the larger endpoint degree.
    pub by_degree: BTreeMap<usize, f64>,
}

pub fn ring_report(t: &Triangulation, label: &PackingLabel) -> RingReport {
    let r = &label.radii;
    let mut report = RingReport {
        max_ratio: 1.0,
        worst_edge: t.edges()[0],
        interior_max_ratio: 1.0,
        by_degree: BTreeMap::new(),
    };
    for &(u, v) in t.edges() {
        let ratio = (r[u] / r[v]).max(r[v] / r[u]);
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.worst_edge = (u, v);
        }
        if !t.is_boundary(u) && !t.is_boundary(v) {
            report.interior_max_ratio = report.interior_max_ratio.max(ratio);
        }
        let d = t.degree(u).max(t.degree(v));
        let slot = report.by_degree.entry(d).or_insert(1.0);
        *slot = slot.max(ratio);
    }
    report
}

/// `.pack` text: `nv`, then `x y r` per vertex in 17 significant digits.
pub fn write_pack(layout: &PackedLayout) -> String {
    let mut out = String::new();
    writeln!(out, "{}", layout.centers.len()).unwrap();
    for (c, r) in layout.centers.iter().zip(&layout.label.radii) {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", c.x, c.y, r).unwrap();
    }
    out
}

/// Parses a `.pack` file into centers and radii.
pub fn read_pack(text: &str) -> Result<(Vec<Point>, Vec<f64>), PackingError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let n: usize = lines
        .next()
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| PackingError::Parse("missing vertex count".into()))?;
    let mut centers = Vec::with_capacity(n);
    let mut radii = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| PackingError::Parse(format!("bad record {i}")))?;
        let [x, y, r] = vals[..] else {
            return Err(PackingError::Parse(format!("record {i} needs `x y r`")));
        };
        centers.push(Point::new(x, y));
        radii.push(r);
    }
    if centers.len() != n {
        return Err(PackingError::Parse(format!("expected {n} records, got {}", centers.len())));
    }
    Ok((centers, radii))
}
