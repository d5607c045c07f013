//! Moving functions between the triangulation and the plane: linear
//! interpolation over faces, ball-averaging back to vertices, and empirical
//! constants for the two energy comparisons.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::discrete_energy;
use crate::embedding::{sausage_check, DomainApprox, Embedding, DEFAULT_PAIR_CAP};
use crate::geometry::Point;
use crate::rng;
use crate::triangulation::{FaceId, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("point ({}, {}) lies outside the domain", .0.x, .0.y)]
    PointOutsideDomain(Point),
    #[error("face {0} is degenerate")]
    DegenerateFace(FaceId),
    #[error("averaging ball at vertex {vertex} has radius {radius:e} but clearance {clearance:e}")]
    BallEscapesDomain { vertex: VertexId, radius: f64, clearance: f64 },
    #[error("function has {found} values for {expected} vertices")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid smoothing configuration: {0}")]
    InvalidConfig(String),
    #[error("({0}, {1}) is not an edge")]
    NotAnEdge(VertexId, VertexId),
}

/// Vertex values extended linearly over each face.
#[derive(Debug, Clone)]
pub struct PlFunction<'a> {
    pub emb: &'a Embedding,
    pub domain: &'a DomainApprox,
    pub values: Vec<f64>,
}

pub fn interpolate<'a>(
    u: &[f64],
    emb: &'a Embedding,
    domain: &'a DomainApprox,
) -> Result<PlFunction<'a>, TransferError> {
    let n = emb.triangulation().num_vertices();
    if u.len() != n {
        return Err(TransferError::LengthMismatch { expected: n, found: u.len() });
    }
    Ok(PlFunction { emb, domain, values: u.to_vec() })
}

impl PlFunction<'_> {
    pub fn eval(&self, p: Point) -> Result<f64, TransferError> {
        let (f, l) = self.domain.locate(p).ok_or(TransferError::PointOutsideDomain(p))?;
        let [a, b, c] = self.emb.triangulation().faces()[f];
        Ok(l[0] * self.values[a] + l[1] * self.values[b] + l[2] * self.values[c])
    }

    /// Constant gradient on face `f`.
    pub fn gradient(&self, f: FaceId) -> Result<Point, TransferError> {
        let [pa, pb, pc] = self.emb.face_points(f);
        let [a, b, c] = self.emb.triangulation().faces()[f];
        let (e1, e2) = (pb - pa, pc - pa);
        let (d1, d2) = (self.values[b] - self.values[a], self.values[c] - self.values[a]);
        let det = e1.cross(e2);
        if det == 0.0 {
            return Err(TransferError::DegenerateFace(f));
        }
        Ok(Point::new((d1 * e2.y - d2 * e1.y) / det, (e1.x * d2 - e2.x * d1) / det))
    }
}

/// `Σ_faces |∇ũ|² · area`.
pub fn pl_energy(f: &PlFunction) -> Result<f64, TransferError> {
    (0..f.emb.triangulation().num_faces())
        .map(|face| Ok(f.gradient(face)?.norm2() * f.emb.face_area(face)))
        .sum()
}

fn shortest_side(p: &[Point; 3]) -> f64 {
    p[0].dist(p[1]).min(p[1].dist(p[2])).min(p[2].dist(p[0]))
}

/// Largest possible `|∇ũ| · ℓ_min / max|u_i − u_j|` on one face, where
/// `ℓ_min` is its shortest side. The ratio is convex in the values, so the
/// supremum sits at a vertex of `{max|u_i − u_j| ≤ 1}`, i.e. at a hat
/// function; this equals `ℓ_min` over the smallest altitude.
pub fn face_gradient_constant(p: [Point; 3]) -> f64 {
    let area2 = crate::geometry::orient(p[0], p[1], p[2]).abs();
    let longest = p[0].dist(p[1]).max(p[1].dist(p[2])).max(p[2].dist(p[0]));
    shortest_side(&p) * longest / area2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBound {
    /// Max over faces of `|∇ũ| · ℓ_min / max|u_i − u_j|` for this function.
    pub c_obs: f64,
    pub worst_face: Option<FaceId>,
    /// Max over faces of `area / ℓ_min²`.
    pub shape_factor: f64,
}

impl GradientBound {
    /// Each face contributes at most `c_obs² · area/ℓ² · max diff²` and every
    /// edge lies in at most two faces.
    pub fn forward_constant(&self) -> f64 {
        2.0 * self.c_obs * self.c_obs * self.shape_factor
    }
}

pub fn gradient_bound_check(f: &PlFunction) -> Result<GradientBound, TransferError> {
    let t = f.emb.triangulation();
    let mut out = GradientBound { c_obs: 0.0, worst_face: None, shape_factor: 0.0 };
    for face in 0..t.num_faces() {
        let p = f.emb.face_points(face);
        let l = shortest_side(&p);
        out.shape_factor = out.shape_factor.max(f.emb.face_area(face) / (l * l));
        let vals = t.faces()[face].map(|v| f.values[v]);
        let spread = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if spread == 0.0 {
            continue;
        }
        let c = f.gradient(face)?.norm() * l / spread;
        if c > out.c_obs {
            out.c_obs = c;
            out.worst_face = Some(face);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SmoothingMethod {
    MonteCarlo { samples: usize },
    Quadrature { radial: usize, angular: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    /// Averaging radius as a fraction of the shortest incident edge.
    pub c_ball: f64,
    pub method: SmoothingMethod,
    pub seed: u64,
}

impl SmoothingConfig {
    /// Ball fraction set to the observed sausage constant of `emb`.
    pub fn for_embedding(emb: &Embedding, method: SmoothingMethod, seed: u64) -> Self {
        let c_ball = sausage_check(emb, DEFAULT_PAIR_CAP, seed).c_obs;
        Self { c_ball, method, seed }
    }

    fn validate(&self) -> Result<(), TransferError> {
        if !(self.c_ball > 0.0 && self.c_ball.is_finite()) {
            return Err(TransferError::InvalidConfig(format!("c_ball = {}", self.c_ball)));
        }
        match self.method {
            SmoothingMethod::MonteCarlo { samples: 0 } => {
                Err(TransferError::InvalidConfig("zero samples".into()))
            }
            SmoothingMethod::Quadrature { radial, angular } if radial == 0 || angular == 0 => {
                Err(TransferError::InvalidConfig("empty quadrature grid".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Shortest edge at `v`.
pub fn local_scale(emb: &Embedding, v: VertexId) -> f64 {
    emb.triangulation()
        .neighbors(v)
        .iter()
        .map(|&w| emb.edge_length(v, w))
        .fold(f64::INFINITY, f64::min)
}

fn ball_points(center: Point, radius: f64, method: SmoothingMethod, seed: u64, stream: u64) -> Vec<Point> {
    match method {
        SmoothingMethod::MonteCarlo { samples } => {
            let mut rng = rng::stream(seed, stream);
            (0..samples)
                .map(|_| {
                    let r = radius * rng.random::<f64>().sqrt();
                    center + Point::polar(r, TAU * rng.random::<f64>())
                })
                .collect()
        }
        SmoothingMethod::Quadrature { radial, angular } => {
            // equal-area rings, midpoint angles: every node has the same weight
            let mut pts = Vec::with_capacity(radial * angular);
            for i in 0..radial {
                let r = radius * ((i as f64 + 0.5) / radial as f64).sqrt();
                for j in 0..angular {
                    pts.push(center + Point::polar(r, TAU * (j as f64 + 0.5) / angular as f64));
                }
            }
            pts
        }
    }
}

/// Ball averaging as a linear map on vertex values. Row `x` holds the mean
/// barycentric weights of the sample points around `x`; boundary vertices
/// keep their own value. Rows are applied as `u_x + Σ w_v (u_v − u_x)` so that
/// locally constant data is reproduced exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingOperator {
    rows: Vec<Vec<(VertexId, f64)>>,
    pub config: SmoothingConfig,
}

impl SmoothingOperator {
    pub fn new(
        emb: &Embedding,
        domain: &DomainApprox,
        config: SmoothingConfig,
    ) -> Result<Self, TransferError> {
        config.validate()?;
        let t = emb.triangulation();
        let rows = (0..t.num_vertices())
            .into_par_iter()
            .map(|x| {
                if t.is_boundary(x) {
                    return Ok(vec![(x, 1.0)]);
                }
                let center = emb.coords()[x];
                let radius = config.c_ball * local_scale(emb, x);
                let clearance = domain.distance_to_boundary(center);
                if radius > clearance * (1.0 + 1e-12) {
                    return Err(TransferError::BallEscapesDomain { vertex: x, radius, clearance });
                }
                let pts = ball_points(center, radius, config.method, config.seed, x as u64);
                let mut acc: HashMap<VertexId, f64> = HashMap::new();
                let w = 1.0 / pts.len() as f64;
                for p in pts {
                    let (f, l) = domain.locate(p).ok_or(TransferError::PointOutsideDomain(p))?;
                    for (v, lv) in t.faces()[f].iter().zip(l) {
                        *acc.entry(*v).or_insert(0.0) += w * lv;
                    }
                }
                let mut row: Vec<_> = acc.into_iter().collect();
                row.sort_by_key(|e| e.0);
                Ok(row)
            })
            .collect::<Result<Vec<_>, TransferError>>()?;
        Ok(Self { rows, config })
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .enumerate()
            .map(|(x, row)| u[x] + row.iter().map(|&(v, w)| w * (u[v] - u[x])).sum::<f64>())
            .collect()
    }
}

/// `u(x) = mean of f over B(x, c_ball · r_x)`.
pub fn smooth(f: &PlFunction, config: SmoothingConfig) -> Result<Vec<f64>, TransferError> {
    Ok(SmoothingOperator::new(f.emb, f.domain, config)?.apply(&f.values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub edge: (VertexId, VertexId),
    /// Max cell mass times `grid²`: the density of Z in units of `r_x⁻²`.
    pub c_emp: f64,
    pub samples: usize,
    pub outside_support: usize,
    pub support_ok: bool,
}

/// Density of `Z`, uniform on the segment between `X ∈ B(x, c r_x)` and
/// `Y ∈ B(y, c r_y)`, histogrammed on cells of side `r_x / grid`.
pub fn density_check(
    emb: &Embedding,
    domain: &DomainApprox,
    edge: (VertexId, VertexId),
    config: SmoothingConfig,
    samples: usize,
    grid: usize,
) -> Result<DensityReport, TransferError> {
    config.validate()?;
    let (x, y) = edge;
    let t = emb.triangulation();
    if !t.has_edge(x, y) {
        return Err(TransferError::NotAnEdge(x, y));
    }
    let (px, py) = (emb.coords()[x], emb.coords()[y]);
    let (rx, ry) = (local_scale(emb, x), local_scale(emb, y));
    let delta = rx / grid as f64;
    let mut rng = rng::stream(config.seed, ((x as u64) << 32) ^ y as u64);
    let mut cells: HashMap<(i64, i64), u64> = HashMap::new();
    let mut outside = 0;
    for _ in 0..samples {
        let a = px + Point::polar(config.c_ball * rx * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
        let b = py + Point::polar(config.c_ball * ry * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
        let z = a.lerp(b, rng.random::<f64>());
        let inside = domain
            .locate(z)
            .is_some_and(|(f, _)| t.faces()[f].iter().any(|&v| v == x || v == y));
        if !inside {
            outside += 1;
        }
        let key = (((z.x - px.x) / delta).floor() as i64, ((z.y - px.y) / delta).floor() as i64);
        *cells.entry(key).or_insert(0) += 1;
    }
    let max_mass = cells.values().copied().max().unwrap_or(0) as f64 / samples as f64;
    Ok(DensityReport {
        edge,
        c_emp: max_mass * (grid * grid) as f64,
        samples,
        outside_support: outside,
        support_ok: outside == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub trials: usize,
    pub skipped: usize,
    /// Max of `pl_energy(ũ) / discrete_energy(u)` and the trial attaining it.
    pub c_fwd: f64,
    pub c_fwd_trial: usize,
    /// Max of `discrete_energy(smooth(ũ)) / pl_energy(ũ)`.
    pub c_bwd: f64,
    pub c_bwd_trial: usize,
    /// Largest observed gradient constant over all trials.
    pub c_obs: f64,
    /// Trials where the per-face forward bound failed.
    pub forward_violations: usize,
}

pub fn gaussian_function(n: usize, seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, trial);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Forward and backward energy ratios over `trials` Gaussian vertex
/// functions drawn from `seed`.
pub fn comparison_suite(
    emb: &Embedding,
    domain: &DomainApprox,
    trials: usize,
    seed: u64,
    config: SmoothingConfig,
) -> Result<ComparisonReport, TransferError> {
    let t = emb.triangulation();
    let op = SmoothingOperator::new(emb, domain, config)?;
    let mut rep = ComparisonReport {
        trials,
        skipped: 0,
        c_fwd: 0.0,
        c_fwd_trial: 0,
        c_bwd: 0.0,
        c_bwd_trial: 0,
        c_obs: 0.0,
        forward_violations: 0,
    };
    for trial in 0..trials {
        let u = gaussian_function(t.num_vertices(), seed, trial as u64);
        let disc = discrete_energy(t, &u).expect("length checked");
        let f = interpolate(&u, emb, domain)?;
        let pl = pl_energy(&f)?;
        if disc == 0.0 || pl == 0.0 {
            rep.skipped += 1;
            continue;
        }
        let bound = gradient_bound_check(&f)?;
        rep.c_obs = rep.c_obs.max(bound.c_obs);
        if !forward_holds_per_face(&f, &bound)? || pl > bound.forward_constant() * disc {
            rep.forward_violations += 1;
        }
        if pl / disc > rep.c_fwd {
            rep.c_fwd = pl / disc;
            rep.c_fwd_trial = trial;
        }
        let smoothed = op.apply(&u);
        let back = discrete_energy(t, &smoothed).expect("length checked") / pl;
        if back > rep.c_bwd {
            rep.c_bwd = back;
            rep.c_bwd_trial = trial;
        }
    }
    Ok(rep)
}

/// `|∇ũ|² · area ≤ c_obs² · (area / ℓ_min²) · max diff²` on every face.
fn forward_holds_per_face(f: &PlFunction, bound: &GradientBound) -> Result<bool, TransferError> {
    let t = f.emb.triangulation();
    for face in 0..t.num_faces() {
        let p = f.emb.face_points(face);
        let l = shortest_side(&p);
        let vals = t.faces()[face].map(|v| f.values[v]);
        let spread = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let area = f.emb.face_area(face);
        let lhs = f.gradient(face)?.norm2() * area;
        let rhs = bound.c_obs.powi(2) * area / (l * l) * spread * spread;
        if lhs > rhs * (1.0 + 1e-12) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{cotangent_weights, face_lengths_from_embedding};
    use crate::embedding::{build_domain, goodness_report, member_embedding, packed_embedding};
    use crate::triangulation::{Family, Triangulation};
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn right_triangle() -> Embedding {
        let t = Triangulation::from_faces(&[[0, 1, 2]]).unwrap();
        Embedding::new(t, vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).unwrap()
    }

    fn lattice(radius: usize) -> Embedding {
        let seq = Family::LatticeBall { radius }.generate().unwrap();
        member_embedding(&seq, radius, 1e-10).unwrap()
    }

    const QUAD: SmoothingMethod = SmoothingMethod::Quadrature { radial: 16, angular: 32 };

    #[test]
    fn interpolation_on_right_triangle() {
        let e = right_triangle();
        let d = build_domain(&e);
        let f = interpolate(&[0.0, 1.0, 0.0], &e, &d).unwrap();
        for p in [Point::new(0.2, 0.3), Point::new(0.5, 0.5), Point::new(0.0, 0.0)] {
            assert!((f.eval(p).unwrap() - p.x).abs() < 1e-15);
        }
        let centroid = Point::new(1.0 / 3.0, 1.0 / 3.0);
        let g = interpolate(&[0.3, 0.9, -0.6], &e, &d).unwrap();
        assert!((g.eval(centroid).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(pl_energy(&f).unwrap(), 0.5);
        assert!(matches!(f.eval(Point::new(1.0, 1.0)), Err(TransferError::PointOutsideDomain(_))));
        let one = interpolate(&[1.0; 3], &e, &d).unwrap();
        assert_eq!(one.eval(Point::new(0.1, 0.7)).unwrap(), 1.0);
        assert_eq!(pl_energy(&one).unwrap(), 0.0);
        assert_eq!(gradient_bound_check(&one).unwrap().worst_face, None);
    }

    #[test]
    fn equilateral_gradient_constant() {
        let e = lattice(2);
        let d = build_domain(&e);
        let mut hat = vec![0.0; e.triangulation().num_vertices()];
        hat[0] = 1.0;
        let b = gradient_bound_check(&interpolate(&hat, &e, &d).unwrap()).unwrap();
        assert!((b.c_obs - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        for f in 0..e.triangulation().num_faces() {
            assert!((face_gradient_constant(e.face_points(f)) - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn pl_energy_is_the_cotangent_form() {
        let e = lattice(3);
        let d = build_domain(&e);
        let t = e.triangulation();
        let w = cotangent_weights(t, &face_lengths_from_embedding(&e));
        for trial in 0..10 {
            let u = gaussian_function(t.num_vertices(), 5, trial);
            let pl = pl_energy(&interpolate(&u, &e, &d).unwrap()).unwrap();
            let cot: f64 = t.edges().iter().zip(&w.weights).map(|(&(a, b), w)| w * (u[a] - u[b]).powi(2)).sum();
            assert!((pl - cot).abs() < 1e-10 * pl);
            let disc = discrete_energy(t, &u).unwrap();
            assert!(pl >= disc / 4.0 && pl <= 4.0 * disc);
        }
    }

    #[test]
    fn equilateral_forward_ratio() {
        let e = lattice(3);
        let d = build_domain(&e);
        let cfg = SmoothingConfig { c_ball: 0.5, method: QUAD, seed: 1 };
        let rep = comparison_suite(&e, &d, 50, 9, cfg).unwrap();
        // interior stiffness weight 1/√3, boundary weight half of that
        assert!(rep.c_fwd <= 1.0 / 3f64.sqrt() + 1e-12);
        assert!(rep.c_fwd > 0.4);
        assert_eq!(rep.forward_violations, 0);
        assert!(rep.c_bwd.is_finite() && rep.c_bwd > 0.0);
    }

    #[test]
    fn good_embedding_gradient_cap() {
        let seq = Family::HyperbolicBall { degree: 7, radius: 3 }.generate().unwrap();
        let (e, _) = packed_embedding(seq.last(), 0, 1e-10).unwrap();
        let eta = goodness_report(&e).eta_min;
        for f in 0..e.triangulation().num_faces() {
            let p = e.face_points(f);
            let c = face_gradient_constant(p);
            assert!(c <= 2.0 / eta.sin());
            // the supremum dominates random functions on the face
            let d = build_domain(&e);
            for trial in 0..5 {
                let u = gaussian_function(e.triangulation().num_vertices(), 3, trial);
                let g = interpolate(&u, &e, &d).unwrap();
                let vals = e.triangulation().faces()[f].map(|v| u[v]);
                let spread = vals.iter().cloned().fold(f64::MIN, f64::max) - vals.iter().cloned().fold(f64::MAX, f64::min);
                assert!(g.gradient(f).unwrap().norm() * shortest_side(&p) / spread <= c * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn smoothing_constants_and_affine_functions() {
        let e = lattice(3);
        let d = build_domain(&e);
        let n = e.triangulation().num_vertices();
        let mc = SmoothingMethod::MonteCarlo { samples: 4000 };
        for method in [QUAD, mc] {
            let cfg = SmoothingConfig { c_ball: 3f64.sqrt() / 2.0, method, seed: 4 };
            let ones = interpolate(&vec![1.0; n], &e, &d).unwrap();
            assert!(smooth(&ones, cfg).unwrap().iter().all(|&v| (v - 1.0).abs() < 1e-14));
            let affine: Vec<f64> = e.coords().iter().map(|p| 2.0 * p.x - p.y + 0.5).collect();
            let f = interpolate(&affine, &e, &d).unwrap();
            let s = smooth(&f, cfg).unwrap();
            for v in e.triangulation().interior_vertices() {
                let tol = match method {
                    SmoothingMethod::Quadrature { .. } => 1e-12,
                    // 3σ of the sample mean of an affine function over the ball
                    SmoothingMethod::MonteCarlo { samples } => {
                        let r = cfg.c_ball * local_scale(&e, v);
                        3.0 * 5f64.sqrt() * r / 2.0 / (samples as f64).sqrt()
                    }
                };
                assert!((s[v] - affine[v]).abs() <= tol, "{method:?} {v}");
            }
        }
    }

    #[test]
    fn smoothing_the_hat_at_the_root() {
        let e = lattice(3);
        let d = build_domain(&e);
        let n = e.triangulation().num_vertices();
        let mut hat = vec![0.0; n];
        hat[0] = 1.0;
        let f = interpolate(&hat, &e, &d).unwrap();
        let c_obs = gradient_bound_check(&f).unwrap().c_obs;
        let c_ball = 0.5;
        let q = smooth(&f, SmoothingConfig { c_ball, method: QUAD, seed: 0 }).unwrap();
        assert!(q[0] < 1.0 && q[0] >= 1.0 - c_ball * c_obs);
        let samples = 20_000;
        let mc_cfg = SmoothingConfig { c_ball, method: SmoothingMethod::MonteCarlo { samples }, seed: 2 };
        let m = smooth(&f, mc_cfg).unwrap();
        // in each of the six sectors the hat is 1 − ρ cos(φ − φ_k) / h with
        // h = √3/2 and |φ − φ_k| ≤ π/6; ρ and φ are independent in the ball
        let (r, h) = (c_ball, 3f64.sqrt() / 2.0);
        let (e_rho, e_rho2) = (2.0 * r / 3.0, r * r / 2.0);
        let e_cos = 3.0 / PI;
        let e_cos2 = 0.5 + 3.0 * 3f64.sqrt() / (4.0 * PI);
        let mean = 1.0 - e_rho * e_cos / h;
        let second = 1.0 - 2.0 * e_rho * e_cos / h + e_rho2 * e_cos2 / (h * h);
        let sigma = ((second - mean * mean) / samples as f64).sqrt();
        assert!((q[0] - mean).abs() < 1e-3);
        assert!((m[0] - q[0]).abs() <= 3.0 * sigma + 1e-3);
        assert!(m.iter().chain(&q).all(|&v| v.abs() <= 1.0));
        assert_eq!(m, smooth(&f, mc_cfg).unwrap());
    }

    #[test]
    fn deep_source_vertices_stay_at_one() {
        let e = lattice(4);
        let d = build_domain(&e);
        let t = e.triangulation();
        // 1 on the closed 2-ball around the root, so every ball at the root sees only 1
        let dist = t.bfs_distances(&[0]);
        let u: Vec<f64> = dist.iter().map(|&k| if k <= 1 { 1.0 } else { 0.0 }).collect();
        let f = interpolate(&u, &e, &d).unwrap();
        let s = smooth(&f, SmoothingConfig { c_ball: 3f64.sqrt() / 2.0, method: QUAD, seed: 0 }).unwrap();
        assert_eq!(s[0], 1.0);
    }

    #[test]
    fn ball_escape_is_reported() {
        let e = lattice(2);
        let d = build_domain(&e);
        let f = interpolate(&vec![0.0; e.triangulation().num_vertices()], &e, &d).unwrap();
        let cfg = SmoothingConfig { c_ball: 1.5, method: QUAD, seed: 0 };
        assert!(matches!(smooth(&f, cfg), Err(TransferError::BallEscapesDomain { .. })));
        let bad = SmoothingConfig { c_ball: 0.5, method: SmoothingMethod::MonteCarlo { samples: 0 }, seed: 0 };
        assert!(matches!(smooth(&f, bad), Err(TransferError::InvalidConfig(_))));
    }

    #[test]
    fn lattice_edge_density() {
        let e = lattice(3);
        let d = build_domain(&e);
        let cfg = SmoothingConfig::for_embedding(&e, SmoothingMethod::MonteCarlo { samples: 1 }, 8);
        let small = density_check(&e, &d, (0, 1), cfg, 100_000, 8).unwrap();
        let large = density_check(&e, &d, (0, 1), cfg, 400_000, 8).unwrap();
        assert!(small.support_ok && large.support_ok);
        assert!((small.c_emp / large.c_emp - 1.0).abs() <= 0.25);
        assert!(small.c_emp <= 50.0);
        assert!(matches!(
            density_check(&e, &d, (0, 30), cfg, 10, 8),
            Err(TransferError::NotAnEdge(0, 30))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn interpolation_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
            let e = lattice(2);
            let d = build_domain(&e);
            let n = e.triangulation().num_vertices();
            let u = gaussian_function(n, seed, 0);
            let w = gaussian_function(n, seed, 1);
            let mix: Vec<f64> = u.iter().zip(&w).map(|(x, y)| a * x + b * y).collect();
            let (fu, fw, fm) = (
                interpolate(&u, &e, &d).unwrap(),
                interpolate(&w, &e, &d).unwrap(),
                interpolate(&mix, &e, &d).unwrap(),
            );
            let mut rng = rng::stream(seed, 2);
            let mut checked = 0;
            while checked < 100 {
                let p = Point::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let Ok(m) = fm.eval(p) else { continue };
                let lin = a * fu.eval(p).unwrap() + b * fw.eval(p).unwrap();
                prop_assert!((m - lin).abs() <= 1e-12 * (1.0 + lin.abs()));
                checked += 1;
            }
        }
    }
}
