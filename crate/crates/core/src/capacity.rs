//! Dirichlet energies, harmonic solves and capacities of a source set
//! relative to the boundary of each exhaustion member.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{Embedding, EmbeddingError};
use crate::linalg::{pcg, CgReport, CsrMatrix, SolveError};
use crate::packing::{self, PackingError};
use crate::triangulation::{ExhaustionSequence, SourceSet, Triangulation, TriangulationError, VertexId};

pub const CG_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("no Dirichlet vertices reachable from free vertex {0}")]
    SingularSystem(VertexId),
    #[error("source vertex {0} is on the boundary or out of range")]
    InvalidSource(VertexId),
    #[error("function has {found} values for {expected} vertices")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    NoConvergence(#[from] SolveError),
    #[error("trace has {0} entries, at least 4 are needed")]
    TooShort(usize),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
    #[error(transparent)]
    Packing(#[from] PackingError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// A weighted graph with Dirichlet (zero) vertices marked as boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    edges: Vec<(VertexId, VertexId, f64)>,
    boundary: Vec<bool>,
}

impl Network {
    pub fn new(n: usize, edges: Vec<(VertexId, VertexId, f64)>, boundary: Vec<bool>) -> Self {
        assert_eq!(boundary.len(), n);
        Self { n, edges, boundary }
    }

    pub fn unit(t: &Triangulation) -> Self {
        let edges = t.edges().iter().map(|&(a, b)| (a, b, 1.0)).collect();
        Self::new(t.num_vertices(), edges, t.boundary_flags().to_vec())
    }

    /// `weights` aligned with `t.edges()`.
    pub fn weighted(t: &Triangulation, weights: &[f64]) -> Self {
        let edges = t.edges().iter().zip(weights).map(|(&(a, b), &w)| (a, b, w)).collect();
        Self::new(t.num_vertices(), edges, t.boundary_flags().to_vec())
    }

    /// Path `0 – 1 – … – len` with only the far end on the boundary.
    pub fn path(len: usize) -> Self {
        let edges = (0..len).map(|i| (i, i + 1, 1.0)).collect();
        let mut boundary = vec![false; len + 1];
        boundary[len] = true;
        Self::new(len + 1, edges, boundary)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(VertexId, VertexId, f64)] {
        &self.edges
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.boundary[v]
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        self.edges.iter().map(|&(a, b, w)| w * (u[a] - u[b]).powi(2)).sum()
    }
}

/// Sum over edges of squared differences.
pub fn discrete_energy(t: &Triangulation, u: &[f64]) -> Result<f64, CapacityError> {
    if u.len() != t.num_vertices() {
        return Err(CapacityError::LengthMismatch { expected: t.num_vertices(), found: u.len() });
    }
    Ok(t.edges().iter().map(|&(a, b)| (u[a] - u[b]).powi(2)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSolution {
    pub u: Vec<f64>,
    pub energy: f64,
    /// Net current out of the source set.
    pub flux: f64,
    /// Sup-norm of the weighted Laplacian at free vertices.
    pub harmonic_residual: f64,
    pub cg: CgReport,
}

/// Minimizes the network energy with `u = 1` on `source` and `u = 0` on the
/// boundary.
pub fn harmonic_solve(net: &Network, source: &[VertexId]) -> Result<HarmonicSolution, CapacityError> {
    let n = net.n;
    let mut fixed: Vec<Option<f64>> = net.boundary.iter().map(|&b| b.then_some(0.0)).collect();
    for &s in source {
        if s >= n || net.boundary[s] {
            return Err(CapacityError::InvalidSource(s));
        }
        fixed[s] = Some(1.0);
    }
    let mut slot = vec![usize::MAX; n];
    let mut free = Vec::new();
    for v in 0..n {
        if fixed[v].is_none() {
            slot[v] = free.len();
            free.push(v);
        }
    }
    check_reaches_dirichlet(net, &fixed)?;

    let mut entries = Vec::new();
    let mut rhs = vec![0.0; free.len()];
    for &(a, b, w) in &net.edges {
        for (x, y) in [(a, b), (b, a)] {
            if slot[x] == usize::MAX {
                continue;
            }
            entries.push((slot[x], slot[x], w));
            match fixed[y] {
                Some(val) => rhs[slot[x]] += w * val,
                None => entries.push((slot[x], slot[y], -w)),
            }
        }
    }
    let m = CsrMatrix::from_triplets(free.len(), entries);
    let (x, cg) = pcg(&m, &rhs, CG_REL_TOL, 20 * free.len() + 100)?;
    let u: Vec<f64> = (0..n).map(|v| fixed[v].unwrap_or_else(|| x[slot[v]])).collect();

    let mut lap = vec![0.0; n];
    let mut flux = 0.0;
    for &(a, b, w) in &net.edges {
        let d = w * (u[a] - u[b]);
        lap[a] += d;
        lap[b] -= d;
    }
    for &s in source {
        flux += lap[s];
    }
    let harmonic_residual = free.iter().map(|&v| lap[v].abs()).fold(0.0, f64::max);
    Ok(HarmonicSolution { energy: net.energy(&u), u, flux, harmonic_residual, cg })
}

fn check_reaches_dirichlet(net: &Network, fixed: &[Option<f64>]) -> Result<(), CapacityError> {
    let mut adj = vec![Vec::new(); net.n];
    for &(a, b, _) in &net.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut ok: Vec<bool> = fixed.iter().map(Option::is_some).collect();
    if !ok.iter().any(|&x| x) {
        return Err(CapacityError::SingularSystem(0));
    }
    let mut stack: Vec<usize> = (0..net.n).filter(|&v| ok[v]).collect();
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !ok[w] {
                ok[w] = true;
                stack.push(w);
            }
        }
    }
    match ok.iter().position(|&x| !x) {
        Some(v) => Err(CapacityError::SingularSystem(v)),
        None => Ok(()),
    }
}

/// Side lengths of every face, opposite corners 0, 1, 2.
pub type FaceLengths = Vec<[f64; 3]>;

pub fn face_lengths_from_embedding(e: &Embedding) -> FaceLengths {
    (0..e.triangulation().num_faces())
        .map(|f| {
            let [a, b, c] = e.face_points(f);
            [b.dist(c), c.dist(a), a.dist(b)]
        })
        .collect()
}

/// Face side lengths of the tangency triangles of a packing, `r_u + r_v` per
/// edge. These are the lengths the laid-out packing would have, without
/// placing any centers.
pub fn face_lengths_from_radii(t: &Triangulation, radii: &[f64]) -> FaceLengths {
    t.faces()
        .iter()
        .map(|&[a, b, c]| [radii[b] + radii[c], radii[c] + radii[a], radii[a] + radii[b]])
        .collect()
}

/// Cotangent of the angle opposite side `a` in a triangle with sides a, b, c.
fn cot_opposite(a: f64, b: f64, c: f64) -> f64 {
    // Kahan's area formula with sides sorted
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [x, y, z] = s;
    let area4 = ((x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))).max(0.0).sqrt();
    (b * b + c * c - a * a) / area4
}

#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessWeights {
    /// Aligned with `t.edges()`.
    pub weights: Vec<f64>,
    pub negative: usize,
}

/// Piecewise-linear stiffness weights `(cot α + cot β) / 2`, one cotangent per
/// incident face, so that `Σ_e w_e (u_x − u_y)²` is the Dirichlet integral of
/// the linear interpolant.
pub fn cotangent_weights(t: &Triangulation, lengths: &[[f64; 3]]) -> StiffnessWeights {
    let index: std::collections::HashMap<(VertexId, VertexId), usize> =
        t.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut weights = vec![0.0; t.num_edges()];
    for (tri, l) in t.faces().iter().zip(lengths) {
        for i in 0..3 {
            let (u, v) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
            let cot = cot_opposite(l[i], l[(i + 1) % 3], l[(i + 2) % 3]);
            weights[index[&(u.min(v), u.max(v))]] += 0.5 * cot;
        }
    }
    let negative = weights.iter().filter(|&&w| w < 0.0).count();
    StiffnessWeights { weights, negative }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Discrete,
    PlContinuous,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Discrete => "discrete",
            Method::PlContinuous => "pl-continuous",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEntry {
    pub k: usize,
    pub cap: f64,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityTrace {
    pub method: Method,
    pub source: Vec<VertexId>,
    pub entries: Vec<CapacityEntry>,
}

impl CapacityTrace {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.cap).collect()
    }

    /// Nonincreasing in `k`, allowing a relative slack for solver error.
    pub fn is_monotone(&self, rel_slack: f64) -> bool {
        self.entries.windows(2).all(|w| w[1].cap <= w[0].cap * (1.0 + rel_slack))
    }

    /// CSV `k,cap,method,flags`; flags joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,cap,method,flags\n");
        for e in &self.entries {
            writeln!(out, "{},{:.17e},{},{}", e.k, e.cap, self.method.name(), e.flags.join(";")).unwrap();
        }
        out
    }
}

pub fn discrete_capacity(t: &Triangulation, source: &SourceSet) -> Result<f64, CapacityError> {
    Ok(harmonic_solve(&Network::unit(t), &source.vertices)?.energy)
}

/// Capacity over piecewise-linear competitors with the given face geometry.
/// Returns the capacity and the number of negative stiffness weights.
pub fn pl_capacity(
    t: &Triangulation,
    lengths: &[[f64; 3]],
    source: &SourceSet,
) -> Result<(f64, usize), CapacityError> {
    let w = cotangent_weights(t, lengths);
    let sol = harmonic_solve(&Network::weighted(t, &w.weights), &source.vertices)?;
    Ok((sol.energy, w.negative))
}

/// Face geometry of member `k`: the family's coordinates where available,
/// otherwise the tangency triangles of its unit-boundary packing (cone
/// vertices over extra boundary cycles, as in the packed embedding).
pub fn member_face_lengths(
    seq: &ExhaustionSequence,
    k: usize,
    tol: f64,
) -> Result<FaceLengths, CapacityError> {
    let t = seq.member(k)?;
    if let Some(coords) = seq.member_coords(k) {
        return Ok(face_lengths_from_embedding(&Embedding::new(t.clone(), coords)?));
    }
    if t.is_disk() {
        let label = packing::solve_radii(t, &packing::uniform_boundary_radii(t, 1.0), tol)?;
        return Ok(face_lengths_from_radii(t, &label.radii));
    }
    let radii = capped_radii(t, tol)?;
    Ok(face_lengths_from_radii(t, &radii))
}

fn capped_radii(t: &Triangulation, tol: f64) -> Result<Vec<f64>, CapacityError> {
    let n = t.num_vertices();
    let mut faces = t.faces().to_vec();
    let mut next = n;
    for cycle in &t.boundary_cycles()[1..] {
        for i in 0..cycle.len() {
            faces.push([cycle[(i + 1) % cycle.len()], cycle[i], next]);
        }
        next += 1;
    }
    let capped = Triangulation::with_vertex_count(next, &faces)?;
    let label = packing::solve_radii(&capped, &packing::uniform_boundary_radii(&capped, 1.0), tol)?;
    Ok(label.radii[..n].to_vec())
}

/// Capacity of `source` in every member, solved in parallel and assembled by
/// index. `tol` is the packing tolerance for members without coordinates.
pub fn capacity_trace(
    seq: &ExhaustionSequence,
    source: &SourceSet,
    method: Method,
    tol: f64,
) -> Result<CapacityTrace, CapacityError> {
    let entries = (1..=seq.len())
        .into_par_iter()
        .map(|k| {
            let t = seq.member(k)?;
            let (cap, negative) = match method {
                Method::Discrete => (discrete_capacity(t, source)?, 0),
                Method::PlContinuous => pl_capacity(t, &member_face_lengths(seq, k, tol)?, source)?,
            };
            let flags = if negative > 0 { vec![format!("negative_weight={negative}")] } else { vec![] };
            Ok(CapacityEntry { k, cap, flags })
        })
        .collect::<Result<Vec<_>, CapacityError>>()?;
    Ok(CapacityTrace { method, source: source.vertices.clone(), entries })
}

/// Trace of the path `0 – … – n` with source `{0}` for `n = 1..=len`.
pub fn chain_trace(len: usize) -> Result<CapacityTrace, CapacityError> {
    let entries = (1..=len)
        .map(|k| {
            let cap = harmonic_solve(&Network::path(k), &[0])?.energy;
            Ok(CapacityEntry { k, cap, flags: vec![] })
        })
        .collect::<Result<_, CapacityError>>()?;
    Ok(CapacityTrace { method: Method::Discrete, source: vec![0], entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    RecurrentConsistent,
    TransientConsistent,
    Inconclusive,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::RecurrentConsistent => "recurrent-consistent",
            Classification::TransientConsistent => "transient-consistent",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    InverseLog,
    InverseLinear,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub model: DecayModel,
    pub coefficient: f64,
    /// Sum of squared residuals over the sum of squared data.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub decay_factor: f64,
    pub max_last_over_first: f64,
    pub min_last_over_half: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { decay_factor: 2.0, max_last_over_first: 0.5, min_last_over_half: 0.8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub classification: Classification,
    pub best_decay: ModelFit,
    pub constant: ModelFit,
    pub last_over_first: f64,
    pub last_over_half: f64,
}

fn fit(model: DecayModel, ks: &[f64], ys: &[f64]) -> ModelFit {
    let g = |k: f64| match model {
        DecayModel::InverseLog => 1.0 / k.ln(),
        DecayModel::InverseLinear => 1.0 / k,
        DecayModel::Constant => 1.0,
    };
    let (mut gy, mut gg, mut yy) = (0.0, 0.0, 0.0);
    for (&k, &y) in ks.iter().zip(ys) {
        gy += g(k) * y;
        gg += g(k) * g(k);
        yy += y * y;
    }
    let c = gy / gg;
    let ssr: f64 = ks.iter().zip(ys).map(|(&k, &y)| (y - c * g(k)).powi(2)).sum();
    let relative_residual = if yy > 0.0 { ssr / yy } else { 0.0 };
    ModelFit { model, coefficient: c, relative_residual }
}

/// Decides between recurrent-like decay and transient-like saturation of a
/// capacity trace `cap_1, …, cap_n` (index `k` starts at 1).
pub fn classify(trace: &[f64], config: &ClassifierConfig) -> Result<Verdict, CapacityError> {
    let n = trace.len();
    if n < 4 {
        return Err(CapacityError::TooShort(n));
    }
    let half = n / 2;
    let ks: Vec<f64> = (half + 1..=n).map(|k| k as f64).collect();
    let ys = &trace[half..];
    let log_fit = fit(DecayModel::InverseLog, &ks, ys);
    let lin_fit = fit(DecayModel::InverseLinear, &ks, ys);
    let constant = fit(DecayModel::Constant, &ks, ys);
    let best_decay = if lin_fit.relative_residual < log_fit.relative_residual { lin_fit } else { log_fit };

    let (first, last) = (trace[0], trace[n - 1]);
    let last_over_first = last / first;
    let last_over_half = last / trace[half];
    let beats_constant = constant.relative_residual > 0.0
        && constant.relative_residual >= config.decay_factor * best_decay.relative_residual;
    let classification = if beats_constant && last_over_first <= config.max_last_over_first {
        Classification::RecurrentConsistent
    } else if last > 0.0 && last_over_half >= config.min_last_over_half {
        Classification::TransientConsistent
    } else {
        Classification::Inconclusive
    };
    Ok(Verdict { classification, best_decay, constant, last_over_first, last_over_half })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::triangulation::Family;
    use proptest::prelude::*;
    use rand::Rng;

    fn wheel(k: usize) -> Triangulation {
        let faces: Vec<_> = (0..k).map(|i| [0, 1 + i, 1 + (i + 1) % k]).collect();
        Triangulation::from_faces(&faces).unwrap()
    }

    #[test]
    fn small_energies() {
        let path = Triangulation::from_faces(&[[0, 1, 2]]).unwrap();
        assert_eq!(discrete_energy(&path, &[0.3; 3]).unwrap(), 0.0);
        let net = Network::path(2);
        assert_eq!(net.energy(&[1.0, 0.5, 0.0]), 0.5);
        let mut star = vec![0.0; 7];
        star[0] = 1.0;
        assert_eq!(discrete_energy(&wheel(6), &star).unwrap(), 6.0);
    }

    #[test]
    fn path_and_wheel_solves() {
        let sol = harmonic_solve(&Network::path(2), &[0]).unwrap();
        assert!((sol.u[1] - 0.5).abs() < 1e-15);
        let sol = harmonic_solve(&Network::unit(&wheel(6)), &[0]).unwrap();
        assert_eq!(sol.u, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(sol.energy, 6.0);
    }

    #[test]
    fn chain_capacity_is_series_conductance() {
        let trace = chain_trace(20).unwrap();
        for e in &trace.entries {
            assert!((e.cap - 1.0 / e.k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let w = wheel(5);
        assert_eq!(harmonic_solve(&Network::unit(&w), &[2]), Err(CapacityError::InvalidSource(2)));
        // no boundary and no source
        let net = Network::new(2, vec![(0, 1, 1.0)], vec![false, false]);
        assert!(matches!(harmonic_solve(&net, &[]), Err(CapacityError::SingularSystem(_))));
        assert_eq!(classify(&[1.0, 0.5, 0.3], &ClassifierConfig::default()), Err(CapacityError::TooShort(3)));
    }

    /// Projected gradient descent on the free values, independent of the CG path.
    fn descent_capacity(t: &Triangulation, source: VertexId) -> f64 {
        let n = t.num_vertices();
        let mut u = vec![0.0; n];
        u[source] = 1.0;
        let step = 1.0 / (2.0 * t.max_degree() as f64);
        for _ in 0..200_000 {
            let mut grad = vec![0.0; n];
            for &(a, b) in t.edges() {
                let d = 2.0 * (u[a] - u[b]);
                grad[a] += d;
                grad[b] -= d;
            }
            let mut moved: f64 = 0.0;
            for v in 0..n {
                if v != source && !t.is_boundary(v) {
                    u[v] -= step * grad[v];
                    moved = moved.max((step * grad[v]).abs());
                }
            }
            if moved < 1e-15 {
                break;
            }
        }
        discrete_energy(t, &u).unwrap()
    }

    #[test]
    fn lattice_capacity_matches_descent() {
        let seq = Family::LatticeBall { radius: 3 }.generate().unwrap();
        let t = seq.last();
        let cap = discrete_capacity(t, &seq.source).unwrap();
        assert!((cap - descent_capacity(t, seq.root)).abs() < 1e-8);
    }

    #[test]
    fn harmonic_solution_properties() {
        let seq = Family::HyperbolicBall { degree: 7, radius: 3 }.generate().unwrap();
        let t = seq.last();
        let sol = harmonic_solve(&Network::unit(t), &seq.source.vertices).unwrap();
        assert!(sol.u.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!((sol.flux - sol.energy).abs() < 1e-8);
        assert!(sol.harmonic_residual <= 1e-10);
        let mut rng = crate::rng::stream(11, 0);
        for _ in 0..100 {
            let mut w = sol.u.clone();
            for v in t.interior_vertices().filter(|v| !seq.source.contains(*v)) {
                w[v] += rng.random_range(-0.1..0.1);
            }
            assert!(discrete_energy(t, &w).unwrap() >= sol.energy);
        }
    }

    #[test]
    fn tube_capacity_closed_form() {
        let seq = Family::Tube { circumference: 5, length: 8 }.generate().unwrap();
        let trace = capacity_trace(&seq, &seq.source, Method::Discrete, 1e-10).unwrap();
        for e in &trace.entries {
            assert!((e.cap - 20.0 / e.k as f64).abs() < 1e-9, "{e:?}");
        }
    }

    #[test]
    fn equilateral_cotangent_weights() {
        let seq = Family::LatticeBall { radius: 2 }.generate().unwrap();
        let t = seq.last();
        let e = crate::embedding::member_embedding(&seq, 2, 1e-10).unwrap();
        let w = cotangent_weights(t, &face_lengths_from_embedding(&e));
        let interior = 1.0 / 3f64.sqrt();
        for (&(a, b), &wt) in t.edges().iter().zip(&w.weights) {
            let expected = if t.is_boundary(a) && t.is_boundary(b) { interior / 2.0 } else { interior };
            assert!((wt - expected).abs() < 1e-12);
        }
        assert_eq!(w.negative, 0);
    }

    #[test]
    fn radii_lengths_match_layout_lengths() {
        let seq = Family::HyperbolicBall { degree: 7, radius: 3 }.generate().unwrap();
        let t = seq.last();
        let (e, layout) = crate::embedding::packed_embedding(t, 0, 1e-10).unwrap();
        let a = cotangent_weights(t, &face_lengths_from_embedding(&e));
        let b = cotangent_weights(t, &face_lengths_from_radii(t, &layout.label.radii));
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x - y).abs() < 1e-7);
        }
    }

    #[test]
    fn classifier_examples() {
        let config = ClassifierConfig::default();
        let inv: Vec<f64> = (1..=8).map(|k| 1.0 / k as f64).collect();
        assert_eq!(classify(&inv, &config).unwrap().classification, Classification::RecurrentConsistent);
        let flat = vec![0.37; 8];
        assert_eq!(classify(&flat, &config).unwrap().classification, Classification::TransientConsistent);
        let seq = Family::HyperbolicBall { degree: 7, radius: 6 }.generate().unwrap();
        let trace = capacity_trace(&seq, &seq.source, Method::Discrete, 1e-10).unwrap();
        assert!(trace.is_monotone(0.0));
        let v = classify(&trace.values(), &config).unwrap();
        assert_eq!(v.classification, Classification::TransientConsistent);
    }

    #[test]
    fn csv_layout() {
        let trace = chain_trace(2).unwrap();
        let csv = trace.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "k,cap,method,flags");
        assert!(lines[1].starts_with("1,1.0000000000000000"));
        assert!(lines[2].ends_with(",discrete,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn pl_capacity_is_similarity_invariant(
            angle in -3.0f64..3.0, scale in 0.01f64..100.0, dx in -50.0f64..50.0, dy in -50.0f64..50.0
        ) {
            let seq = Family::LatticeBall { radius: 3 }.generate().unwrap();
            let t = seq.last();
            let e = crate::embedding::member_embedding(&seq, 3, 1e-10).unwrap();
            let moved = e.map(|p| p.rotate(angle) * scale + Point::new(dx, dy)).unwrap();
            let (a, _) = pl_capacity(t, &face_lengths_from_embedding(&e), &seq.source).unwrap();
            let (b, _) = pl_capacity(t, &face_lengths_from_embedding(&moved), &seq.source).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * a);
        }
    }
}
