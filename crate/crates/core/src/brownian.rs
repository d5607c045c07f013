//! Hitting probabilities of planar Brownian motion by walk-on-spheres.
//!
//! The absorbing set is the closed `ε`-neighborhood of the target. From the
//! current point the walk jumps to a uniform point on the largest circle that
//! meets neither that neighborhood nor the outer kill circle, and stops once
//! it is within a thin shell of either. Path `i` always draws from stream `i`
//! of the seed, so runs at different `ε` reuse the same randomness.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::DomainApprox;
use crate::geometry::Point;
use crate::rng;
use crate::spatial::SegmentIndex;

/// Fraction of the kill radius treated as having reached it.
const OUTER_SHELL: f64 = 1e-12;
/// Absorption shell around the `ε`-neighborhood, relative to `ε`.
const INNER_SHELL: f64 = 1e-3;
const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BrownianError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("epsilon list must be strictly decreasing with at least 4 positive values")]
    InvalidEpsList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TargetSpec {
    Points { points: Vec<Point> },
    Polyline { points: Vec<Point> },
    Segments { segments: Vec<(Point, Point)> },
    Circle { center: Point, radius: f64 },
    Disk { center: Point, radius: f64 },
}

impl TargetSpec {
    /// The boundary polylines of a domain.
    pub fn from_domain(domain: &DomainApprox) -> Self {
        TargetSpec::Segments { segments: domain.boundary_index().segments().to_vec() }
    }

    pub fn unit_segment() -> Self {
        TargetSpec::Polyline { points: vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)] }
    }

    fn build(&self) -> Result<Target, BrownianError> {
        let segs = match self {
            TargetSpec::Points { points } => points.iter().map(|&p| (p, p)).collect(),
            TargetSpec::Polyline { points } => points.windows(2).map(|w| (w[0], w[1])).collect(),
            TargetSpec::Segments { segments } => segments.clone(),
            &TargetSpec::Circle { center, radius } | &TargetSpec::Disk { center, radius } => {
                if !(radius > 0.0) {
                    return Err(BrownianError::InvalidConfig("radius must be positive".into()));
                }
                let solid = matches!(self, TargetSpec::Disk { .. });
                return Ok(Target::Round { center, radius, solid });
            }
        };
        let segs: Vec<(Point, Point)> = segs;
        if segs.is_empty() {
            return Err(BrownianError::InvalidConfig("empty target".into()));
        }
        Ok(Target::Segments(SegmentIndex::new(segs)))
    }
}

enum Target {
    Segments(SegmentIndex),
    Round { center: Point, radius: f64, solid: bool },
}

impl Target {
    fn distance(&self, p: Point) -> f64 {
        match self {
            Target::Segments(index) => index.distance(p),
            Target::Round { center, radius, solid } => {
                let d = p.dist(*center) - radius;
                if *solid { d.max(0.0) } else { d.abs() }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrownianConfig {
    pub start: Point,
    pub target: TargetSpec,
    pub eps: f64,
    /// Kill radius of the circle centered at the origin.
    pub r_out: f64,
    pub paths: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingEstimate {
    pub eps: f64,
    pub p_hit: f64,
    pub stderr: f64,
    pub paths: u64,
    pub hits: u64,
    /// Paths stopped by the step cap; counted as hits.
    pub stalled: u64,
}

impl HittingEstimate {
    fn new(eps: f64, hits: u64, stalled: u64, paths: u64) -> Self {
        let p = hits as f64 / paths as f64;
        let stderr = (p * (1.0 - p) / paths as f64).sqrt();
        Self { eps, p_hit: p, stderr, paths, hits, stalled }
    }
}

enum PathEnd {
    Escaped,
    Hit,
    Stalled,
}

fn run_path(target: &Target, start: Point, eps: f64, r_out: f64, seed: u64, path: u64) -> PathEnd {
    let mut rng = rng::stream(seed, path);
    let mut p = start;
    let (inner, outer) = (INNER_SHELL * eps, OUTER_SHELL * r_out);
    for _ in 0..MAX_STEPS {
        let d_target = target.distance(p) - eps;
        if d_target <= inner {
            return PathEnd::Hit;
        }
        let d_out = r_out - p.norm();
        if d_out <= outer {
            return PathEnd::Escaped;
        }
        p = p + Point::polar(d_target.min(d_out), TAU * rng.random::<f64>());
    }
    PathEnd::Stalled
}

fn validate(cfg: &BrownianConfig, eps: f64) -> Result<Target, BrownianError> {
    if !(eps > 0.0) {
        return Err(BrownianError::InvalidConfig("eps must be positive".into()));
    }
    if cfg.paths == 0 {
        return Err(BrownianError::InvalidConfig("paths must be at least 1".into()));
    }
    if !(cfg.r_out > cfg.start.norm()) {
        return Err(BrownianError::InvalidConfig("start must lie inside the kill circle".into()));
    }
    let target = cfg.target.build()?;
    if !(cfg.r_out > target.distance(cfg.start)) {
        return Err(BrownianError::InvalidConfig("kill radius must exceed the target distance".into()));
    }
    Ok(target)
}

fn counts(cfg: &BrownianConfig, target: &Target, eps: f64) -> (u64, u64) {
    (0..cfg.paths)
        .into_par_iter()
        .map(|path| match run_path(target, cfg.start, eps, cfg.r_out, cfg.seed, path) {
            PathEnd::Hit => (1, 0),
            PathEnd::Stalled => (1, 1),
            PathEnd::Escaped => (0, 0),
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

pub fn hit_probability(cfg: &BrownianConfig) -> Result<HittingEstimate, BrownianError> {
    let target = validate(cfg, cfg.eps)?;
    let (hits, stalled) = counts(cfg, &target, cfg.eps);
    Ok(HittingEstimate::new(cfg.eps, hits, stalled, cfg.paths))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolarityVerdict {
    PolarConsistent,
    NonPolarConsistent,
    Inconclusive,
}

impl PolarityVerdict {
    pub fn name(self) -> &'static str {
        match self {
            PolarityVerdict::PolarConsistent => "polar-consistent",
            PolarityVerdict::NonPolarConsistent => "non-polar-consistent",
            PolarityVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRule {
    pub min_decay_factor: f64,
    pub max_last_polar: f64,
    pub sigmas: f64,
    pub min_last_non_polar: f64,
}

impl Default for SweepRule {
    fn default() -> Self {
        Self { min_decay_factor: 1.5, max_last_polar: 0.1, sigmas: 2.0, min_last_non_polar: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub table: Vec<HittingEstimate>,
    pub verdict: PolarityVerdict,
}

impl SweepReport {
    /// CSV `eps,p_hit,stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,p_hit,stderr\n");
        for e in &self.table {
            out.push_str(&format!("{:e},{:.17e},{:.17e}\n", e.eps, e.p_hit, e.stderr));
        }
        out
    }
}

pub fn classify_sweep(table: &[HittingEstimate], rule: &SweepRule) -> PolarityVerdict {
    let n = table.len();
    let (first, prev, last) = (table[0], table[n - 2], table[n - 1]);
    let decays = last.p_hit == 0.0 && first.p_hit > 0.0
        || (last.p_hit > 0.0 && first.p_hit / last.p_hit >= rule.min_decay_factor);
    if decays && last.p_hit < rule.max_last_polar {
        return PolarityVerdict::PolarConsistent;
    }
    let spread = rule.sigmas * (prev.stderr.powi(2) + last.stderr.powi(2)).sqrt();
    if (last.p_hit - prev.p_hit).abs() <= spread && last.p_hit > rule.min_last_non_polar {
        return PolarityVerdict::NonPolarConsistent;
    }
    PolarityVerdict::Inconclusive
}

/// Hitting probabilities for a strictly decreasing list of tolerances, each
/// run with the same per-path streams.
pub fn polarity_sweep(
    cfg: &BrownianConfig,
    eps_list: &[f64],
    rule: &SweepRule,
) -> Result<SweepReport, BrownianError> {
    let decreasing = eps_list.windows(2).all(|w| w[1] < w[0]);
    if eps_list.len() < 4 || !decreasing || !(eps_list[eps_list.len() - 1] > 0.0) {
        return Err(BrownianError::InvalidEpsList);
    }
    let target = validate(cfg, eps_list[eps_list.len() - 1])?;
    let table: Vec<HittingEstimate> = eps_list
        .iter()
        .map(|&eps| {
            let (hits, stalled) = counts(cfg, &target, eps);
            HittingEstimate::new(eps, hits, stalled, cfg.paths)
        })
        .collect();
    let verdict = classify_sweep(&table, rule);
    Ok(SweepReport { table, verdict })
}

/// `n` points evenly spaced on a circle of the given radius around `center`.
pub fn point_cloud(n: usize, center: Point, radius: f64) -> Vec<Point> {
    (0..n)
        .map(|i| center + Point::polar(radius, TAU * i as f64 / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_target(r: f64, r_out: f64, eps: f64, paths: u64) -> BrownianConfig {
        BrownianConfig {
            start: Point::new(r, 0.0),
            target: TargetSpec::Points { points: vec![Point::ORIGIN] },
            eps,
            r_out,
            paths,
            seed: 17,
        }
    }

    #[test]
    fn annulus_formula() {
        for (r, r_out, eps) in [(0.5, 2.0, 1e-2), (0.5, 2.0, 1e-4), (0.3, 1.0, 1e-3)] {
            let est = hit_probability(&point_target(r, r_out, eps, 20_000)).unwrap();
            let exact = (r_out / r).ln() / (r_out / eps).ln();
            assert!((est.p_hit - exact).abs() <= 3.0 * est.stderr, "{est:?} vs {exact}");
        }
    }

    #[test]
    fn circle_from_inside_is_hit() {
        let cfg = BrownianConfig {
            start: Point::new(0.5, 0.0),
            target: TargetSpec::Circle { center: Point::ORIGIN, radius: 1.0 },
            eps: 1e-3,
            r_out: 1e3,
            paths: 2000,
            seed: 1,
        };
        assert!(hit_probability(&cfg).unwrap().p_hit >= 0.99);
    }

    #[test]
    fn start_inside_neighborhood_hits_immediately() {
        let mut cfg = point_target(1e-3, 2.0, 1e-2, 100);
        assert_eq!(hit_probability(&cfg).unwrap().p_hit, 1.0);
        cfg.target = TargetSpec::Disk { center: Point::ORIGIN, radius: 0.5 };
        assert_eq!(hit_probability(&cfg).unwrap().p_hit, 1.0);
    }

    #[test]
    fn sweep_is_monotone_and_deterministic() {
        let cfg = point_target(0.5, 2.0, 1e-1, 5000);
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let a = polarity_sweep(&cfg, &eps, &SweepRule::default()).unwrap();
        let b = polarity_sweep(&cfg, &eps, &SweepRule::default()).unwrap();
        assert_eq!(a, b);
        for w in a.table.windows(2) {
            let sigma = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            assert!(w[1].p_hit <= w[0].p_hit + 2.0 * sigma);
        }
        for e in &a.table {
            let exact = 4f64.ln() / (2.0 / e.eps).ln();
            assert!((e.p_hit - exact).abs() <= 3.0 * e.stderr + 1e-12);
        }
    }

    #[test]
    fn sweep_verdicts() {
        let rule = SweepRule::default();
        let points = BrownianConfig {
            start: Point::new(0.5, 0.0),
            target: TargetSpec::Points { points: point_cloud(10, Point::ORIGIN, 0.01) },
            eps: 1e-1,
            r_out: 1.0,
            paths: 4000,
            seed: 3,
        };
        let eps = [1e-1, 1e-4, 1e-8, 1e-12, 1e-14];
        let rep = polarity_sweep(&points, &eps, &rule).unwrap();
        assert_eq!(rep.verdict, PolarityVerdict::PolarConsistent, "{:?}", rep.table);

        let segment = BrownianConfig {
            start: Point::new(0.5, 0.3),
            target: TargetSpec::unit_segment(),
            eps: 1e-1,
            r_out: 10.0,
            paths: 4000,
            seed: 3,
        };
        let rep = polarity_sweep(&segment, &[1e-2, 1e-4, 1e-8, 1e-12], &rule).unwrap();
        assert_eq!(rep.verdict, PolarityVerdict::NonPolarConsistent, "{:?}", rep.table);
    }

    #[test]
    fn config_errors() {
        let mut cfg = point_target(0.5, 2.0, 0.0, 10);
        assert!(hit_probability(&cfg).is_err());
        cfg.eps = 0.1;
        cfg.r_out = 0.4;
        assert!(hit_probability(&cfg).is_err());
        cfg.r_out = 2.0;
        assert_eq!(
            polarity_sweep(&cfg, &[0.1, 0.2, 0.01, 0.001], &SweepRule::default()),
            Err(BrownianError::InvalidEpsList)
        );
        assert_eq!(polarity_sweep(&cfg, &[0.1, 0.01], &SweepRule::default()), Err(BrownianError::InvalidEpsList));
    }

    #[test]
    fn csv_rows() {
        let cfg = point_target(0.5, 2.0, 0.1, 100);
        let rep = polarity_sweep(&cfg, &[0.1, 0.01, 0.001, 0.0001], &SweepRule::default()).unwrap();
        let csv = rep.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("eps,p_hit,stderr\n1e-1,"));
    }
}
