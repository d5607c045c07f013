use std::path::Path;

use packlab::brownian::{self, BrownianConfig, SweepRule, TargetSpec};
use packlab::capacity::{self, Method};
use packlab::embedding::{self, build_domain, goodness_report, sausage_check, Embedding, EmbeddingError};
use packlab::packing::{self, PackedLayout, PackingLabel};
use packlab::transfer::{
    comparison_suite, density_check, face_gradient_constant, SmoothingConfig, SmoothingMethod,
};
use packlab::triangulation::{read_tri, write_tri, VertexId};
use packlab::{Point, Triangulation, TriangulationError};
use serde_json::{json, Value};

use crate::run::{Failure, Run};
use crate::FamilyArgs;

pub fn load_tri(run: &mut Run, path: &Path) -> Result<Triangulation, Failure> {
    let text = run.read(path)?;
    read_tri(&text).map_err(|e| match e {
        TriangulationError::Parse(m) => Failure::Io(format!("{}: {m}", path.display())),
        e => Failure::invariant(format!("{}: {e}", path.display())),
    })
}

pub fn load_emb(run: &mut Run, tri: &Path, emb: &Path) -> Result<Embedding, Failure> {
    let t = load_tri(run, tri)?;
    let text = run.read(emb)?;
    embedding::read_emb(&text, t).map_err(|e| match e {
        EmbeddingError::Parse(m) => Failure::Io(format!("{}: {m}", emb.display())),
        e => Failure::invariant(format!("{}: {e}", emb.display())),
    })
}

fn check_root(t: &Triangulation, root: VertexId) -> Result<(), Failure> {
    if root >= t.num_vertices() {
        return Err(Failure::Usage(format!("root {root} out of range (nv = {})", t.num_vertices())));
    }
    Ok(())
}

pub fn generate(run: &mut Run, fam: &FamilyArgs, k: Option<usize>, out: Option<&Path>) -> Result<(), Failure> {
    let seq = fam.family().generate().map_err(|e| Failure::Usage(e.to_string()))?;
    let k = k.unwrap_or(seq.len());
    let t = seq.member(k).map_err(|e| Failure::Usage(e.to_string()))?;
    run.emit(out, write_tri(t));
    Ok(())
}

pub fn pack(run: &mut Run, input: &Path, root: VertexId, out: Option<&Path>) -> Result<(), Failure> {
    let t = load_tri(run, input)?;
    check_root(&t, root)?;
    let (_, layout) = embedding::packed_embedding(&t, root, run.tol).map_err(Failure::invariant)?;
    run.emit(out, packing::write_pack(&layout));
    Ok(())
}

pub fn embed(run: &mut Run, input: &Path, root: VertexId, out: Option<&Path>) -> Result<(), Failure> {
    let t = load_tri(run, input)?;
    check_root(&t, root)?;
    let (emb, _) = embedding::packed_embedding(&t, root, run.tol).map_err(Failure::invariant)?;
    run.emit(out, embedding::write_emb(&emb));
    Ok(())
}

pub fn validate(
    run: &mut Run,
    tri: &Path,
    emb: &Path,
    eta_floor: f64,
    pair_cap: u64,
    report: Option<&Path>,
) -> Result<(), Failure> {
    let e = load_emb(run, tri, emb)?;
    let planar = e.check_planar();
    let sausage = sausage_check(&e, pair_cap, run.seed);
    let mut good = goodness_report(&e);
    good.sausage_constant_observed = Some(sausage.c_obs);
    let pass = good.eta_min > eta_floor && planar.is_ok();
    if !(good.eta_min > eta_floor) {
        run.fail_check(format!("eta_min {:e} <= floor {eta_floor:e}", good.eta_min));
    }
    if let Err(err) = &planar {
        run.fail_check(format!("embedding not planar: {err}"));
    }
    let value = json!({
        "goodness": good,
        "sausage": sausage,
        "eta_floor": eta_floor,
        "planar": planar.is_ok(),
        "pass": pass,
    });
    run.emit_json(report, &value);
    Ok(())
}

pub fn capacity(run: &mut Run, fam: &FamilyArgs, method: Method, out: Option<&Path>) -> Result<(), Failure> {
    let seq = fam.family().generate().map_err(|e| Failure::Usage(e.to_string()))?;
    let trace = capacity::capacity_trace(&seq, &seq.source, method, run.tol).map_err(Failure::invariant)?;
    run.emit(out, trace.to_csv());
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct TransferOptions {
    pub trials: usize,
    pub samples: usize,
    pub grid: usize,
    pub mc: Option<usize>,
}

/// First edge with two interior endpoints, else the first edge.
fn density_edge(t: &Triangulation) -> (VertexId, VertexId) {
    t.edges()
        .iter()
        .copied()
        .find(|&(u, v)| !t.is_boundary(u) && !t.is_boundary(v))
        .unwrap_or(t.edges()[0])
}

/// Transfer constants for `e` and the names of any failed checks.
pub fn transfer_report(e: &Embedding, seed: u64, opts: TransferOptions) -> Result<(Value, Vec<String>), Failure> {
    let domain = build_domain(e);
    let sausage = sausage_check(e, embedding::DEFAULT_PAIR_CAP, seed);
    let method = match opts.mc {
        Some(samples) => SmoothingMethod::MonteCarlo { samples },
        None => SmoothingMethod::Quadrature { radial: 8, angular: 16 },
    };
    let cfg = SmoothingConfig { c_ball: sausage.c_obs, method, seed };
    let cmp = comparison_suite(e, &domain, opts.trials, seed, cfg).map_err(Failure::invariant)?;
    let edge = density_edge(e.triangulation());
    let density = density_check(e, &domain, edge, cfg, opts.samples, opts.grid).map_err(Failure::invariant)?;
    let t = e.triangulation();
    let gradient_constant = (0..t.num_faces())
        .map(|f| face_gradient_constant(e.face_points(f)))
        .fold(0.0, f64::max);
    let eta_min = goodness_report(e).eta_min;
    let angle_bound = 2.0 / eta_min.sin();

    let mut failed = Vec::new();
    if cmp.forward_violations > 0 {
        failed.push(format!("forward energy bound violated in {} trials", cmp.forward_violations));
    }
    if !(cmp.c_bwd.is_finite() && cmp.c_bwd < 100.0) {
        failed.push(format!("backward constant {} not below 100", cmp.c_bwd));
    }
    if cmp.c_obs > angle_bound {
        failed.push(format!("gradient constant {} exceeds 2/sin(eta_min) = {angle_bound}", cmp.c_obs));
    }
    if !density.support_ok {
        failed.push(format!("{} Z-samples outside the support", density.outside_support));
    }
    let value = json!({
        "c_fwd": cmp.c_fwd,
        "c_bwd": cmp.c_bwd,
        "c_obs": cmp.c_obs,
        "c_emp": density.c_emp,
        "c_ball": sausage.c_obs,
        "gradient_constant": gradient_constant,
        "angle_bound": angle_bound,
        "comparison": cmp,
        "density": density,
        "witnesses": {
            "c_fwd_trial": cmp.c_fwd_trial,
            "c_bwd_trial": cmp.c_bwd_trial,
            "density_edge": density.edge,
            "sausage_pair": sausage.witness,
        },
    });
    Ok((value, failed))
}

pub fn transfer(
    run: &mut Run,
    tri: &Path,
    emb: &Path,
    opts: TransferOptions,
    report: Option<&Path>,
) -> Result<(), Failure> {
    if opts.trials == 0 || opts.samples == 0 || opts.grid == 0 {
        return Err(Failure::Usage("--trials, --samples and --grid must be positive".into()));
    }
    let e = load_emb(run, tri, emb)?;
    let (value, failed) = transfer_report(&e, run.seed, opts)?;
    for f in failed {
        run.fail_check(f);
    }
    run.emit_json(report, &value);
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64, Failure> {
    s.trim().parse().map_err(|_| Failure::Usage(format!("{s:?} is not a number")))
}

fn parse_point(s: &str) -> Result<Point, Failure> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| Failure::Usage(format!("point {s:?} must be `x,y`")))?;
    Ok(Point::new(parse_f64(x)?, parse_f64(y)?))
}

fn read_points(run: &mut Run, path: &Path) -> Result<Vec<Point>, Failure> {
    let text = run.read(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Vec<&str> = l.split_whitespace().collect();
            match v[..] {
                [x, y] => match (x.parse(), y.parse()) {
                    (Ok(x), Ok(y)) => Ok(Point::new(x, y)),
                    _ => Err(Failure::Io(format!("{}: bad point {l:?}", path.display()))),
                },
                _ => Err(Failure::Io(format!("{}: expected `x y`, got {l:?}", path.display()))),
            }
        })
        .collect()
}

fn parse_target(run: &mut Run, words: &[String]) -> Result<TargetSpec, Failure> {
    let usage = || Failure::Usage(format!("unrecognized target {words:?}"));
    let w: Vec<&str> = words.iter().map(String::as_str).collect();
    Ok(match w[..] {
        ["boundary", tri, emb] => {
            let e = load_emb(run, Path::new(tri), Path::new(emb))?;
            TargetSpec::from_domain(&build_domain(&e))
        }
        [kind @ ("disk" | "circle"), cx, cy, r] => {
            let (center, radius) = (Point::new(parse_f64(cx)?, parse_f64(cy)?), parse_f64(r)?);
            if kind == "disk" {
                TargetSpec::Disk { center, radius }
            } else {
                TargetSpec::Circle { center, radius }
            }
        }
        ["points", file] => TargetSpec::Points { points: read_points(run, Path::new(file))? },
        ["polyline", file] => TargetSpec::Polyline { points: read_points(run, Path::new(file))? },
        ["segment"] => TargetSpec::unit_segment(),
        _ => return Err(usage()),
    })
}

pub struct PolarityOptions<'a> {
    pub start: &'a str,
    pub r_out: f64,
    pub eps: &'a [f64],
    pub paths: u64,
}

pub fn polarity(
    run: &mut Run,
    target: &[String],
    opts: PolarityOptions,
    out: Option<&Path>,
    report: Option<&Path>,
) -> Result<(), Failure> {
    let target = parse_target(run, target)?;
    let cfg = BrownianConfig {
        start: parse_point(opts.start)?,
        target,
        eps: opts.eps.last().copied().unwrap_or(0.0),
        r_out: opts.r_out,
        paths: opts.paths,
        seed: run.seed,
    };
    let sweep = brownian::polarity_sweep(&cfg, opts.eps, &SweepRule::default())
        .map_err(|e| Failure::Usage(e.to_string()))?;
    run.emit(out, sweep.to_csv());
    if report.is_some() {
        run.emit_json(report, &json!({ "config": cfg, "sweep": sweep, "verdict": sweep.verdict.name() }));
    }
    Ok(())
}

pub fn render(
    run: &mut Run,
    tri: &Path,
    emb: &Path,
    pack: Option<&Path>,
    size: f64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if !(size > 0.0) {
        return Err(Failure::Usage("--size must be positive".into()));
    }
    let e = load_emb(run, tri, emb)?;
    let layout = match pack {
        None => None,
        Some(path) => {
            let text = run.read(path)?;
            let (centers, radii) =
                packing::read_pack(&text).map_err(|err| Failure::Io(format!("{}: {err}", path.display())))?;
            let n = e.triangulation().num_vertices();
            if centers.len() != n {
                return Err(Failure::invariant(format!("{} has {} circles for {n} vertices", path.display(), centers.len())));
            }
            let label = PackingLabel {
                radii,
                prescribed: e.triangulation().boundary_flags().to_vec(),
                residual: 0.0,
                sweeps: 0,
                newton_steps: 0,
            };
            Some(PackedLayout { label, centers, root: 0, closure_error: 0.0 })
        }
    };
    run.emit(out, embedding::render_svg(&e, layout.as_ref(), size));
    Ok(())
}
