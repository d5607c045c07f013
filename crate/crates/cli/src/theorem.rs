//! `theorem-check`: capacity traces, embedding quality, energy transfer and
//! the polarity surrogate for one family, each checked against the side the
//! family is known to fall on.

use std::path::Path;

use packlab::brownian::{self, BrownianConfig, PolarityVerdict, SweepRule, TargetSpec};
use packlab::capacity::{capacity_trace, classify, Classification, ClassifierConfig, Method};
use packlab::embedding::{goodness_report, packed_embedding, sausage_check, Embedding, DEFAULT_PAIR_CAP};
use packlab::packing::{ring_report, PackedLayout};
use packlab::{ExhaustionSequence, Family, Point};
use serde_json::{json, Value};

use crate::commands::{transfer_report, TransferOptions};
use crate::run::{Failure, Run};
use crate::FamilyArgs;

/// Sausage constant floor relative to `sin(eta_min)`.
const SAUSAGE_FLOOR: f64 = 0.05;
const COMPARABILITY: f64 = 10.0;

fn expected(family: &Family) -> Classification {
    match family {
        Family::LatticeBall { .. } | Family::Tube { .. } => Classification::RecurrentConsistent,
        Family::HyperbolicBall { .. } | Family::TreeOfTubes { .. } => Classification::TransientConsistent,
    }
}

/// Analytic stand-in for the accumulation set and the verdict it should get.
fn surrogate(family: &Family, paths: u64, seed: u64) -> (&'static str, BrownianConfig, Vec<f64>, PolarityVerdict) {
    let base = |target, start, r_out| BrownianConfig { start, target, eps: 0.0, r_out, paths, seed };
    let non_polar_eps = vec![1e-2, 1e-4, 1e-8, 1e-12];
    match family {
        Family::LatticeBall { .. } | Family::Tube { .. } => (
            "ten-point cloud",
            base(
                TargetSpec::Points { points: brownian::point_cloud(10, Point::ORIGIN, 0.01) },
                Point::new(0.5, 0.0),
                1.0,
            ),
            vec![1e-1, 1e-4, 1e-8, 1e-12, 1e-14],
            PolarityVerdict::PolarConsistent,
        ),
        Family::HyperbolicBall { .. } => (
            "unit circle",
            base(TargetSpec::Circle { center: Point::ORIGIN, radius: 1.0 }, Point::new(0.5, 0.0), 10.0),
            non_polar_eps,
            PolarityVerdict::NonPolarConsistent,
        ),
        Family::TreeOfTubes { .. } => (
            "unit segment",
            base(TargetSpec::unit_segment(), Point::new(0.5, 0.3), 10.0),
            non_polar_eps,
            PolarityVerdict::NonPolarConsistent,
        ),
    }
}

/// Largest member that embeds: family coordinates where they exist,
/// otherwise the circle packing.
fn largest_embedding(
    seq: &ExhaustionSequence,
    tol: f64,
) -> Result<(usize, Embedding, Option<PackedLayout>, Vec<Value>), Failure> {
    let mut skipped = Vec::new();
    for k in (1..=seq.len()).rev() {
        let t = seq.member(k).map_err(Failure::invariant)?;
        let attempt = match seq.member_coords(k) {
            Some(coords) => Embedding::new(t.clone(), coords).map(|e| (e, None)),
            None => packed_embedding(t, seq.root, tol).map(|(e, l)| (e, Some(l))),
        };
        match attempt {
            Ok((e, layout)) => return Ok((k, e, layout, skipped)),
            Err(err) => skipped.push(json!({ "k": k, "error": err.to_string() })),
        }
    }
    Err(Failure::invariant("no member of the exhaustion could be embedded"))
}

pub fn theorem_check(
    run: &mut Run,
    fam: &FamilyArgs,
    trials: usize,
    paths: u64,
    report: Option<&Path>,
) -> Result<(), Failure> {
    if trials == 0 || paths == 0 {
        return Err(Failure::Usage("--trials and --paths must be positive".into()));
    }
    let family = fam.family();
    let seq = family.generate().map_err(|e| Failure::Usage(e.to_string()))?;
    let want = expected(&family);
    let mut checks: Vec<(String, bool)> = Vec::new();

    // capacities
    let config = ClassifierConfig::default();
    let mut traces = Vec::new();
    for method in [Method::Discrete, Method::PlContinuous] {
        let trace = capacity_trace(&seq, &seq.source, method, run.tol).map_err(Failure::invariant)?;
        let verdict = classify(&trace.values(), &config).map_err(Failure::invariant)?;
        checks.push((
            format!("{} verdict {} (expected {})", method.name(), verdict.classification.name(), want.name()),
            verdict.classification == want,
        ));
        traces.push((trace, verdict));
    }
    let ratios: Vec<f64> = traces[0]
        .0
        .values()
        .iter()
        .zip(traces[1].0.values())
        .map(|(d, p)| p / d)
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    checks.push((
        format!("pl/discrete ratio in [{lo:.4}, {hi:.4}] within [1/{COMPARABILITY}, {COMPARABILITY}]"),
        lo >= 1.0 / COMPARABILITY && hi <= COMPARABILITY,
    ));
    checks.push(("discrete trace nonincreasing".into(), traces[0].0.is_monotone(1e-9)));

    // embedding quality
    let (k_emb, emb, layout, skipped) = largest_embedding(&seq, run.tol)?;
    let sausage = sausage_check(&emb, DEFAULT_PAIR_CAP, run.seed);
    let mut good = goodness_report(&emb);
    good.sausage_constant_observed = Some(sausage.c_obs);
    let floor = SAUSAGE_FLOOR * good.eta_min.sin();
    checks.push((
        format!("sausage constant {:.6} >= {floor:.6}", sausage.c_obs),
        sausage.c_obs > 0.0 && sausage.c_obs >= floor,
    ));
    let ring = layout.as_ref().map(|l| ring_report(emb.triangulation(), &l.label));
    if let Some(ring) = &ring {
        let bound = (1.0 / (1.0 + ring.max_ratio)).asin();
        checks.push((
            format!("eta_min {:.6} >= asin(1/(1+rho_max)) = {bound:.6}", good.eta_min),
            good.eta_min >= bound,
        ));
    }

    // energy transfer
    let opts = TransferOptions { trials, samples: 100_000, grid: 4, mc: None };
    let (transfer, failed) = transfer_report(&emb, run.seed, opts)?;
    checks.push(("energy transfer".into(), failed.is_empty()));
    for f in failed {
        checks.push((f, false));
    }

    // polarity surrogate
    let (name, cfg, eps, want_polar) = surrogate(&family, paths, run.seed);
    let sweep = brownian::polarity_sweep(&cfg, &eps, &SweepRule::default()).map_err(Failure::invariant)?;
    checks.push((
        format!("{name}: {} (expected {})", sweep.verdict.name(), want_polar.name()),
        sweep.verdict == want_polar,
    ));

    let pass = checks.iter().all(|(_, ok)| *ok);
    for (what, ok) in &checks {
        if !ok {
            run.fail_check(what.clone());
        }
    }
    let trace_json = |i: usize| {
        let (trace, verdict) = &traces[i];
        json!({ "trace": trace, "verdict": verdict })
    };
    let value = json!({
        "family": family,
        "members": seq.len(),
        "expected": want.name(),
        "verdict": if pass { want.name() } else { Classification::Inconclusive.name() },
        "discrete": trace_json(0),
        "pl_continuous": trace_json(1),
        "comparability": { "ratios": ratios, "min": lo, "max": hi },
        "goodness": {
            "member": k_emb,
            "packed": layout.is_some(),
            "skipped": skipped,
            "report": good,
            "sausage": sausage,
            "ring": ring,
        },
        "transfer": transfer,
        "polarity": {
            "surrogate": name,
            "config": cfg,
            "table": sweep.table,
            "verdict": sweep.verdict.name(),
            "expected": want_polar.name(),
        },
        "checks": checks.iter().map(|(what, ok)| json!({ "check": what, "pass": ok })).collect::<Vec<_>>(),
        "pass": pass,
    });
    run.emit_json(report, &value);
    Ok(())
}
