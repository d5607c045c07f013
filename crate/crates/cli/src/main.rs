mod commands;
mod run;
mod theorem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use packlab::capacity::Method;
use packlab::packing::DEFAULT_TOL;
use packlab::rng::DEFAULT_SEED;
use packlab::Family;
use serde::Serialize;

use run::{Failure, Run};

/// Circle packings, capacities and Brownian hitting estimates for planar
/// triangulations.
#[derive(Parser, Debug)]
#[command(name = "packlab", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Global {
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Packing tolerance on interior angle sums.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Global seed; defaults to $PACKLAB_SEED, then a fixed constant.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Where to write the run manifest (stderr when omitted).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    #[value(name = "lattice_ball")]
    LatticeBall,
    #[value(name = "hyperbolic_ball")]
    HyperbolicBall,
    #[value(name = "tube")]
    Tube,
    #[value(name = "tree_of_tubes")]
    TreeOfTubes,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    /// Exhaustion size: ball radius, tube length or tree depth.
    #[arg(long = "R", visible_alias = "K")]
    r: usize,
    #[arg(long, default_value_t = 7)]
    degree: usize,
    #[arg(long, default_value_t = 5)]
    circumference: usize,
    /// Tube length between branch points of a tree of tubes.
    #[arg(long, default_value_t = 4)]
    segment: usize,
}

impl FamilyArgs {
    pub fn family(&self) -> Family {
        match self.family {
            FamilyName::LatticeBall => Family::LatticeBall { radius: self.r },
            FamilyName::HyperbolicBall => Family::HyperbolicBall { degree: self.degree, radius: self.r },
            FamilyName::Tube => Family::Tube { circumference: self.circumference, length: self.r },
            FamilyName::TreeOfTubes => Family::TreeOfTubes {
                circumference: self.circumference,
                segment_len: self.segment,
                depth: self.r,
            },
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
pub enum MethodName {
    #[value(name = "discrete")]
    Discrete,
    #[value(name = "pl-continuous")]
    PlContinuous,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Discrete => Method::Discrete,
            MethodName::PlContinuous => Method::PlContinuous,
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Write one member of a family exhaustion as `.tri`.
    Generate {
        #[command(flatten)]
        fam: FamilyArgs,
        /// Member index, 1-based (default: last).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pack a `.tri` with unit boundary radii and write the `.pack`.
    Pack {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        root: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the circle-packing embedding of a `.tri` as `.emb`.
    Embed {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        root: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Goodness and sausage report for an embedding.
    Validate {
        tri: PathBuf,
        emb: PathBuf,
        /// Smallest acceptable face angle, radians.
        #[arg(long, default_value_t = 1e-6)]
        eta_floor: f64,
        #[arg(long, default_value_t = packlab::embedding::DEFAULT_PAIR_CAP)]
        pair_cap: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Capacity trace over an exhaustion as `.cap` CSV.
    Capacity {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long, value_enum, default_value_t = MethodName::Discrete)]
        method: MethodName,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy-transfer constants for an embedding.
    Transfer {
        tri: PathBuf,
        emb: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Z-samples for the density check.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        grid: usize,
        /// Monte Carlo samples per ball (quadrature when omitted).
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Hitting-probability sweep over a list of tolerances, as CSV.
    Polarity {
        /// `boundary FILE.tri FILE.emb`, `disk CX CY R`, `circle CX CY R`,
        /// `points FILE` or `polyline FILE`.
        #[arg(long, num_args = 1..=4, required = true, allow_hyphen_values = true)]
        target: Vec<String>,
        #[arg(long, default_value = "0.5,0")]
        start: String,
        #[arg(long, default_value_t = 10.0)]
        r_out: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the sweep verdict as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Full pipeline on one family with a joint report.
    TheoremCheck {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// SVG drawing of an embedding, with circles when a `.pack` is given.
    Render {
        tri: PathBuf,
        emb: PathBuf,
        #[arg(long)]
        pack: Option<PathBuf>,
        #[arg(long, default_value_t = 800.0)]
        size: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate { .. } => "generate",
            Command::Pack { .. } => "pack",
            Command::Embed { .. } => "embed",
            Command::Validate { .. } => "validate",
            Command::Capacity { .. } => "capacity",
            Command::Transfer { .. } => "transfer",
            Command::Polarity { .. } => "polarity",
            Command::TheoremCheck { .. } => "theorem-check",
            Command::Render { .. } => "render",
        }
    }
}

fn seed_from_env() -> Result<u64, Failure> {
    match std::env::var("PACKLAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("PACKLAB_SEED={s:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn dispatch(cmd: &Command, run: &mut Run) -> Result<(), Failure> {
    match cmd {
        Command::Generate { fam, k, out } => commands::generate(run, fam, *k, out.as_deref()),
        Command::Pack { input, root, out } => commands::pack(run, input, *root, out.as_deref()),
        Command::Embed { input, root, out } => commands::embed(run, input, *root, out.as_deref()),
        Command::Validate { tri, emb, eta_floor, pair_cap, report } => {
            commands::validate(run, tri, emb, *eta_floor, *pair_cap, report.as_deref())
        }
        Command::Capacity { fam, method, out } => commands::capacity(run, fam, (*method).into(), out.as_deref()),
        Command::Transfer { tri, emb, trials, samples, grid, mc, report } => {
            let opts = commands::TransferOptions { trials: *trials, samples: *samples, grid: *grid, mc: *mc };
            commands::transfer(run, tri, emb, opts, report.as_deref())
        }
        Command::Polarity { target, start, r_out, eps, paths, out, report } => {
            let opts = commands::PolarityOptions { start, r_out: *r_out, eps, paths: *paths };
            commands::polarity(run, target, opts, out.as_deref(), report.as_deref())
        }
        Command::TheoremCheck { fam, trials, paths, report } => {
            theorem::theorem_check(run, fam, *trials, *paths, report.as_deref())
        }
        Command::Render { tri, emb, pack, size, out } => {
            commands::render(run, tri, emb, pack.as_deref(), *size, out.as_deref())
        }
    }
}

fn execute(cli: &Cli, argv: &[String]) -> Result<u8, Failure> {
    let g = &cli.global;
    if g.workers == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    if !(g.tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let seed = match g.seed {
        Some(s) => s,
        None => seed_from_env()?,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(g.workers)
        .build_global()
        .map_err(|e| Failure::Usage(format!("worker pool: {e}")))?;

    let mut run = Run::new(seed, g.tol);
    dispatch(&cli.command, &mut run)?;
    let exit_code = if run.failed_checks().is_empty() { 0 } else { 1 };
    let outputs = run.commit()?;
    let params = serde_json::to_value(&cli.command).expect("arguments serialize");
    let manifest = run.manifest(argv, cli.command.name(), params, g.workers, outputs, exit_code);
    let mut text = serde_json::to_string_pretty(&manifest).expect("JSON values serialize");
    text.push('\n');
    match &g.manifest {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?,
        None => eprint!("{text}"),
    }
    for check in run.failed_checks() {
        eprintln!("check failed: {check}");
    }
    Ok(exit_code)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli, &argv) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("packlab: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
