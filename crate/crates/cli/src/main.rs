//! `sim`: run a scene with one of the contact solvers and write CSV output.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 invalid scene or
//! parameters, 3 solver abort.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use mcsim_core::harness::{self, Mode, RunConfig};
use mcsim_core::{Error, SceneFile, SolverKind};

#[derive(Parser, Debug)]
#[command(name = "sim", version, about = "Multibody frictional-contact simulator and solver benchmark")]
struct Args {
    /// Scene description (JSON).
    #[arg(long)]
    scene: PathBuf,
    /// canal, subadmm or pgs.
    #[arg(long, default_value = "canal")]
    solver: SolverKind,
    /// Steps in traj mode, trials in single-step mode.
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Time step override [s].
    #[arg(long)]
    dt: Option<f64>,
    /// Outer iteration cap (AL iterations, ADMM iterations or PGS sweeps).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Convergence tolerance of the outer loop.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// traj, single-step or scaling.
    #[arg(long, default_value = "traj")]
    mode: Mode,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write zero wall times so repeated runs are byte-identical.
    #[arg(long)]
    deterministic: bool,
    /// Parallel per-subsystem work inside the solvers.
    #[arg(long)]
    parallel: bool,
    /// Wall-clock budget per solve [ms].
    #[arg(long)]
    budget_ms: Option<f64>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Scene(_) | Error::UnsupportedPair(..) | Error::InvalidParameter(_) | Error::InvalidModel(_) | Error::UnknownSubsystem(_) | Error::Json { .. } => 2,
        Error::Io { .. } | Error::Csv(_) => 1,
        _ => 3,
    }
}

fn run(args: Args) -> Result<(), Error> {
    // An unreadable scene file counts as a scene error.
    let scene = SceneFile::load(&args.scene).map_err(|e| match e {
        Error::Io { .. } => Error::Scene(e.to_string()),
        other => other,
    })?;
    let mut cfg = RunConfig::new(args.solver, args.mode, args.out);
    cfg.steps = args.steps;
    cfg.dt = args.dt;
    cfg.seed = args.seed;
    cfg.deterministic = args.deterministic;
    cfg.parallel = args.parallel;
    if let Some(k) = args.max_iter {
        cfg.max_iter = k;
    }
    if let Some(t) = args.tol {
        cfg.tol = t;
    }
    if let Some(ms) = args.budget_ms {
        if !(ms > 0.0) || !ms.is_finite() {
            return Err(Error::InvalidParameter(format!("budget-ms must be positive, got {ms}")));
        }
        cfg.budget = Some(Duration::from_secs_f64(ms * 1e-3));
    }
    let summary = harness::run(&scene, &cfg)?;
    log::info!("{} rows, {} converged, max residual {:.3e}", summary.rows, summary.converged, summary.max_residual);
    for f in &summary.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
