//! Benchmark runs producing CSV output.
//!
//! * `traj`: simulate a scene for N steps.
//! * `single-step`: N independent solves of the first step, each with fresh
//!   random wrenches drawn uniformly from `[-W, W]` per component.
//! * `scaling`: cold solves on growing grids of resting spheres.
//!
//! Every file starts with one `#` comment line carrying the run parameters.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{UnitQuaternion, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scene::{ScalingSpec, SceneFile};
use crate::scenes;
use crate::sim::{self, SolverKind, SolverSettings, StepOutcome, World};
use crate::solver::{ResidualReport, TraceSample};

pub const METRICS_HEADER: [&str; 12] = [
    "step",
    "solver",
    "iterations",
    "inner_iterations",
    "wall_time_s",
    "residual",
    "theta_p",
    "theta_d",
    "beta",
    "contacts",
    "energy",
    "converged",
];

pub const TRACE_HEADER: [&str; 8] = ["step", "solver", "iteration", "time_s", "residual", "theta_p", "theta_d", "beta"];

pub const TRAJECTORY_HEADER: [&str; 11] = ["step", "time", "subsystem", "body", "x", "y", "z", "qw", "qx", "qy", "qz"];

pub const SCALING_HEADER: [&str; 8] = ["solver", "bodies", "dofs", "contacts", "median_wall_time_s", "iterations", "residual", "converged"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Traj,
    SingleStep,
    Scaling,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traj" => Ok(Mode::Traj),
            "single-step" => Ok(Mode::SingleStep),
            "scaling" => Ok(Mode::Scaling),
            other => Err(Error::InvalidParameter(format!("unknown mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Traj => "traj",
            Mode::SingleStep => "single-step",
            Mode::Scaling => "scaling",
        })
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub solver: SolverKind,
    pub mode: Mode,
    /// Steps (traj) or trials (single-step).
    pub steps: usize,
    /// Overrides the scene's time step.
    pub dt: Option<f64>,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub out: PathBuf,
    /// Write zeros in every wall-time column so output is byte-reproducible.
    pub deterministic: bool,
    pub parallel: bool,
    pub budget: Option<Duration>,
}

impl RunConfig {
    pub fn new(solver: SolverKind, mode: Mode, out: impl Into<PathBuf>) -> Self {
        let defaults = SolverSettings::new(solver);
        Self {
            solver,
            mode,
            steps: 1,
            dt: None,
            max_iter: defaults.control.max_iter,
            tol: defaults.control.tol,
            seed: 0,
            out: out.into(),
            deterministic: false,
            parallel: false,
            budget: None,
        }
    }

    pub fn settings(&self) -> SolverSettings {
        let mut s = SolverSettings::new(self.solver).with_limits(self.max_iter, self.tol);
        s.control.trace = true;
        s.control.parallel = self.parallel;
        s.control.budget = self.budget;
        s
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max-iter must be positive".into()));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Scene(format!("dt must be positive, got {dt}")));
            }
        }
        Ok(())
    }
}

/// What a run produced.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub rows: usize,
    pub converged: usize,
    pub files: Vec<PathBuf>,
    pub max_residual: f64,
}

struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    fn create(dir: &Path, name: &str, comment: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let io = |source| Error::Io { path: path.clone(), source };
        let mut file = BufWriter::new(File::create(&path).map_err(io)?);
        writeln!(file, "# {comment}").map_err(io)?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header)?;
        Ok(Self { path, writer })
    }

    fn row(&mut self, fields: &[String]) -> Result<()> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|source| Error::Io { path: self.path.clone(), source })?;
        Ok(self.path)
    }
}

fn num(x: f64) -> String {
    format!("{x:.9e}")
}

struct Writers {
    det: bool,
    solver: SolverKind,
    metrics: CsvOut,
    trace: CsvOut,
    trajectory: CsvOut,
}

impl Writers {
    fn open(dir: &Path, comment: &str, cfg: &RunConfig) -> Result<Self> {
        Ok(Self {
            det: cfg.deterministic,
            solver: cfg.solver,
            metrics: CsvOut::create(dir, "metrics.csv", comment, &METRICS_HEADER)?,
            trace: CsvOut::create(dir, "trace.csv", comment, &TRACE_HEADER)?,
            trajectory: CsvOut::create(dir, "trajectory.csv", comment, &TRAJECTORY_HEADER)?,
        })
    }

    fn time(&self, t: f64) -> String {
        num(if self.det { 0.0 } else { t })
    }

    fn report(&mut self, step: usize, r: &ResidualReport, beta: f64, contacts: usize, energy: f64) -> Result<()> {
        let row = vec![
            step.to_string(),
            self.solver.to_string(),
            r.iterations.to_string(),
            r.inner_iterations.to_string(),
            self.time(r.wall_time),
            num(r.metric),
            num(r.theta_p),
            num(r.theta_d),
            num(beta),
            contacts.to_string(),
            num(energy),
            u8::from(r.converged).to_string(),
        ];
        self.metrics.row(&row)?;
        for s in &r.trace {
            self.trace_row(step, s)?;
        }
        Ok(())
    }

    fn trace_row(&mut self, step: usize, s: &TraceSample) -> Result<()> {
        let row = vec![
            step.to_string(),
            self.solver.to_string(),
            s.iteration.to_string(),
            self.time(s.time),
            num(s.metric),
            num(s.theta_p),
            num(s.theta_d),
            num(s.beta),
        ];
        self.trace.row(&row)
    }

    fn poses(&mut self, step: usize, world: &World) -> Result<()> {
        for s in world.subsystems.iter().filter(|s| !s.is_static()) {
            for (b, pose) in s.bodies.iter().zip(s.body_poses()) {
                let t = pose.translation.vector;
                let q: UnitQuaternion<f64> = pose.rotation;
                let row = vec![
                    step.to_string(),
                    num(world.time),
                    s.name.clone(),
                    b.name.clone(),
                    num(t.x),
                    num(t.y),
                    num(t.z),
                    num(q.w),
                    num(q.i),
                    num(q.j),
                    num(q.k),
                ];
                self.trajectory.row(&row)?;
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Vec<PathBuf>> {
        Ok(vec![self.metrics.finish()?, self.trace.finish()?, self.trajectory.finish()?])
    }
}

fn comment(scene: &SceneFile, cfg: &RunConfig) -> String {
    format!(
        "mcsim scene={} solver={} mode={} steps={} max_iter={} tol={:e} v1 rng=ChaCha8Rng seed={}",
        if scene.name.is_empty() { "unnamed" } else { &scene.name },
        cfg.solver,
        cfg.mode,
        cfg.steps,
        cfg.max_iter,
        cfg.tol,
        cfg.seed
    )
}

fn build_world(scene: &SceneFile, cfg: &RunConfig) -> Result<World> {
    let mut scene = scene.clone();
    if let Some(dt) = cfg.dt {
        scene.dt = dt;
    }
    scene.build()
}

/// Runs the configured mode and writes its CSV files into `cfg.out`.
pub fn run(scene: &SceneFile, cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let world = build_world(scene, cfg)?;
    std::fs::create_dir_all(&cfg.out).map_err(|source| Error::Io { path: cfg.out.clone(), source })?;
    match cfg.mode {
        Mode::Traj => run_traj(world, scene, cfg),
        Mode::SingleStep => run_single(world, scene, cfg),
        Mode::Scaling => run_scaling(scene, cfg),
    }
}

fn tally(summary: &mut RunSummary, out: &StepOutcome) {
    summary.rows += 1;
    summary.converged += usize::from(out.report.converged);
    summary.max_residual = summary.max_residual.max(out.report.metric);
}

fn run_traj(mut world: World, scene: &SceneFile, cfg: &RunConfig) -> Result<RunSummary> {
    let settings = cfg.settings();
    let mut w = Writers::open(&cfg.out, &comment(scene, cfg), cfg)?;
    let mut summary = RunSummary::default();
    w.poses(0, &world)?;
    for step in 1..=cfg.steps {
        let out = world.step(&settings)?;
        let beta = out.report.trace.last().map_or(0.0, |s| s.beta);
        w.report(step, &out.report, beta, out.contacts, out.energy)?;
        w.poses(step, &world)?;
        tally(&mut summary, &out);
    }
    summary.files = w.finish()?;
    Ok(summary)
}

/// Uniform random wrench per dynamic body, components in `[-amp, amp]`.
pub fn random_wrenches(world: &World, amp: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<Vector6<f64>>> {
    world
        .subsystems
        .iter()
        .map(|s| {
            (0..s.bodies.len())
                .map(|_| {
                    if s.is_static() || amp == 0.0 {
                        Vector6::zeros()
                    } else {
                        Vector6::from_fn(|_, _| rng.random_range(-amp..=amp))
                    }
                })
                .collect()
        })
        .collect()
}

fn run_single(world: World, scene: &SceneFile, cfg: &RunConfig) -> Result<RunSummary> {
    let mut settings = cfg.settings();
    settings.warm_start = false;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w = Writers::open(&cfg.out, &comment(scene, cfg), cfg)?;
    let mut summary = RunSummary::default();
    for trial in 1..=cfg.steps.max(1) {
        let mut trial_world = world.clone();
        trial_world.extra_wrenches = random_wrenches(&world, world.wrench_amplitude, &mut rng);
        let out = trial_world.step(&settings)?;
        let beta = out.report.trace.last().map_or(0.0, |s| s.beta);
        w.report(trial, &out.report, beta, out.contacts, out.energy)?;
        w.poses(trial, &trial_world)?;
        tally(&mut summary, &out);
    }
    summary.files = w.finish()?;
    Ok(summary)
}

/// Timing of one scaling point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingPoint {
    pub bodies: usize,
    pub dofs: usize,
    pub contacts: usize,
    pub median_wall_time: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Cold single-step solves on `sphere_grid(n)` for each count; timing covers
/// the whole solve including any factorization.
pub fn scaling_points(spec: &ScalingSpec, settings: &SolverSettings) -> Result<Vec<ScalingPoint>> {
    let mut settings = settings.clone();
    settings.control.trace = false;
    let mut points = Vec::new();
    for &n in &spec.counts {
        let world = scenes::sphere_grid(n, spec).build()?;
        let problem = world.assemble()?;
        let mut times = Vec::with_capacity(spec.repeats.max(1));
        let mut last = None;
        for _ in 0..spec.repeats.max(1) {
            let t0 = Instant::now();
            let (_, report) = sim::solve(&problem, None, &settings)?;
            times.push(t0.elapsed().as_secs_f64());
            last = Some(report);
        }
        let report = last.expect("at least one repeat");
        points.push(ScalingPoint {
            bodies: n,
            dofs: problem.total_dofs(),
            contacts: problem.contact_count(),
            median_wall_time: median(times),
            iterations: report.iterations,
            residual: report.metric,
            converged: report.converged,
        });
    }
    Ok(points)
}

/// Least-squares slope of `log t` against `log n`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| (n.ln(), t.max(1e-12).ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn run_scaling(scene: &SceneFile, cfg: &RunConfig) -> Result<RunSummary> {
    let spec = scene.scaling.clone().unwrap_or_default();
    if spec.counts.is_empty() || spec.counts.contains(&0) {
        return Err(Error::Scene("scaling counts must be positive".into()));
    }
    let settings = cfg.settings();
    let text = comment(scene, cfg);
    let points = scaling_points(&spec, &settings)?;
    let mut table = CsvOut::create(&cfg.out, "scaling.csv", &text, &SCALING_HEADER)?;
    let mut w = Writers::open(&cfg.out, &text, cfg)?;
    let mut summary = RunSummary::default();
    for (k, p) in points.iter().enumerate() {
        table.row(&[
            cfg.solver.to_string(),
            p.bodies.to_string(),
            p.dofs.to_string(),
            p.contacts.to_string(),
            w.time(p.median_wall_time),
            p.iterations.to_string(),
            num(p.residual),
            u8::from(p.converged).to_string(),
        ])?;
        let report = ResidualReport { metric: p.residual, iterations: p.iterations, wall_time: p.median_wall_time, converged: p.converged, ..Default::default() };
        w.report(k + 1, &report, 0.0, p.contacts, 0.0)?;
        summary.rows += 1;
        summary.converged += usize::from(p.converged);
        summary.max_residual = summary.max_residual.max(p.residual);
    }
    summary.files = w.finish()?;
    summary.files.push(table.finish()?);
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0].iter().map(|&n: &f64| (n, 3e-6 * n.powf(2.0))).collect();
        assert!((log_log_slope(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn modes_parse() {
        for m in [Mode::Traj, Mode::SingleStep, Mode::Scaling] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("bogus".parse::<Mode>().is_err());
    }

    #[test]
    fn wrenches_stay_in_bounds() {
        let world = scenes::sphere_stack(3, 2.0).build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = random_wrenches(&world, 2.5, &mut rng);
        assert!(w[0].iter().all(|x| x.iter().all(|c| *c == 0.0)));
        assert!(w[1..].iter().flatten().all(|x| x.iter().all(|c| c.abs() <= 2.5)));
    }
}
