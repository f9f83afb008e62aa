//! Shared solver state, controls and reports.

pub mod canal;
pub mod pgs;
pub mod subadmm;

use std::time::{Duration, Instant};

use nalgebra::DVector;

use crate::assembly::ContactProblem;
use crate::metric::contact_residual_metric;

/// Iterates shared by all solvers. `z` and `u` are per constraint, summed
/// over slack blocks.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub vhat: Vec<DVector<f64>>,
    pub lambda: Vec<DVector<f64>>,
    pub z: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
    pub beta: f64,
    /// Outer iterations (AL iterations, ADMM iterations or PGS sweeps).
    pub iterations: usize,
    /// Inner Newton iterations (CANAL only).
    pub inner_iterations: usize,
    pub converged: bool,
}

impl SolverState {
    /// Zero impulses and unconstrained velocities.
    pub fn cold(problem: &ContactProblem, beta: f64) -> Self {
        let zeros = || problem.constraints.iter().map(|c| DVector::zeros(c.rows())).collect::<Vec<_>>();
        Self {
            vhat: problem.free_velocity(),
            lambda: zeros(),
            z: zeros(),
            u: zeros(),
            beta,
            iterations: 0,
            inner_iterations: 0,
            converged: false,
        }
    }

    /// Starts from given impulses: `v̂` follows from the dynamics, `u = -λ`
    /// and `z = Jv̂`.
    pub fn from_impulses(problem: &ContactProblem, lambda: Vec<DVector<f64>>, beta: f64) -> Self {
        let vhat = problem.velocity_from_impulse(&lambda);
        let z = problem.constraints.iter().map(|c| c.velocity(&vhat)).collect();
        let u = lambda.iter().map(|l| -l).collect();
        Self { vhat, lambda, z, u, beta, iterations: 0, inner_iterations: 0, converged: false }
    }

    pub fn is_finite(&self) -> bool {
        let ok = |v: &[DVector<f64>]| v.iter().all(|x| x.iter().all(|c| c.is_finite()));
        ok(&self.vhat) && ok(&self.lambda) && self.beta.is_finite()
    }
}

/// Limits and tracing for one solve.
#[derive(Clone, Debug)]
pub struct SolveControl {
    pub max_iter: usize,
    pub tol: f64,
    /// Stop after this much solver time (excluding tracing overhead).
    pub budget: Option<Duration>,
    /// Record the contact-residual metric after every outer iteration.
    pub trace: bool,
    /// Run independent phases on the rayon pool (SubADMM).
    pub parallel: bool,
}

impl SolveControl {
    pub fn new(max_iter: usize, tol: f64) -> Self {
        Self { max_iter, tol, budget: None, trace: false, parallel: false }
    }

    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }

    pub fn with_budget(mut self, budget: Duration) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSample {
    pub iteration: usize,
    /// Solver time since the start of the solve (s).
    pub time: f64,
    pub metric: f64,
    pub theta_p: f64,
    pub theta_d: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ResidualReport {
    pub metric: f64,
    pub theta_p: f64,
    pub theta_d: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
    /// Solver wall time (s).
    pub wall_time: f64,
    pub converged: bool,
    pub trace: Vec<TraceSample>,
}

/// Solver clock that pauses while trace samples are evaluated.
pub(crate) struct Clock {
    start: Instant,
    paused: Duration,
}

impl Clock {
    pub fn start() -> Self {
        Self { start: Instant::now(), paused: Duration::ZERO }
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed().saturating_sub(self.paused)
    }

    pub fn over(&self, budget: Option<Duration>) -> bool {
        budget.is_some_and(|b| self.elapsed() >= b)
    }

    /// Records a trace sample from impulses without charging solver time.
    pub fn sample(
        &mut self,
        control: &SolveControl,
        problem: &ContactProblem,
        lambda: &[DVector<f64>],
        iteration: usize,
        residuals: (f64, f64),
        beta: f64,
        out: &mut Vec<TraceSample>,
    ) {
        if !control.trace {
            return;
        }
        let t0 = Instant::now();
        let time = self.elapsed().as_secs_f64();
        let metric = contact_residual_metric(problem, lambda);
        out.push(TraceSample { iteration, time, metric, theta_p: residuals.0, theta_d: residuals.1, beta });
        self.paused += t0.elapsed();
    }
}
