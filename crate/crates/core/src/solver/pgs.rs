//! Projected Gauss-Seidel over the Delassus operator, kept as a baseline.
//!
//! Works on the unsplit system with dense cached columns `W_i = A⁻¹J_iᵀ`.
//! Each visit solves the constraint's own block exactly and projects.

use nalgebra::{DMatrix, DVector, Vector3};

use super::{Clock, ResidualReport, SolveControl, SolverState};
use crate::assembly::{ConstraintKind, ContactProblem};
use crate::cone::{self, ConeInput};
use crate::error::{Error, Result};

/// Regularization added to every Delassus block.
pub const DELASSUS_REG: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PgsConfig {
    pub max_sweeps: usize,
    /// Stop when no impulse changes by more than this in a sweep.
    pub tol: f64,
}

impl Default for PgsConfig {
    fn default() -> Self {
        Self { max_sweeps: 200, tol: 1e-10 }
    }
}

/// Diagonal Delassus blocks and cached response columns.
pub struct Delassus {
    pub w: Vec<DMatrix<f64>>,
    pub d: Vec<DMatrix<f64>>,
    pub d_inv: Vec<DMatrix<f64>>,
    pub j: Vec<DMatrix<f64>>,
    pub e: Vec<DVector<f64>>,
}

impl Delassus {
    pub fn new(problem: &ContactProblem) -> Result<Self> {
        let mono = problem.monolithic_view();
        let (mut w, mut d, mut d_inv, mut j, mut e) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (i, c) in problem.constraints.iter().enumerate() {
            let rows = mono.rows_of(i);
            let ji = mono.j.rows(rows.start, rows.len()).into_owned();
            let mut wi = DMatrix::zeros(mono.a.nrows(), rows.len());
            for (k, sub) in problem.subsystems.iter().enumerate() {
                let dofs = mono.dofs_of(k);
                if dofs.is_empty() {
                    continue;
                }
                let jt = ji.columns(dofs.start, dofs.len()).transpose();
                if jt.iter().all(|x| *x == 0.0) {
                    continue;
                }
                let chol = sub.cholesky().ok_or_else(|| Error::SolverAbort("missing subsystem factorization".into()))?;
                wi.rows_mut(dofs.start, dofs.len()).copy_from(&chol.solve(&jt));
            }
            let di = &ji * &wi + DMatrix::identity(rows.len(), rows.len()) * DELASSUS_REG;
            let inv = di.clone().try_inverse().ok_or_else(|| Error::SolverAbort(format!("Delassus block {i} is singular")))?;
            w.push(wi);
            d.push(di);
            d_inv.push(inv);
            j.push(ji);
            e.push(c.e.clone());
        }
        Ok(Self { w, d, d_inv, j, e })
    }
}

/// One constraint's local update given its current velocity `jv`.
fn local_update(kind: ConstraintKind, lambda: &DVector<f64>, jv: &DVector<f64>, e: &DVector<f64>, d: &DMatrix<f64>, d_inv: &DMatrix<f64>) -> DVector<f64> {
    match kind {
        ConstraintKind::Hard => DVector::from_element(1, cone::project_positive(lambda[0] - (jv[0] + e[0]) / d[(0, 0)])),
        ConstraintKind::Soft { k, b } => {
            DVector::from_element(1, (-k * e[0] - b * jv[0] + b * d[(0, 0)] * lambda[0]) / (1.0 + b * d[(0, 0)]))
        }
        ConstraintKind::Contact { mu } => {
            let star = lambda - d_inv * (jv + e);
            let p = cone::project_cone_strict(ConeInput::new(Vector3::new(star[0], star[1], star[2]), mu));
            DVector::from_column_slice(p.as_slice())
        }
    }
}

pub fn solve_pgs(
    problem: &ContactProblem,
    warm: Option<&SolverState>,
    cfg: &PgsConfig,
    control: &SolveControl,
) -> Result<(SolverState, ResidualReport)> {
    let mut clock = Clock::start();
    let del = Delassus::new(problem)?;
    let mono_b: Vec<DVector<f64>> = problem.free_velocity();
    let mut vhat = DVector::zeros(problem.total_dofs());
    let mut off = 0;
    for v in &mono_b {
        vhat.rows_mut(off, v.len()).copy_from(v);
        off += v.len();
    }
    let mut lambda: Vec<DVector<f64>> = match warm {
        Some(w) => w.lambda.clone(),
        None => problem.constraints.iter().map(|c| DVector::zeros(c.rows())).collect(),
    };
    for (i, l) in lambda.iter().enumerate() {
        vhat.gemv(1.0, &del.w[i], l, 1.0);
    }
    let mut report = ResidualReport::default();
    let mut sweeps = 0;
    let mut converged = false;
    let mut change = f64::INFINITY;
    let max_sweeps = cfg.max_sweeps.min(control.max_iter.max(1));
    while sweeps < max_sweeps {
        sweeps += 1;
        change = 0.0;
        for (i, c) in problem.constraints.iter().enumerate() {
            let jv = &del.j[i] * &vhat;
            let next = local_update(c.kind, &lambda[i], &jv, &del.e[i], &del.d[i], &del.d_inv[i]);
            let delta = &next - &lambda[i];
            change = f64::max(change, delta.amax());
            vhat.gemv(1.0, &del.w[i], &delta, 1.0);
            lambda[i] = next;
        }
        if !vhat.iter().all(|x| x.is_finite()) {
            return Err(Error::SolverAbort(format!("non-finite velocity after PGS sweep {sweeps}")));
        }
        clock.sample(control, problem, &lambda, sweeps, (change, 0.0), 0.0, &mut report.trace);
        if change < cfg.tol {
            converged = true;
            break;
        }
        if clock.over(control.budget) {
            break;
        }
    }
    let mut parts = Vec::with_capacity(problem.subsystems.len());
    let mut off = 0;
    for s in &problem.subsystems {
        parts.push(vhat.rows(off, s.ndof()).into_owned());
        off += s.ndof();
    }
    let z = problem.constraints.iter().map(|c| c.velocity(&parts)).collect();
    let u = lambda.iter().map(|l| -l).collect();
    let state = SolverState { vhat: parts, lambda, z, u, beta: 0.0, iterations: sweeps, inner_iterations: 0, converged };
    report.theta_p = change;
    report.iterations = sweeps;
    report.wall_time = clock.elapsed().as_secs_f64();
    report.converged = converged;
    Ok((state, report))
}
