//! Subsystem-split ADMM.
//!
//! Each constraint `i` keeps one slack `z_ij` per block and a single
//! impulse `λ_i`; the multiplier of every block is `u_ij = -λ_i`, so it is
//! never stored. One iteration is three barrier-separated phases:
//! velocities per subsystem, slacks and impulses per constraint, residuals.

use nalgebra::{DVector, Vector3};
use rayon::prelude::*;

use super::{Clock, ResidualReport, SolveControl, SolverState};
use crate::assembly::{Attachment, ConstraintKind, ConstraintSpec, ContactProblem};
use crate::cone::{self, ConeInput};
use crate::crba::SubsystemFactor;
use crate::error::{Error, Result};

pub const BETA_MIN: f64 = 1e-6;
pub const BETA_MAX: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaInit {
    /// Geometric mean of body mass over contact count.
    PseudoDensity,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubAdmmConfig {
    pub gamma: f64,
    pub tol: f64,
    pub l_max: usize,
    pub beta_init: BetaInit,
    /// Iterations between penalty adjustments.
    pub adapt_every: usize,
}

impl Default for SubAdmmConfig {
    fn default() -> Self {
        Self { gamma: 10.0, tol: 1e-6, l_max: 200, beta_init: BetaInit::PseudoDensity, adapt_every: 10 }
    }
}

impl SubAdmmConfig {
    pub fn validate(&self) -> Result<()> {
        let fixed_ok = match self.beta_init {
            BetaInit::Fixed(b) => b > 0.0 && b.is_finite(),
            BetaInit::PseudoDensity => true,
        };
        if self.gamma > 1.0 && self.tol > 0.0 && self.l_max >= 1 && self.adapt_every >= 1 && fixed_ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid SubADMM configuration {self:?}")))
        }
    }
}

/// Geometric mean over contacted bodies of `mass / contact count`; the mean
/// dynamic body mass when nothing is in contact.
pub fn init_beta(problem: &ContactProblem) -> f64 {
    let mut counts: Vec<((usize, usize), usize)> = Vec::new();
    for c in problem.constraints.iter().filter(|c| matches!(c.kind, ConstraintKind::Contact { .. })) {
        for blk in &c.blocks {
            if let Attachment::Point { body, .. } = blk.attachment {
                let key = (blk.subsystem, body);
                match counts.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, n)) => *n += 1,
                    None => counts.push((key, 1)),
                }
            }
        }
    }
    if counts.is_empty() {
        let masses: Vec<f64> = problem
            .subsystems
            .iter()
            .filter(|s| s.ndof() > 0)
            .flat_map(|s| s.kin.inertia.iter().map(|i| i.mass))
            .collect();
        return if masses.is_empty() { 1.0 } else { masses.iter().sum::<f64>() / masses.len() as f64 };
    }
    let log_sum: f64 = counts
        .iter()
        .map(|((j, b), n)| (problem.subsystems[*j].kin.inertia[*b].mass / *n as f64).ln())
        .sum();
    (log_sum / counts.len() as f64).exp()
}

/// Residual-balancing penalty update. Returns the new penalty and whether
/// it changed.
pub fn adapt_beta(beta: f64, theta_p: f64, theta_d: f64, gamma: f64) -> (f64, bool) {
    let next = if theta_d == 0.0 {
        if theta_p > 0.0 {
            beta * 10.0
        } else {
            beta
        }
    } else if theta_p > gamma * theta_d || theta_d > gamma * theta_p {
        beta * (theta_p / theta_d).sqrt()
    } else {
        beta
    };
    let next = next.clamp(BETA_MIN, BETA_MAX);
    (next, next != beta)
}

/// Impulse and per-block slacks of one constraint from `y_ij = βJ_ij v̂_j + u_ij`.
pub fn slack_update(c: &ConstraintSpec, y: &[DVector<f64>], beta: f64) -> (DVector<f64>, Vec<DVector<f64>>) {
    let card = y.len() as f64;
    let mut sum = DVector::zeros(c.rows());
    for yi in y {
        sum += yi;
    }
    let lambda = match c.kind {
        ConstraintKind::Hard => DVector::from_element(1, cone::project_positive(-(sum[0] + beta * c.e[0]) / card)),
        ConstraintKind::Soft { k, b } => DVector::from_element(1, -(b * sum[0] + beta * k * c.e[0]) / (b * card + beta)),
        ConstraintKind::Contact { mu } => {
            let star = -(sum + &c.e * beta) / card;
            let p = cone::project_cone_strict(ConeInput::new(Vector3::new(star[0], star[1], star[2]), mu));
            DVector::from_column_slice(p.as_slice())
        }
    };
    let z = y.iter().map(|yi| (yi + &lambda) / beta).collect();
    (lambda, z)
}

fn map_maybe_par<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, parallel: bool, f: F) -> Vec<T> {
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Factorized per-subsystem data for a fixed penalty.
pub struct SubAdmm<'a> {
    problem: &'a ContactProblem,
    /// `(constraint, block)` pairs touching each subsystem.
    by_sub: Vec<Vec<(usize, usize)>>,
    factors: Vec<Option<SubsystemFactor>>,
    beta: f64,
}

impl<'a> SubAdmm<'a> {
    pub fn new(problem: &'a ContactProblem, beta: f64, parallel: bool) -> Result<Self> {
        let mut by_sub = vec![Vec::new(); problem.subsystems.len()];
        for (i, c) in problem.constraints.iter().enumerate() {
            for (k, blk) in c.blocks.iter().enumerate() {
                by_sub[blk.subsystem].push((i, k));
            }
        }
        let mut s = Self { problem, by_sub, factors: Vec::new(), beta };
        s.refactor(beta, parallel)?;
        Ok(s)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Rebuilds every subsystem factorization for penalty `beta`.
    pub fn refactor(&mut self, beta: f64, parallel: bool) -> Result<()> {
        let problem = self.problem;
        let factors = map_maybe_par(problem.subsystems.len(), parallel, |j| {
            if problem.subsystems[j].ndof() == 0 {
                Ok(None)
            } else {
                problem.factor_penalized(j, beta).map(Some)
            }
        });
        self.factors = factors.into_iter().collect::<Result<_>>()?;
        self.beta = beta;
        Ok(())
    }

    /// `v̂_j = (A_j + βΣJ_ijᵀJ_ij)⁻¹(b_j + Σ J_ijᵀ(βz_ij − u_ij))` with `u_ij = -λ_i`.
    pub fn update_vhat(&self, z: &[Vec<DVector<f64>>], lambda: &[DVector<f64>], beta: f64, parallel: bool) -> Result<Vec<DVector<f64>>> {
        if beta != self.beta {
            return Err(Error::StaleFactorization { built: self.beta, requested: beta });
        }
        let problem = self.problem;
        Ok(map_maybe_par(problem.subsystems.len(), parallel, |j| {
            let sub = &problem.subsystems[j];
            let Some(f) = &self.factors[j] else { return DVector::zeros(0) };
            let mut rhs = sub.b.clone();
            for &(i, k) in &self.by_sub[j] {
                let blk = &problem.constraints[i].blocks[k];
                rhs.gemv_tr(1.0, &blk.jac, &(&z[i][k] * beta + &lambda[i]), 1.0);
            }
            f.tree.solve_in_place(&mut rhs);
            rhs
        }))
    }

    /// New impulses and slacks for every constraint.
    pub fn update_slack(
        &self,
        vhat: &[DVector<f64>],
        lambda: &[DVector<f64>],
        beta: f64,
        parallel: bool,
    ) -> (Vec<DVector<f64>>, Vec<Vec<DVector<f64>>>) {
        let problem = self.problem;
        map_maybe_par(problem.constraints.len(), parallel, |i| {
            let c = &problem.constraints[i];
            let y: Vec<DVector<f64>> = c.blocks.iter().map(|blk| &blk.jac * &vhat[blk.subsystem] * beta - &lambda[i]).collect();
            slack_update(c, &y, beta)
        })
        .into_iter()
        .unzip()
    }

    /// `θ_p = max ‖J_ij v̂_j − z_ij‖`, `θ_d = max_j ‖A_j v̂_j − b_j − Σ J_ijᵀλ_i‖`.
    pub fn residuals(&self, vhat: &[DVector<f64>], z: &[Vec<DVector<f64>>], lambda: &[DVector<f64>], parallel: bool) -> (f64, f64) {
        let problem = self.problem;
        let primal = map_maybe_par(problem.constraints.len(), parallel, |i| {
            problem.constraints[i]
                .blocks
                .iter()
                .zip(&z[i])
                .map(|(blk, zk)| (&blk.jac * &vhat[blk.subsystem] - zk).norm())
                .fold(0.0, f64::max)
        });
        let dual = map_maybe_par(problem.subsystems.len(), parallel, |j| {
            let sub = &problem.subsystems[j];
            if sub.ndof() == 0 {
                return 0.0;
            }
            let mut r = &sub.a * &vhat[j] - &sub.b;
            for &(i, k) in &self.by_sub[j] {
                r.gemv_tr(-1.0, &problem.constraints[i].blocks[k].jac, &lambda[i], 1.0);
            }
            r.norm()
        });
        (primal.into_iter().fold(0.0, f64::max), dual.into_iter().fold(0.0, f64::max))
    }
}

pub fn solve_subadmm(
    problem: &ContactProblem,
    warm: Option<&SolverState>,
    cfg: &SubAdmmConfig,
    control: &SolveControl,
) -> Result<(SolverState, ResidualReport)> {
    cfg.validate()?;
    let mut clock = Clock::start();
    let parallel = control.parallel;
    let mut beta = match cfg.beta_init {
        BetaInit::PseudoDensity => init_beta(problem),
        BetaInit::Fixed(b) => b,
    };
    let mut lambda: Vec<DVector<f64>> = match warm {
        Some(w) => w.lambda.clone(),
        None => problem.constraints.iter().map(|c| DVector::zeros(c.rows())).collect(),
    };
    let start_v = problem.velocity_from_impulse(&lambda);
    let mut z: Vec<Vec<DVector<f64>>> = problem
        .constraints
        .iter()
        .map(|c| c.blocks.iter().map(|blk| &blk.jac * &start_v[blk.subsystem]).collect())
        .collect();
    let mut admm = SubAdmm::new(problem, beta, parallel)?;
    let mut vhat = start_v;
    let mut report = ResidualReport::default();
    let (mut theta_p, mut theta_d) = (f64::INFINITY, f64::INFINITY);
    let mut iterations = 0;
    let mut converged = false;
    let l_max = cfg.l_max.min(control.max_iter.max(1));
    while iterations < l_max {
        iterations += 1;
        vhat = admm.update_vhat(&z, &lambda, beta, parallel)?;
        let (l_new, z_new) = admm.update_slack(&vhat, &lambda, beta, parallel);
        lambda = l_new;
        z = z_new;
        (theta_p, theta_d) = admm.residuals(&vhat, &z, &lambda, parallel);
        if !(theta_p.is_finite() && theta_d.is_finite()) {
            return Err(Error::SolverAbort(format!("non-finite ADMM residual at iteration {iterations} (β = {beta:e})")));
        }
        clock.sample(control, problem, &lambda, iterations, (theta_p, theta_d), beta, &mut report.trace);
        if theta_p + theta_d < cfg.tol {
            converged = true;
            break;
        }
        if clock.over(control.budget) {
            break;
        }
        if iterations % cfg.adapt_every == 0 {
            let (next, changed) = adapt_beta(beta, theta_p, theta_d, cfg.gamma);
            if changed {
                beta = next;
                admm.refactor(beta, parallel)?;
            }
        }
    }
    let z_sum: Vec<DVector<f64>> = z
        .iter()
        .zip(&problem.constraints)
        .map(|(zs, c)| zs.iter().fold(DVector::zeros(c.rows()), |acc, x| acc + x))
        .collect();
    let u = lambda.iter().map(|l| -l).collect();
    let state = SolverState { vhat, lambda, z: z_sum, u, beta, iterations, inner_iterations: 0, converged };
    report.theta_p = theta_p;
    report.theta_d = theta_d;
    report.iterations = iterations;
    report.wall_time = clock.elapsed().as_secs_f64();
    report.converged = converged;
    Ok((state, report))
}
