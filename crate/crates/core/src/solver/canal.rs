//! Cascaded Newton augmented Lagrangian.
//!
//! Outer loop: friction perturbation `ẽ = e + (0, 0, μ‖z_t‖)`, multiplier
//! and penalty updates. Inner loop: Newton on the strongly convex surrogate
//! `h(v̂) = ½v̂ᵀAv̂ − bᵀv̂ + Σ ψ_i(J_i v̂)` whose gradient is the residual
//! `r = Av̂ − b − Σ J_iᵀ λ_i(J_i v̂)`, with an exact line search.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Vector3};

use super::{Clock, ResidualReport, SolveControl, SolverState};
use crate::assembly::{ConstraintKind, ContactProblem};
use crate::cone::{self, ConeInput};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanalConfig {
    pub beta0: f64,
    pub beta_max: f64,
    pub kappa: f64,
    pub zeta: f64,
    pub newton_tol: f64,
    pub al_tol: f64,
    pub max_al_iters: usize,
    pub max_newton_iters: usize,
}

impl Default for CanalConfig {
    fn default() -> Self {
        Self {
            beta0: 1e4,
            beta_max: 1e8,
            kappa: 10.0,
            zeta: 0.5,
            newton_tol: 1e-10,
            al_tol: 1e-10,
            max_al_iters: 30,
            max_newton_iters: 50,
        }
    }
}

impl CanalConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.beta0 > 0.0
            && self.beta_max >= self.beta0
            && self.kappa > 1.0
            && self.zeta > 0.0
            && self.zeta < 1.0
            && self.newton_tol > 0.0
            && self.al_tol > 0.0
            && self.max_al_iters > 0
            && self.max_newton_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid CANAL configuration {self:?}")))
        }
    }
}

/// One constraint in unsplit form: blocks of the same subsystem summed.
#[derive(Clone, Debug)]
struct Row {
    kind: ConstraintKind,
    e: DVector<f64>,
    /// `(dof offset, rows × n_j)` per distinct subsystem.
    parts: Vec<(usize, DMatrix<f64>)>,
}

impl Row {
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut w = DVector::zeros(self.e.len());
        for (o, jac) in &self.parts {
            w.gemv(1.0, jac, &x.rows(*o, jac.ncols()), 1.0);
        }
        w
    }

    fn apply_transpose_add(&self, l: &DVector<f64>, scale: f64, out: &mut DVector<f64>) {
        for (o, jac) in &self.parts {
            let mut seg = out.rows_mut(*o, jac.ncols());
            seg.gemv_tr(scale, jac, l, 1.0);
        }
    }
}

/// Impulse `λ(w)` for candidate constraint velocity `w`.
fn impulse(kind: ConstraintKind, w: &DVector<f64>, u: &DVector<f64>, et: &DVector<f64>, beta: f64) -> DVector<f64> {
    match kind {
        ConstraintKind::Hard => DVector::from_element(1, cone::closed_form_hard(w[0], u[0], et[0], beta)),
        ConstraintKind::Soft { k, b } => DVector::from_element(1, cone::closed_form_soft(w[0], u[0], et[0], k, b, beta)),
        ConstraintKind::Contact { mu } => {
            let star = -(w * beta) - u - et * beta;
            let p = cone::project_cone_prox(ConeInput::new(Vector3::new(star[0], star[1], star[2]), mu));
            DVector::from_column_slice(p.as_slice())
        }
    }
}

/// `-dλ/dw`, with branch boundaries resolved toward stick / active.
fn curvature(kind: ConstraintKind, w: &DVector<f64>, u: &DVector<f64>, et: &DVector<f64>, beta: f64) -> DMatrix<f64> {
    match kind {
        ConstraintKind::Hard => {
            let star = -beta * w[0] - u[0] - beta * et[0];
            DMatrix::from_element(1, 1, if star >= 0.0 { beta } else { 0.0 })
        }
        ConstraintKind::Soft { b, .. } => DMatrix::from_element(1, 1, b * beta / (b + beta)),
        ConstraintKind::Contact { mu } => {
            let star = -(w * beta) - u - et * beta;
            let g = cone::prox_derivative_resolved(ConeInput::new(Vector3::new(star[0], star[1], star[2]), mu));
            DMatrix::from_iterator(3, 3, g.iter().map(|x| x * beta))
        }
    }
}

/// `ψ(w)` with `∇ψ = -λ(w)`.
fn penalty_energy(kind: ConstraintKind, lambda: &DVector<f64>, beta: f64) -> f64 {
    match kind {
        ConstraintKind::Soft { b, .. } => lambda.norm_squared() * (b + beta) / (2.0 * b * beta),
        _ => lambda.norm_squared() / (2.0 * beta),
    }
}

/// The unsplit problem as seen by CANAL.
#[derive(Clone, Debug)]
pub struct Canal {
    a: DMatrix<f64>,
    b: DVector<f64>,
    rows: Vec<Row>,
    dof_offsets: Vec<usize>,
}

/// Solution of the exact line search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearch {
    pub alpha: f64,
    pub evaluations: usize,
}

impl Canal {
    pub fn new(problem: &ContactProblem) -> Self {
        let mono = problem.monolithic_view();
        let rows = problem
            .constraints
            .iter()
            .map(|c| {
                let mut parts: Vec<(usize, DMatrix<f64>)> = Vec::new();
                for blk in &c.blocks {
                    let o = mono.dof_offsets[blk.subsystem];
                    match parts.iter_mut().find(|(po, _)| *po == o) {
                        Some((_, m)) => *m += &blk.jac,
                        None => parts.push((o, blk.jac.clone())),
                    }
                }
                Row { kind: c.kind, e: c.e.clone(), parts }
            })
            .collect();
        Self { a: mono.a, b: mono.b, rows, dof_offsets: mono.dof_offsets }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.rows.len()
    }

    pub fn constraint_velocity(&self, vhat: &DVector<f64>) -> Vec<DVector<f64>> {
        self.rows.iter().map(|r| r.apply(vhat)).collect()
    }

    pub fn split(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        self.dof_offsets.windows(2).map(|w| x.rows(w[0], w[1] - w[0]).into_owned()).collect()
    }

    pub fn join(&self, parts: &[DVector<f64>]) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        for (k, p) in parts.iter().enumerate() {
            x.rows_mut(self.dof_offsets[k], p.len()).copy_from(p);
        }
        x
    }

    /// `ẽ_i = e_i + (0, 0, μ_i‖z_{i,t}‖)` for contacts, `e_i` otherwise.
    pub fn perturbed_error(&self, z: &[DVector<f64>]) -> Vec<DVector<f64>> {
        self.rows
            .iter()
            .zip(z)
            .map(|(r, z)| {
                let mut et = r.e.clone();
                if let ConstraintKind::Contact { mu } = r.kind {
                    et[2] += mu * (z[0] * z[0] + z[1] * z[1]).sqrt();
                }
                et
            })
            .collect()
    }

    /// Impulses `λ_i(J_i v̂)` of the surrogate.
    pub fn impulses(&self, vhat: &DVector<f64>, u: &[DVector<f64>], et: &[DVector<f64>], beta: f64) -> Vec<DVector<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| impulse(r.kind, &r.apply(vhat), &u[i], &et[i], beta))
            .collect()
    }

    /// `r = Av̂ − b − Σ J_iᵀ λ_i`.
    pub fn residual(&self, vhat: &DVector<f64>, u: &[DVector<f64>], et: &[DVector<f64>], beta: f64) -> DVector<f64> {
        let mut r = &self.a * vhat - &self.b;
        for (i, row) in self.rows.iter().enumerate() {
            let l = impulse(row.kind, &row.apply(vhat), &u[i], &et[i], beta);
            row.apply_transpose_add(&l, -1.0, &mut r);
        }
        r
    }

    /// `A + Σ J_iᵀ (-dλ_i/dw) J_i`.
    pub fn hessian(&self, vhat: &DVector<f64>, u: &[DVector<f64>], et: &[DVector<f64>], beta: f64) -> DMatrix<f64> {
        let mut h = self.a.clone();
        for (i, row) in self.rows.iter().enumerate() {
            let g = curvature(row.kind, &row.apply(vhat), &u[i], &et[i], beta);
            if g.iter().all(|x| *x == 0.0) {
                continue;
            }
            for (oa, ja) in &row.parts {
                let gja = &g * ja;
                for (ob, jb) in &row.parts {
                    let blk = jb.transpose() * &gja;
                    let mut view = h.view_mut((*ob, *oa), (jb.ncols(), ja.ncols()));
                    view += blk;
                }
            }
        }
        h
    }

    pub fn objective(&self, vhat: &DVector<f64>, u: &[DVector<f64>], et: &[DVector<f64>], beta: f64) -> f64 {
        let mut h = 0.5 * vhat.dot(&(&self.a * vhat)) - self.b.dot(vhat);
        for (i, row) in self.rows.iter().enumerate() {
            let l = impulse(row.kind, &row.apply(vhat), &u[i], &et[i], beta);
            h += penalty_energy(row.kind, &l, beta);
        }
        h
    }

    /// Newton direction `d = -H⁻¹ r` and the factor used.
    pub fn newton_step(
        &self,
        vhat: &DVector<f64>,
        r: &DVector<f64>,
        u: &[DVector<f64>],
        et: &[DVector<f64>],
        beta: f64,
    ) -> Result<DVector<f64>> {
        let h = self.hessian(vhat, u, et, beta);
        let chol: Cholesky<f64, Dyn> = Cholesky::new(h).ok_or_else(|| Error::SolverAbort("Newton matrix is not positive definite".into()))?;
        Ok(-chol.solve(r))
    }

    /// Minimizes `φ(α) = h(v̂ + αd)` along a descent direction.
    pub fn line_search(
        &self,
        vhat: &DVector<f64>,
        d: &DVector<f64>,
        u: &[DVector<f64>],
        et: &[DVector<f64>],
        beta: f64,
    ) -> Result<LineSearch> {
        let ad = &self.a * d;
        let g0 = (&self.a * vhat - &self.b).dot(d);
        let dad = d.dot(&ad);
        let w: Vec<DVector<f64>> = self.rows.iter().map(|r| r.apply(vhat)).collect();
        let jd: Vec<DVector<f64>> = self.rows.iter().map(|r| r.apply(d)).collect();
        // Constraints the direction does not touch contribute nothing.
        let active: Vec<usize> = (0..self.rows.len()).filter(|&i| jd[i].iter().any(|x| *x != 0.0)).collect();
        let dphi = |alpha: f64| {
            let mut f = g0 + alpha * dad;
            let mut df = dad;
            for &i in &active {
                let row = &self.rows[i];
                let wa = &w[i] + &jd[i] * alpha;
                f -= impulse(row.kind, &wa, &u[i], &et[i], beta).dot(&jd[i]);
                df += jd[i].dot(&(curvature(row.kind, &wa, &u[i], &et[i], beta) * &jd[i]));
            }
            (f, df)
        };
        rtsafe(dphi)
    }
}

/// Root of `φ'` for a strictly convex `φ` with `φ'(0) < 0`: bracket by
/// doubling from `α = 1`, then Newton steps safeguarded by bisection.
pub fn rtsafe(dphi: impl Fn(f64) -> (f64, f64)) -> Result<LineSearch> {
    let (f0, _) = dphi(0.0);
    if !(f0 < 0.0) {
        return Err(Error::NotDescent(f0));
    }
    let tol = 1e-12 * f0.abs();
    let mut evaluations = 1;
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut f, mut df) = dphi(1.0);
    evaluations += 1;
    let mut alpha = 1.0;
    while f < 0.0 {
        if f.abs() <= tol {
            return Ok(LineSearch { alpha, evaluations });
        }
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(LineSearch { alpha: lo, evaluations });
        }
        (f, df) = dphi(hi);
        evaluations += 1;
        alpha = hi;
    }
    for _ in 0..200 {
        if f.abs() <= tol {
            break;
        }
        if f < 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        let newton = alpha - f / df;
        alpha = if df > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        (f, df) = dphi(alpha);
        evaluations += 1;
    }
    Ok(LineSearch { alpha, evaluations })
}

/// Runs the cascaded Newton augmented Lagrangian from `warm` (or from the
/// unconstrained velocity with zero impulses).
pub fn solve_canal(
    problem: &ContactProblem,
    warm: Option<&SolverState>,
    cfg: &CanalConfig,
    control: &SolveControl,
) -> Result<(SolverState, ResidualReport)> {
    cfg.validate()?;
    let mut clock = Clock::start();
    let canal = Canal::new(problem);
    let beta0 = cfg.beta0;
    let mut beta = beta0;
    let (mut vhat, mut u) = match warm {
        Some(w) => (canal.join(&w.vhat), w.u.clone()),
        None => (canal.join(&problem.free_velocity()), problem.constraints.iter().map(|c| DVector::zeros(c.rows())).collect()),
    };
    // z⁰ from the strict operator at the starting point.
    let w0 = canal.constraint_velocity(&vhat);
    let mut z: Vec<DVector<f64>> = canal
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let l0 = match row.kind {
                ConstraintKind::Contact { mu } => {
                    let star = -(&w0[i] * beta) - &u[i] - &row.e * beta;
                    let p = cone::project_cone_strict(ConeInput::new(Vector3::new(star[0], star[1], star[2]), mu));
                    DVector::from_column_slice(p.as_slice())
                }
                kind => impulse(kind, &w0[i], &u[i], &row.e, beta),
            };
            &w0[i] + (&u[i] + l0) / beta
        })
        .collect();
    let mut prev_primal: f64 = w0.iter().zip(&z).map(|(w, z)| (w - z).norm_squared()).sum::<f64>().sqrt();
    let mut lambda: Vec<DVector<f64>> = u.iter().map(|x| -x).collect();
    let mut report = ResidualReport::default();
    let (mut iterations, mut inner) = (0, 0);
    let mut converged = false;
    let (mut primal, mut rnorm) = (f64::INFINITY, f64::INFINITY);

    while iterations < cfg.max_al_iters.min(control.max_iter.max(1)) {
        iterations += 1;
        let et = canal.perturbed_error(&z);
        let mut r = canal.residual(&vhat, &u, &et, beta);
        rnorm = r.norm();
        for _ in 0..cfg.max_newton_iters {
            if rnorm < cfg.newton_tol {
                break;
            }
            let d = canal.newton_step(&vhat, &r, &u, &et, beta)?;
            let step = match canal.line_search(&vhat, &d, &u, &et, beta) {
                Ok(ls) => ls.alpha,
                // Direction lost descent to rounding: nothing left to gain.
                Err(Error::NotDescent(_)) => break,
                Err(e) => return Err(e),
            };
            inner += 1;
            vhat += &d * step;
            let next = canal.residual(&vhat, &u, &et, beta);
            let stalled = step * d.norm() <= 1e-15 * (1.0 + vhat.norm()) && next.norm() >= rnorm;
            r = next;
            rnorm = r.norm();
            if stalled {
                break;
            }
        }
        lambda = canal.impulses(&vhat, &u, &et, beta);
        let w = canal.constraint_velocity(&vhat);
        let mut primal_sq = 0.0;
        for i in 0..lambda.len() {
            let diff = (&u[i] + &lambda[i]) / beta;
            primal_sq += diff.norm_squared();
            z[i] = &w[i] + diff;
            u[i] = -&lambda[i];
        }
        primal = primal_sq.sqrt();
        // The friction shift moves with z; the fixed point needs it settled too.
        let shift = canal.perturbed_error(&z).iter().zip(&et).map(|(a, b)| (a - b).norm_squared()).sum::<f64>().sqrt();
        if !vhat.iter().all(|x| x.is_finite()) {
            return Err(Error::SolverAbort(format!("non-finite velocity at AL iteration {iterations}")));
        }
        clock.sample(control, problem, &lambda, iterations, (primal, rnorm), beta, &mut report.trace);
        if primal < cfg.al_tol && shift < cfg.al_tol {
            converged = true;
            break;
        }
        if clock.over(control.budget) {
            break;
        }
        if primal > cfg.zeta * prev_primal {
            beta = (cfg.kappa * beta).min(cfg.beta_max);
        }
        prev_primal = primal;
    }

    let state = SolverState {
        vhat: canal.split(&vhat),
        lambda,
        z,
        u,
        beta,
        iterations,
        inner_iterations: inner,
        converged,
    };
    report.theta_p = primal;
    report.theta_d = rnorm;
    report.iterations = iterations;
    report.inner_iterations = inner;
    report.wall_time = clock.elapsed().as_secs_f64();
    report.converged = converged;
    Ok((state, report))
}
