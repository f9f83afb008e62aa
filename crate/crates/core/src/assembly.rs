//! Per-step problem assembly: compressed dynamics `(A_j, b_j)` per subsystem
//! and constraint rows split into per-subsystem, per-body Jacobian blocks.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix3, Matrix6, Vector3, Vector6};

use crate::cone;
use crate::crba::{self, SubsystemFactor};
use crate::error::{Error, Result};
use crate::multibody::{Subsystem, TreeKinematics};
use crate::spatial::{point_map, SpatialInertia};

/// Error-term shaping for contact normals and hard limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stabilization {
    /// Fraction of the penetration corrected per step.
    pub alpha: f64,
    /// Penetration tolerated without correction (m).
    pub slop: f64,
}

impl Default for Stabilization {
    fn default() -> Self {
        Self { alpha: 0.2, slop: 1e-3 }
    }
}

impl Stabilization {
    /// Velocity-level error for a gap `g`. Open gaps allow approach up to
    /// contact within the step; penetration beyond the slop is pushed out at
    /// rate `alpha / dt`.
    pub fn error(&self, gap: f64, dt: f64) -> f64 {
        if gap > 0.0 {
            gap / dt
        } else {
            self.alpha / dt * (gap + self.slop).min(0.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConstraintKind {
    /// `0 ≤ λ ⊥ Jv̂ + e ≥ 0`, one row.
    Hard,
    /// `λ = -k e - b Jv̂`, one row; `k` and `b` are per-step impulse gains.
    Soft { k: f64, b: f64 },
    /// Frictional contact, rows `(t1, t2, n)`.
    Contact { mu: f64 },
}

impl ConstraintKind {
    pub fn rows(&self) -> usize {
        match self {
            ConstraintKind::Contact { .. } => 3,
            _ => 1,
        }
    }

    /// Strict / closed-form operator `T(x)` acting on the unpenalized
    /// candidate `x = λ − (Jv̂ + e)` (unit penalty).
    pub fn unit_operator(&self, lambda: &DVector<f64>, w: &DVector<f64>, e: &DVector<f64>) -> DVector<f64> {
        match *self {
            ConstraintKind::Hard => DVector::from_element(1, cone::project_positive(lambda[0] - w[0] - e[0])),
            ConstraintKind::Soft { k, b } => {
                DVector::from_element(1, cone::closed_form_soft(w[0], -lambda[0], e[0], k, b, 1.0))
            }
            ConstraintKind::Contact { mu } => {
                let star = Vector3::new(lambda[0] - w[0] - e[0], lambda[1] - w[1] - e[1], lambda[2] - w[2] - e[2]);
                let out = cone::project_cone_strict(cone::ConeInput::new(star, mu));
                DVector::from_column_slice(out.as_slice())
            }
        }
    }
}

/// How a block's rows attach to its subsystem, used to fold `β JᵀJ` into
/// per-body effective matrices.
#[derive(Clone, Debug, PartialEq)]
pub enum Attachment {
    /// Three rows `Rᵀ[-[p] I]` on one body; `β JᵀJ` is a point mass at `p`.
    Point { body: usize, point: Vector3<f64> },
    /// Rows `map · twist` of one body (`map` is rows × 6).
    Body { body: usize, map: DMatrix<f64> },
    /// Rows acting on single joint velocities.
    Joint,
}

#[derive(Clone, Debug)]
pub struct Block {
    pub subsystem: usize,
    /// rows × n_j.
    pub jac: DMatrix<f64>,
    pub attachment: Attachment,
}

/// Identifies a contact across steps for warm starting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactKey {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub point: Vector3<f64>,
}

#[derive(Clone, Debug)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    pub e: DVector<f64>,
    pub blocks: Vec<Block>,
    pub key: Option<ContactKey>,
}

impl ConstraintSpec {
    pub fn rows(&self) -> usize {
        self.kind.rows()
    }

    /// Number of slack blocks `|Z_i|`.
    pub fn cardinality(&self) -> usize {
        self.blocks.len()
    }

    /// `Σ_j J_ij v̂_j`.
    pub fn velocity(&self, vhat: &[DVector<f64>]) -> DVector<f64> {
        let mut w = DVector::zeros(self.rows());
        for blk in &self.blocks {
            w.gemv(1.0, &blk.jac, &vhat[blk.subsystem], 1.0);
        }
        w
    }

    pub fn mu(&self) -> Option<f64> {
        match self.kind {
            ConstraintKind::Contact { mu } => Some(mu),
            _ => None,
        }
    }
}

/// Compressed dynamics of one subsystem.
#[derive(Clone, Debug)]
pub struct SubsystemProblem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub kin: TreeKinematics,
    /// Spatial inertia of each body scaled like `A_j`.
    pub body_inertia: Vec<SpatialInertia>,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl SubsystemProblem {
    pub fn ndof(&self) -> usize {
        self.b.len()
    }

    /// `A_j⁻¹ rhs`.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match &self.chol {
            Some(c) => c.solve(rhs),
            None => DVector::zeros(0),
        }
    }

    pub fn cholesky(&self) -> Option<&Cholesky<f64, Dyn>> {
        self.chol.as_ref()
    }
}

/// `A_j = M/(1−θ)` and `b_j = A_j v_k + f(q, v_k) dt`.
pub fn compress_dynamics(
    sub: &Subsystem,
    kin: &TreeKinematics,
    gravity: &Vector3<f64>,
    wrenches: &[Vector6<f64>],
    dt: f64,
    theta: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_integration(dt, theta)?;
    let scale = 1.0 / (1.0 - theta);
    let h: Vec<Matrix6<f64>> = kin.inertia.iter().map(|i| i.to_matrix()).collect();
    let a = crba::composite_assemble(kin, &h) * scale;
    let f = kin.generalized_force(&sub.v, gravity, wrenches);
    let b = &a * &sub.v + f * dt;
    Ok((a, b))
}

pub fn check_integration(dt: f64, theta: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta must lie in [0, 1), got {theta}")));
    }
    Ok(())
}

/// Everything a solver needs for one step.
#[derive(Clone, Debug)]
pub struct ContactProblem {
    pub subsystems: Vec<SubsystemProblem>,
    pub constraints: Vec<ConstraintSpec>,
    pub dt: f64,
    pub theta: f64,
}

/// Dense unsplit view of a problem.
#[derive(Clone, Debug)]
pub struct Monolithic {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub j: DMatrix<f64>,
    pub e: DVector<f64>,
    pub dof_offsets: Vec<usize>,
    pub row_offsets: Vec<usize>,
}

impl Monolithic {
    pub fn rows_of(&self, i: usize) -> std::ops::Range<usize> {
        self.row_offsets[i]..self.row_offsets[i + 1]
    }

    pub fn dofs_of(&self, j: usize) -> std::ops::Range<usize> {
        self.dof_offsets[j]..self.dof_offsets[j + 1]
    }
}

impl ContactProblem {
    /// Builds the per-subsystem dynamics. Constraints are added afterwards.
    pub fn new(subsystems: Vec<SubsystemProblem>, dt: f64, theta: f64) -> Result<Self> {
        check_integration(dt, theta)?;
        Ok(Self { subsystems, constraints: Vec::new(), dt, theta })
    }

    pub fn push(&mut self, c: ConstraintSpec) -> Result<()> {
        if c.blocks.is_empty() {
            return Err(Error::InvalidModel("constraint without blocks".into()));
        }
        if c.e.len() != c.rows() {
            return Err(Error::InvalidModel(format!("constraint error has {} rows, expected {}", c.e.len(), c.rows())));
        }
        for blk in &c.blocks {
            let sub = self.subsystems.get(blk.subsystem).ok_or(Error::UnknownSubsystem(blk.subsystem))?;
            if blk.jac.nrows() != c.rows() || blk.jac.ncols() != sub.ndof() {
                return Err(Error::InvalidModel(format!(
                    "block on subsystem {} is {}×{}, expected {}×{}",
                    blk.subsystem,
                    blk.jac.nrows(),
                    blk.jac.ncols(),
                    c.rows(),
                    sub.ndof()
                )));
            }
        }
        self.constraints.push(c);
        Ok(())
    }

    pub fn total_dofs(&self) -> usize {
        self.subsystems.iter().map(|s| s.ndof()).sum()
    }

    pub fn total_rows(&self) -> usize {
        self.constraints.iter().map(|c| c.rows()).sum()
    }

    pub fn contact_count(&self) -> usize {
        self.constraints.iter().filter(|c| matches!(c.kind, ConstraintKind::Contact { .. })).count()
    }

    /// Unconstrained `v̂_j = A_j⁻¹ b_j`.
    pub fn free_velocity(&self) -> Vec<DVector<f64>> {
        self.subsystems.iter().map(|s| s.solve(&s.b)).collect()
    }

    /// `v̂_j = A_j⁻¹(b_j + Σ_i J_ijᵀ λ_i)`.
    pub fn velocity_from_impulse(&self, lambda: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let mut rhs: Vec<DVector<f64>> = self.subsystems.iter().map(|s| s.b.clone()).collect();
        for (c, l) in self.constraints.iter().zip(lambda) {
            for blk in &c.blocks {
                rhs[blk.subsystem].gemv_tr(1.0, &blk.jac, l, 1.0);
            }
        }
        self.subsystems.iter().zip(&rhs).map(|(s, r)| s.solve(r)).collect()
    }

    /// Block-diagonal `A`, stacked `b`, and `J` with blocks of the same
    /// subsystem summed back into the original rows.
    pub fn monolithic_view(&self) -> Monolithic {
        let mut dof_offsets = vec![0];
        for s in &self.subsystems {
            dof_offsets.push(dof_offsets.last().unwrap() + s.ndof());
        }
        let mut row_offsets = vec![0];
        for c in &self.constraints {
            row_offsets.push(row_offsets.last().unwrap() + c.rows());
        }
        let (n, m) = (*dof_offsets.last().unwrap(), *row_offsets.last().unwrap());
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for (k, s) in self.subsystems.iter().enumerate() {
            let o = dof_offsets[k];
            a.view_mut((o, o), (s.ndof(), s.ndof())).copy_from(&s.a);
            b.rows_mut(o, s.ndof()).copy_from(&s.b);
        }
        let mut j = DMatrix::zeros(m, n);
        let mut e = DVector::zeros(m);
        for (i, c) in self.constraints.iter().enumerate() {
            let r = row_offsets[i];
            e.rows_mut(r, c.rows()).copy_from(&c.e);
            for blk in &c.blocks {
                let o = dof_offsets[blk.subsystem];
                let mut view = j.view_mut((r, o), (c.rows(), blk.jac.ncols()));
                view += &blk.jac;
            }
        }
        Monolithic { a, b, j, e, dof_offsets, row_offsets }
    }

    /// Factorization of `A_j + β Σ_i J_ijᵀ J_ij` through per-body effective
    /// matrices. Every block must carry an attachment describing its rows.
    pub fn factor_penalized(&self, j: usize, beta: f64) -> Result<SubsystemFactor> {
        let sub = &self.subsystems[j];
        let mut inertia = sub.body_inertia.clone();
        let mut extra: Vec<Matrix6<f64>> = vec![Matrix6::zeros(); inertia.len()];
        let mut diag = DVector::zeros(sub.ndof());
        let mut contacts: Vec<Vec<(Matrix3<f64>, Vector3<f64>)>> = vec![Vec::new(); inertia.len()];
        for c in &self.constraints {
            for blk in c.blocks.iter().filter(|b| b.subsystem == j) {
                match &blk.attachment {
                    Attachment::Point { body, point } => contacts[*body].push((Matrix3::identity(), *point)),
                    Attachment::Body { body, map } => {
                        let mtm = map.transpose() * map * beta;
                        extra[*body] += Matrix6::from_iterator(mtm.iter().copied());
                    }
                    Attachment::Joint => {
                        for r in 0..blk.jac.nrows() {
                            for d in 0..blk.jac.ncols() {
                                diag[d] += beta * blk.jac[(r, d)] * blk.jac[(r, d)];
                            }
                        }
                    }
                }
            }
        }
        for (b, h) in inertia.iter_mut().enumerate() {
            *h = crba::effective_body_matrix(h, &contacts[b], beta);
        }
        let body_h: Vec<Matrix6<f64>> = inertia.iter().zip(&extra).map(|(h, x)| h.to_matrix() + x).collect();
        crba::factor_subsystem_matrix(&sub.kin, &body_h, Some(&diag), beta)
    }

    /// Dense `A_j + β Σ J_ijᵀ J_ij`, for checking.
    pub fn penalized_dense(&self, j: usize, beta: f64) -> DMatrix<f64> {
        let mut m = self.subsystems[j].a.clone();
        for c in &self.constraints {
            for blk in c.blocks.iter().filter(|b| b.subsystem == j) {
                m += blk.jac.transpose() * &blk.jac * beta;
            }
        }
        m
    }
}

/// Assembles the dynamics of one subsystem at its current state.
pub fn subsystem_problem(
    sub: &Subsystem,
    gravity: &Vector3<f64>,
    wrenches: &[Vector6<f64>],
    dt: f64,
    theta: f64,
) -> Result<SubsystemProblem> {
    let kin = sub.kinematics();
    let (a, b) = compress_dynamics(sub, &kin, gravity, wrenches, dt, theta)?;
    let chol = if a.nrows() > 0 {
        Some(Cholesky::new(a.clone()).ok_or_else(|| Error::SolverAbort(format!("{}: mass matrix is not SPD", sub.name)))?)
    } else {
        None
    };
    let scale = 1.0 / (1.0 - theta);
    let body_inertia = kin.inertia.iter().map(|i| i.scaled(scale)).collect();
    Ok(SubsystemProblem { a, b, kin, body_inertia, chol })
}

/// One side of a constraint: `(subsystem, body)` or `None` for the ground.
pub type Side = Option<(usize, usize)>;

/// Contact-frame rows for a point `p` on one body: `sign · Rᵀ[-[p] I] J_o`.
pub fn point_block(kin: &TreeKinematics, subsystem: usize, body: usize, frame: &Matrix3<f64>, p: &Vector3<f64>, sign: f64) -> Block {
    let map = frame.transpose() * point_map(p) * sign;
    let map = DMatrix::from_iterator(3, 6, map.iter().copied());
    Block { subsystem, jac: &map * kin.origin_jacobian(body), attachment: Attachment::Point { body, point: *p } }
}

/// General rows `sign · rows · [-[p] I] J_o` for directions `rows` (k × 3).
pub fn direction_block(kin: &TreeKinematics, subsystem: usize, body: usize, rows: &DMatrix<f64>, p: &Vector3<f64>, sign: f64) -> Block {
    let pm = point_map(p);
    let pm = DMatrix::from_iterator(3, 6, pm.iter().copied());
    let map = rows * pm * sign;
    Block { subsystem, jac: &map * kin.origin_jacobian(body), attachment: Attachment::Body { body, map } }
}

/// Contact constraint between two sides with the normal pointing from B to A.
#[allow(clippy::too_many_arguments)]
pub fn contact_constraint(
    subs: &[SubsystemProblem],
    a: Side,
    b: Side,
    frame: &Matrix3<f64>,
    point: &Vector3<f64>,
    gap: f64,
    mu: f64,
    dt: f64,
    stab: &Stabilization,
) -> Option<ConstraintSpec> {
    let mut blocks = Vec::with_capacity(2);
    for (side, sign) in [(a, 1.0), (b, -1.0)] {
        if let Some((j, body)) = side {
            if subs[j].ndof() > 0 {
                blocks.push(point_block(&subs[j].kin, j, body, frame, point, sign));
            }
        }
    }
    if blocks.is_empty() {
        return None;
    }
    let e = DVector::from_vec(vec![0.0, 0.0, stab.error(gap, dt)]);
    let key = ContactKey { a: a.unwrap_or((usize::MAX, 0)), b: b.unwrap_or((usize::MAX, 0)), point: *point };
    Some(ConstraintSpec { kind: ConstraintKind::Contact { mu }, e, blocks, key: Some(key) })
}
