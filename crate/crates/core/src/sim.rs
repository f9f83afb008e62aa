//! Simulation world: collision, assembly, solve and integration per step.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Isometry3, Vector3, Vector6};

use crate::assembly::{
    self, contact_constraint, direction_block, Attachment, Block, ConstraintKind, ConstraintSpec, ContactKey, ContactProblem,
    Stabilization, SubsystemProblem,
};
use crate::collision::{self, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::metric::contact_residual_metric;
use crate::multibody::Subsystem;
use crate::solver::canal::{solve_canal, CanalConfig};
use crate::solver::pgs::{solve_pgs, PgsConfig};
use crate::solver::subadmm::{solve_subadmm, SubAdmmConfig};
use crate::solver::{ResidualReport, SolveControl, SolverState};
use crate::spatial;

/// Warm-start impulses are reused for contacts within this distance (m).
pub const WARM_MATCH_DISTANCE: f64 = 0.005;

#[derive(Clone, Debug, PartialEq)]
pub struct Material {
    pub name: String,
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpringEnd {
    /// Point in the body frame.
    Body { subsystem: usize, body: usize, point: Vector3<f64> },
    World(Vector3<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpringSpec {
    pub a: SpringEnd,
    pub b: SpringEnd,
    pub stiffness: f64,
    pub damping: f64,
    pub rest: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointLimit {
    pub subsystem: usize,
    pub body: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExternalForce {
    pub subsystem: usize,
    pub body: usize,
    /// `(torque about COM, force at COM)`.
    pub wrench: Vector6<f64>,
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Canal,
    SubAdmm,
    Pgs,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Canal, SolverKind::SubAdmm, SolverKind::Pgs];
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Canal => "canal",
            SolverKind::SubAdmm => "subadmm",
            SolverKind::Pgs => "pgs",
        })
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canal" => Ok(SolverKind::Canal),
            "subadmm" => Ok(SolverKind::SubAdmm),
            "pgs" => Ok(SolverKind::Pgs),
            other => Err(Error::InvalidParameter(format!("unknown solver '{other}'"))),
        }
    }
}

/// Solver choice with per-solver configuration.
#[derive(Clone, Debug)]
pub struct SolverSettings {
    pub kind: SolverKind,
    pub control: SolveControl,
    pub canal: CanalConfig,
    pub subadmm: SubAdmmConfig,
    pub pgs: PgsConfig,
    pub warm_start: bool,
}

impl SolverSettings {
    /// Default configurations with the iteration cap and tolerance applied to
    /// the chosen solver's outer loop.
    pub fn new(kind: SolverKind) -> Self {
        let canal = CanalConfig::default();
        let subadmm = SubAdmmConfig::default();
        let pgs = PgsConfig::default();
        let (max_iter, tol) = match kind {
            SolverKind::Canal => (canal.max_al_iters, canal.al_tol),
            SolverKind::SubAdmm => (subadmm.l_max, subadmm.tol),
            SolverKind::Pgs => (pgs.max_sweeps, pgs.tol),
        };
        Self { kind, control: SolveControl::new(max_iter, tol), canal, subadmm, pgs, warm_start: true }
    }

    pub fn with_limits(mut self, max_iter: usize, tol: f64) -> Self {
        self.control.max_iter = max_iter;
        self.control.tol = tol;
        match self.kind {
            SolverKind::Canal => {
                self.canal.max_al_iters = max_iter;
                self.canal.al_tol = tol;
            }
            SolverKind::SubAdmm => {
                self.subadmm.l_max = max_iter;
                self.subadmm.tol = tol;
            }
            SolverKind::Pgs => {
                self.pgs.max_sweeps = max_iter;
                self.pgs.tol = tol;
            }
        }
        self
    }
}

/// Runs the selected solver and fills in the contact-residual metric.
pub fn solve(problem: &ContactProblem, warm: Option<&SolverState>, settings: &SolverSettings) -> Result<(SolverState, ResidualReport)> {
    let (state, mut report) = match settings.kind {
        SolverKind::Canal => solve_canal(problem, warm, &settings.canal, &settings.control)?,
        SolverKind::SubAdmm => solve_subadmm(problem, warm, &settings.subadmm, &settings.control)?,
        SolverKind::Pgs => solve_pgs(problem, warm, &settings.pgs, &settings.control)?,
    };
    if !state.is_finite() {
        return Err(Error::SolverAbort(format!("{} produced non-finite iterates", settings.kind)));
    }
    report.metric = contact_residual_metric(problem, &state.lambda);
    Ok((state, report))
}

#[derive(Clone, Debug, Default)]
struct WarmCache {
    contacts: Vec<(ContactKey, DVector<f64>)>,
    others: Vec<DVector<f64>>,
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub report: ResidualReport,
    pub contacts: usize,
    pub energy: f64,
    /// Deepest penetration after the step (m, ≥ 0).
    pub penetration: f64,
}

#[derive(Clone, Debug)]
pub struct World {
    pub subsystems: Vec<Subsystem>,
    pub gravity: Vector3<f64>,
    pub dt: f64,
    pub theta: f64,
    pub margin: f64,
    pub stabilization: Stabilization,
    pub materials: Vec<Material>,
    /// Friction overrides for material pairs.
    pub pair_mu: Vec<(usize, usize, f64)>,
    pub springs: Vec<SpringSpec>,
    pub limits: Vec<JointLimit>,
    pub forces: Vec<ExternalForce>,
    pub wrench_amplitude: f64,
    /// Extra wrenches per subsystem and body, applied every step.
    pub extra_wrenches: Vec<Vec<Vector6<f64>>>,
    pub time: f64,
    pub step_index: usize,
    warm: WarmCache,
}

impl World {
    pub fn empty() -> Self {
        Self {
            subsystems: Vec::new(),
            gravity: Vector3::new(0.0, 0.0, -9.81),
            dt: 1.0 / 240.0,
            theta: 0.5,
            margin: DEFAULT_MARGIN,
            stabilization: Stabilization::default(),
            materials: vec![Material { name: "default".into(), mu: 0.5 }],
            pair_mu: Vec::new(),
            springs: Vec::new(),
            limits: Vec::new(),
            forces: Vec::new(),
            wrench_amplitude: 0.0,
            extra_wrenches: Vec::new(),
            time: 0.0,
            step_index: 0,
            warm: WarmCache::default(),
        }
    }

    pub fn friction(&self, a: usize, b: usize) -> f64 {
        for &(x, y, mu) in &self.pair_mu {
            if (x, y) == (a, b) || (x, y) == (b, a) {
                return mu;
            }
        }
        (self.materials[a].mu * self.materials[b].mu).sqrt()
    }

    /// Shape pairs that may touch: `((subsystem, body, shape), (..))`.
    fn candidate_pairs(&self) -> Vec<((usize, usize, usize), (usize, usize, usize))> {
        let mut all = Vec::new();
        for (j, s) in self.subsystems.iter().enumerate() {
            for (b, body) in s.bodies.iter().enumerate() {
                for k in 0..body.shapes.len() {
                    all.push((j, b, k));
                }
            }
        }
        let mut out = Vec::new();
        for (x, &p) in all.iter().enumerate() {
            for &q in &all[x + 1..] {
                let (sa, sb) = (&self.subsystems[p.0], &self.subsystems[q.0]);
                if sa.is_static() && sb.is_static() {
                    continue;
                }
                if p.0 == q.0 {
                    let related = p.1 == q.1 || sa.joints[q.1].parent == Some(p.1) || sa.joints[p.1].parent == Some(q.1);
                    if !sa.self_collision || related {
                        continue;
                    }
                }
                out.push((p, q));
            }
        }
        out
    }

    /// Rejects scenes containing shape pairs the narrow phase cannot handle.
    pub fn check_collision_pairs(&self) -> Result<()> {
        for (p, q) in self.candidate_pairs() {
            let a = &self.subsystems[p.0].bodies[p.1].shapes[p.2].shape;
            let b = &self.subsystems[q.0].bodies[q.1].shapes[q.2].shape;
            if !collision::supports(a, b) {
                return Err(Error::UnsupportedPair(a.name(), b.name()));
            }
        }
        Ok(())
    }

    fn wrenches(&self) -> Vec<Vec<Vector6<f64>>> {
        let mut w: Vec<Vec<Vector6<f64>>> = self.subsystems.iter().map(|s| vec![Vector6::zeros(); s.bodies.len()]).collect();
        for f in &self.forces {
            if self.time >= f.start && self.time < f.end {
                w[f.subsystem][f.body] += f.wrench;
            }
        }
        for (j, per_body) in self.extra_wrenches.iter().enumerate() {
            for (b, x) in per_body.iter().enumerate() {
                w[j][b] += x;
            }
        }
        w
    }

    /// Collision detection and assembly at the current state.
    pub fn assemble(&self) -> Result<ContactProblem> {
        let wrenches = self.wrenches();
        let subs: Vec<SubsystemProblem> = self
            .subsystems
            .iter()
            .zip(&wrenches)
            .map(|(s, w)| assembly::subsystem_problem(s, &self.gravity, w, self.dt, self.theta))
            .collect::<Result<_>>()?;
        let mut problem = ContactProblem::new(subs, self.dt, self.theta)?;

        for (p, q) in self.candidate_pairs() {
            let (pose_a, pose_b) = (&problem.subsystems[p.0].kin.poses[p.1], &problem.subsystems[q.0].kin.poses[q.1]);
            let sa = &self.subsystems[p.0].bodies[p.1].shapes[p.2];
            let sb = &self.subsystems[q.0].bodies[q.1].shapes[q.2];
            let wa: Isometry3<f64> = pose_a * sa.local;
            let wb: Isometry3<f64> = pose_b * sb.local;
            let reach = sa.shape.bounding_radius() + sb.shape.bounding_radius() + self.margin;
            if (wa.translation.vector - wb.translation.vector).norm() > reach {
                continue;
            }
            let mu = self.friction(sa.material, sb.material);
            for g in collision::collide(&sa.shape, &wa, &sb.shape, &wb, self.margin)? {
                if let Some(c) = contact_constraint(
                    &problem.subsystems,
                    Some((p.0, p.1)),
                    Some((q.0, q.1)),
                    &g.frame,
                    &g.point,
                    g.gap,
                    mu,
                    self.dt,
                    &self.stabilization,
                ) {
                    problem.push(c)?;
                }
            }
        }

        for sp in &self.springs {
            if let Some(c) = self.spring_constraint(&problem, sp) {
                problem.push(c)?;
            }
        }
        for lim in &self.limits {
            let sub = &self.subsystems[lim.subsystem];
            if sub.is_static() {
                continue;
            }
            let q = sub.q[sub.q_offset(lim.body)];
            let dof = sub.v_offset(lim.body);
            for (sign, gap) in [(1.0, q - lim.lower), (-1.0, lim.upper - q)] {
                let mut jac = DMatrix::zeros(1, sub.ndof());
                jac[(0, dof)] = sign;
                problem.push(ConstraintSpec {
                    kind: ConstraintKind::Hard,
                    e: DVector::from_element(1, self.stabilization.error(gap, self.dt)),
                    blocks: vec![Block { subsystem: lim.subsystem, jac, attachment: Attachment::Joint }],
                    key: None,
                })?;
            }
        }
        Ok(problem)
    }

    fn spring_constraint(&self, problem: &ContactProblem, sp: &SpringSpec) -> Option<ConstraintSpec> {
        let world_point = |end: &SpringEnd| match end {
            SpringEnd::Body { subsystem, body, point } => (problem.subsystems[*subsystem].kin.poses[*body] * nalgebra::Point3::from(*point)).coords,
            SpringEnd::World(p) => *p,
        };
        let (pa, pb) = (world_point(&sp.a), world_point(&sp.b));
        let d = pa - pb;
        let len = d.norm();
        if len < 1e-12 {
            return None;
        }
        let dir = DMatrix::from_row_slice(1, 3, (d / len).as_slice());
        let mut blocks = Vec::new();
        for (end, p, sign) in [(&sp.a, pa, 1.0), (&sp.b, pb, -1.0)] {
            if let SpringEnd::Body { subsystem, body, .. } = end {
                if problem.subsystems[*subsystem].ndof() > 0 {
                    blocks.push(direction_block(&problem.subsystems[*subsystem].kin, *subsystem, *body, &dir, &p, sign));
                }
            }
        }
        if blocks.is_empty() {
            return None;
        }
        Some(ConstraintSpec {
            kind: ConstraintKind::Soft { k: sp.stiffness, b: sp.damping },
            e: DVector::from_element(1, len - sp.rest),
            blocks,
            key: None,
        })
    }

    /// Impulses carried over from the previous step.
    pub fn warm_state(&self, problem: &ContactProblem) -> Option<SolverState> {
        if self.warm.contacts.is_empty() && self.warm.others.is_empty() {
            return None;
        }
        let mut other = 0;
        let lambda = problem
            .constraints
            .iter()
            .map(|c| match &c.key {
                Some(key) => self
                    .warm
                    .contacts
                    .iter()
                    .filter(|(k, _)| k.a == key.a && k.b == key.b)
                    .map(|(k, l)| ((k.point - key.point).norm(), l))
                    .filter(|(d, _)| *d < WARM_MATCH_DISTANCE)
                    .min_by(|x, y| x.0.total_cmp(&y.0))
                    .map(|(_, l)| l.clone())
                    .unwrap_or_else(|| DVector::zeros(c.rows())),
                None => {
                    other += 1;
                    match self.warm.others.get(other - 1) {
                        Some(l) if l.len() == c.rows() => l.clone(),
                        _ => DVector::zeros(c.rows()),
                    }
                }
            })
            .collect();
        Some(SolverState::from_impulses(problem, lambda, 0.0))
    }

    fn remember(&mut self, problem: &ContactProblem, state: &SolverState) {
        self.warm.contacts.clear();
        self.warm.others.clear();
        for (c, l) in problem.constraints.iter().zip(&state.lambda) {
            match &c.key {
                Some(k) => self.warm.contacts.push((*k, l.clone())),
                None => self.warm.others.push(l.clone()),
            }
        }
    }

    pub fn clear_warm_start(&mut self) {
        self.warm = WarmCache::default();
    }

    /// `v_{k+1} = (v̂ − θv_k)/(1−θ)`; positions advance with `v̂`.
    pub fn advance(&mut self, vhat: &[DVector<f64>]) {
        for (s, vh) in self.subsystems.iter_mut().zip(vhat) {
            if s.is_static() {
                continue;
            }
            let next = (vh - &s.v * self.theta) / (1.0 - self.theta);
            s.integrate(vh, self.dt);
            s.v = next;
        }
        self.time += self.dt;
        self.step_index += 1;
    }

    pub fn step(&mut self, settings: &SolverSettings) -> Result<StepOutcome> {
        let problem = self.assemble()?;
        let warm = if settings.warm_start { self.warm_state(&problem) } else { None };
        let (state, report) = solve(&problem, warm.as_ref(), settings)?;
        if !report.converged {
            log::debug!("step {}: {} stopped after {} iterations (metric {:e})", self.step_index, settings.kind, report.iterations, report.metric);
        }
        self.advance(&state.vhat);
        self.remember(&problem, &state);
        Ok(StepOutcome { report, contacts: problem.contact_count(), energy: self.energy(), penetration: self.penetration() })
    }

    /// Deepest current penetration over all contact pairs (m).
    pub fn penetration(&self) -> f64 {
        let poses: Vec<Vec<Isometry3<f64>>> = self.subsystems.iter().map(|s| s.body_poses()).collect();
        let mut deepest: f64 = 0.0;
        for (p, q) in self.candidate_pairs() {
            let (pa, pb) = (poses[p.0][p.1], poses[q.0][q.1]);
            let sa = &self.subsystems[p.0].bodies[p.1].shapes[p.2];
            let sb = &self.subsystems[q.0].bodies[q.1].shapes[q.2];
            if let Ok(gs) = collision::collide(&sa.shape, &(pa * sa.local), &sb.shape, &(pb * sb.local), 0.0) {
                for g in gs {
                    deepest = deepest.max(-g.gap);
                }
            }
        }
        deepest
    }

    /// Kinetic plus gravitational potential energy.
    pub fn energy(&self) -> f64 {
        let mut e = 0.0;
        for s in self.subsystems.iter().filter(|s| !s.is_static()) {
            let kin = s.kinematics();
            e += kin.kinetic_energy(&s.v);
            for i in &kin.inertia {
                e -= self.gravity.dot(&i.first_moment);
            }
        }
        e
    }

    /// Total linear momentum of all dynamic bodies.
    pub fn linear_momentum(&self) -> Vector3<f64> {
        let mut p = Vector3::zeros();
        for s in self.subsystems.iter().filter(|s| !s.is_static()) {
            let kin = s.kinematics();
            for (t, i) in kin.twists(&s.v).iter().zip(&kin.inertia) {
                let com = i.first_moment / i.mass;
                p += spatial::point_velocity(t, &com) * i.mass;
            }
        }
        p
    }
}
