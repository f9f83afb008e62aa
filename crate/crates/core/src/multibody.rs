//! Kinematic trees ("subsystems"): one subtree of bodies rooted at the ground.
//!
//! Every body owns exactly one joint connecting it to its parent body (or to
//! the ground for the root). Bodies are stored in topological order.
//!
//! Joint velocities follow these conventions:
//!
//! * revolute / prismatic: scalar rate about / along the joint axis;
//! * floating: `(ω, v)` with the angular rate in the body frame and the
//!   linear velocity of the body origin in the joint (placement) frame. The
//!   position part of `q` is `(x, y, z, qw, qx, qy, qz)`;
//! * fixed: no coordinates.

use nalgebra::{
    DMatrix, DVector, Isometry3, Matrix3, Matrix6xX, Quaternion, Translation3, Unit, UnitQuaternion,
    Vector3, Vector6,
};

use crate::collision::ShapeInstance;
use crate::crba;
use crate::error::{Error, Result};
use crate::spatial::{self, SpatialInertia};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    Fixed,
    Floating,
    Revolute,
    Prismatic,
}

#[derive(Clone, Debug)]
pub struct Joint {
    pub kind: JointKind,
    /// Unit axis in the joint frame (revolute / prismatic only).
    pub axis: Vector3<f64>,
    /// Parent body index within the subsystem, `None` for the ground.
    pub parent: Option<usize>,
    /// Joint frame relative to the parent body frame.
    pub placement: Isometry3<f64>,
}

impl Joint {
    pub fn new(kind: JointKind, parent: Option<usize>, placement: Isometry3<f64>, axis: Vector3<f64>) -> Self {
        Self { kind, axis, parent, placement }
    }

    pub fn floating() -> Self {
        Self::new(JointKind::Floating, None, Isometry3::identity(), Vector3::zeros())
    }

    pub fn revolute(parent: Option<usize>, placement: Isometry3<f64>, axis: Vector3<f64>) -> Self {
        Self::new(JointKind::Revolute, parent, placement, axis)
    }

    pub fn prismatic(parent: Option<usize>, placement: Isometry3<f64>, axis: Vector3<f64>) -> Self {
        Self::new(JointKind::Prismatic, parent, placement, axis)
    }

    pub fn fixed(parent: Option<usize>, placement: Isometry3<f64>) -> Self {
        Self::new(JointKind::Fixed, parent, placement, Vector3::zeros())
    }

    pub fn dof(&self) -> usize {
        match self.kind {
            JointKind::Fixed => 0,
            JointKind::Floating => 6,
            JointKind::Revolute | JointKind::Prismatic => 1,
        }
    }

    pub fn nq(&self) -> usize {
        match self.kind {
            JointKind::Fixed => 0,
            JointKind::Floating => 7,
            JointKind::Revolute | JointKind::Prismatic => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Body {
    pub name: String,
    pub mass: f64,
    /// Rotational inertia about the COM, body frame.
    pub inertia: Matrix3<f64>,
    /// COM in the body frame.
    pub com: Vector3<f64>,
    pub shapes: Vec<ShapeInstance>,
}

impl Body {
    pub fn new(name: impl Into<String>, mass: f64, inertia: Matrix3<f64>) -> Self {
        Self { name: name.into(), mass, inertia, com: Vector3::zeros(), shapes: Vec::new() }
    }

    pub fn with_shape(mut self, shape: ShapeInstance) -> Self {
        self.shapes.push(shape);
        self
    }

    pub fn with_com(mut self, com: Vector3<f64>) -> Self {
        self.com = com;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Subsystem {
    pub name: String,
    pub joints: Vec<Joint>,
    pub bodies: Vec<Body>,
    pub q: DVector<f64>,
    pub v: DVector<f64>,
    pub self_collision: bool,
    q_offset: Vec<usize>,
    v_offset: Vec<usize>,
}

impl Subsystem {
    /// Builds a subsystem at its neutral configuration (zero joint values,
    /// identity orientation for floating joints, zero velocity).
    pub fn new(name: impl Into<String>, joints: Vec<Joint>, bodies: Vec<Body>) -> Result<Self> {
        let name = name.into();
        if joints.is_empty() || joints.len() != bodies.len() {
            return Err(Error::InvalidModel(format!("{name}: need one joint per body and at least one body")));
        }
        let mut joints = joints;
        for (k, j) in joints.iter_mut().enumerate() {
            match (k, j.parent) {
                (0, None) => {}
                (0, Some(_)) => return Err(Error::InvalidModel(format!("{name}: body 0 must attach to the ground"))),
                (_, None) => {
                    return Err(Error::InvalidModel(format!("{name}: body {k} attaches to the ground; only one root allowed")))
                }
                (_, Some(p)) if p >= k => {
                    return Err(Error::InvalidModel(format!("{name}: body {k} has parent {p}; parents must precede children")))
                }
                _ => {}
            }
            if j.kind == JointKind::Floating && j.parent.is_some() {
                return Err(Error::InvalidModel(format!("{name}: floating joints are only supported at the root")));
            }
            if matches!(j.kind, JointKind::Revolute | JointKind::Prismatic) {
                let n = j.axis.norm();
                if !(n > 1e-12) || !n.is_finite() {
                    return Err(Error::InvalidModel(format!("{name}: joint {k} has a degenerate axis")));
                }
                j.axis /= n;
            }
        }
        let mut q_offset = Vec::with_capacity(joints.len());
        let mut v_offset = Vec::with_capacity(joints.len());
        let (mut nq, mut nv) = (0, 0);
        for j in &joints {
            q_offset.push(nq);
            v_offset.push(nv);
            nq += j.nq();
            nv += j.dof();
        }
        if nv > 0 {
            for b in &bodies {
                if !(b.mass > 0.0) || !b.mass.is_finite() {
                    return Err(Error::InvalidModel(format!("{name}: body '{}' needs positive mass", b.name)));
                }
                let sym = (b.inertia - b.inertia.transpose()).norm() <= 1e-9 * b.inertia.norm().max(1.0);
                if !sym || b.inertia.cholesky().is_none() {
                    return Err(Error::InvalidModel(format!("{name}: body '{}' inertia is not SPD", b.name)));
                }
            }
        }
        let mut q = DVector::zeros(nq);
        for (k, j) in joints.iter().enumerate() {
            if j.kind == JointKind::Floating {
                q[q_offset[k] + 3] = 1.0;
            }
        }
        Ok(Self {
            name,
            joints,
            bodies,
            q,
            v: DVector::zeros(nv),
            self_collision: false,
            q_offset,
            v_offset,
        })
    }

    /// A single free body with a floating root joint.
    pub fn free_body(name: impl Into<String>, body: Body, position: Vector3<f64>) -> Result<Self> {
        let mut s = Self::new(name, vec![Joint::floating()], vec![body])?;
        s.q[0] = position.x;
        s.q[1] = position.y;
        s.q[2] = position.z;
        Ok(s)
    }

    pub fn ndof(&self) -> usize {
        self.v.len()
    }

    pub fn is_static(&self) -> bool {
        self.ndof() == 0
    }

    pub fn q_offset(&self, body: usize) -> usize {
        self.q_offset[body]
    }

    pub fn v_offset(&self, body: usize) -> usize {
        self.v_offset[body]
    }

    pub fn set_floating_pose(&mut self, body: usize, pose: &Isometry3<f64>) {
        assert_eq!(self.joints[body].kind, JointKind::Floating);
        let o = self.q_offset[body];
        let t = pose.translation.vector;
        let r = pose.rotation.quaternion();
        self.q.as_mut_slice()[o..o + 7].copy_from_slice(&[t.x, t.y, t.z, r.w, r.i, r.j, r.k]);
    }

    /// Joint-frame-relative motion of joint `k` at the current `q`.
    fn joint_motion(&self, k: usize) -> Isometry3<f64> {
        let j = &self.joints[k];
        let o = self.q_offset[k];
        match j.kind {
            JointKind::Fixed => Isometry3::identity(),
            JointKind::Revolute => {
                Isometry3::from_parts(Translation3::identity(), UnitQuaternion::from_axis_angle(&Unit::new_unchecked(j.axis), self.q[o]))
            }
            JointKind::Prismatic => Isometry3::from_parts(Translation3::from(j.axis * self.q[o]), UnitQuaternion::identity()),
            JointKind::Floating => {
                let quat = Quaternion::new(self.q[o + 3], self.q[o + 4], self.q[o + 5], self.q[o + 6]);
                Isometry3::from_parts(
                    Translation3::new(self.q[o], self.q[o + 1], self.q[o + 2]),
                    UnitQuaternion::from_quaternion(quat),
                )
            }
        }
    }

    /// World poses of every body frame.
    pub fn body_poses(&self) -> Vec<Isometry3<f64>> {
        let mut poses: Vec<Isometry3<f64>> = Vec::with_capacity(self.bodies.len());
        for (k, j) in self.joints.iter().enumerate() {
            let parent = j.parent.map(|p| poses[p]).unwrap_or_else(Isometry3::identity);
            poses.push(parent * j.placement * self.joint_motion(k));
        }
        poses
    }

    /// Evaluates everything the solvers need at the current configuration.
    pub fn kinematics(&self) -> TreeKinematics {
        let poses = self.body_poses();
        let n = self.ndof();
        let mut motion = Vec::with_capacity(self.bodies.len());
        let mut inertia = Vec::with_capacity(self.bodies.len());
        let mut dof_parent = vec![None; n];
        let mut last_dof: Vec<Option<usize>> = Vec::with_capacity(self.bodies.len());
        for (k, j) in self.joints.iter().enumerate() {
            let pose = &poses[k];
            let rot = pose.rotation.to_rotation_matrix().into_inner();
            let origin = pose.translation.vector;
            let mut s = Matrix6xX::zeros(j.dof());
            match j.kind {
                JointKind::Fixed => {}
                JointKind::Revolute => {
                    let a = rot * j.axis;
                    s.set_column(0, &spatial::stack(&a, &origin.cross(&a)));
                }
                JointKind::Prismatic => {
                    let a = rot * j.axis;
                    s.set_column(0, &spatial::stack(&Vector3::zeros(), &a));
                }
                JointKind::Floating => {
                    let placement = j.placement.rotation.to_rotation_matrix().into_inner();
                    let oc = spatial::skew(&origin) * rot;
                    s.fixed_view_mut::<3, 3>(0, 0).copy_from(&rot);
                    s.fixed_view_mut::<3, 3>(3, 0).copy_from(&oc);
                    s.fixed_view_mut::<3, 3>(3, 3).copy_from(&placement);
                }
            }
            motion.push(s);

            let b = &self.bodies[k];
            let com = pose * nalgebra::Point3::from(b.com);
            let i_world = rot * b.inertia * rot.transpose();
            inertia.push(SpatialInertia::from_body(b.mass, &com.coords, &i_world));

            let inherited = j.parent.and_then(|p| last_dof[p]);
            let off = self.v_offset[k];
            for d in 0..j.dof() {
                dof_parent[off + d] = if d == 0 { inherited } else { Some(off + d - 1) };
            }
            last_dof.push(if j.dof() > 0 { Some(off + j.dof() - 1) } else { inherited });
        }
        TreeKinematics {
            poses,
            motion,
            inertia,
            parent: self.joints.iter().map(|j| j.parent).collect(),
            dof_offset: self.v_offset.clone(),
            dof_parent,
            kinds: self.joints.iter().map(|j| j.kind).collect(),
            ndof: n,
        }
    }

    /// Advances `q` with the joint velocity `vhat` over `dt`.
    ///
    /// Floating orientations use the exponential map of the body-frame rate
    /// and are renormalized.
    pub fn integrate(&mut self, vhat: &DVector<f64>, dt: f64) {
        for (k, j) in self.joints.iter().enumerate() {
            let (qo, vo) = (self.q_offset[k], self.v_offset[k]);
            match j.kind {
                JointKind::Fixed => {}
                JointKind::Revolute | JointKind::Prismatic => self.q[qo] += vhat[vo] * dt,
                JointKind::Floating => {
                    for a in 0..3 {
                        self.q[qo + a] += vhat[vo + 3 + a] * dt;
                    }
                    let quat = UnitQuaternion::from_quaternion(Quaternion::new(
                        self.q[qo + 3],
                        self.q[qo + 4],
                        self.q[qo + 5],
                        self.q[qo + 6],
                    ));
                    let w = Vector3::new(vhat[vo], vhat[vo + 1], vhat[vo + 2]);
                    let next = quat * UnitQuaternion::from_scaled_axis(w * dt);
                    let c = next.quaternion().normalize();
                    self.q.as_mut_slice()[qo + 3..qo + 7].copy_from_slice(&[c.w, c.i, c.j, c.k]);
                }
            }
        }
    }
}

/// Configuration-dependent quantities of one subsystem, all in world
/// coordinates about the world origin.
#[derive(Clone, Debug)]
pub struct TreeKinematics {
    pub poses: Vec<Isometry3<f64>>,
    /// Motion subspace of each body's joint (6 × dof).
    pub motion: Vec<Matrix6xX<f64>>,
    pub inertia: Vec<SpatialInertia>,
    pub parent: Vec<Option<usize>>,
    pub dof_offset: Vec<usize>,
    /// Parent of each degree of freedom along the tree (`λ(i)`).
    pub dof_parent: Vec<Option<usize>>,
    pub kinds: Vec<JointKind>,
    pub ndof: usize,
}

impl TreeKinematics {
    pub fn body_count(&self) -> usize {
        self.poses.len()
    }

    /// Jacobian from joint velocity to the body's twist about the world
    /// origin.
    pub fn origin_jacobian(&self, body: usize) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(6, self.ndof);
        let mut k = Some(body);
        while let Some(b) = k {
            let s = &self.motion[b];
            let off = self.dof_offset[b];
            for c in 0..s.ncols() {
                j.set_column(off + c, &s.column(c));
            }
            k = self.parent[b];
        }
        j
    }

    /// Twist of every body about the world origin.
    pub fn twists(&self, v: &DVector<f64>) -> Vec<Vector6<f64>> {
        let mut out: Vec<Vector6<f64>> = Vec::with_capacity(self.body_count());
        for b in 0..self.body_count() {
            let mut t = self.parent[b].map(|p| out[p]).unwrap_or_else(Vector6::zeros);
            let s = &self.motion[b];
            let off = self.dof_offset[b];
            for c in 0..s.ncols() {
                t += s.column(c) * v[off + c];
            }
            out.push(t);
        }
        out
    }

    /// Generalized force `f(q, v)` (gravity, external wrenches and velocity
    /// product terms) by recursive Newton-Euler with zero joint acceleration.
    ///
    /// `wrenches[b]` is an external wrench `(torque about COM, force at COM)`
    /// applied to body `b`.
    pub fn generalized_force(&self, v: &DVector<f64>, gravity: &Vector3<f64>, wrenches: &[Vector6<f64>]) -> DVector<f64> {
        let nb = self.body_count();
        let twists = self.twists(v);
        let mut accel: Vec<Vector6<f64>> = Vec::with_capacity(nb);
        let mut force: Vec<Vector6<f64>> = Vec::with_capacity(nb);
        for b in 0..nb {
            let s = &self.motion[b];
            let off = self.dof_offset[b];
            // Floating roots: the translational columns are fixed in the
            // ground frame, only the rotational ones move with the body.
            let moving = if self.kinds[b] == JointKind::Floating { 3 } else { s.ncols() };
            let mut sq = Vector6::zeros();
            for c in 0..moving {
                sq += s.column(c) * v[off + c];
            }
            let mut a = self.parent[b].map(|p| accel[p]).unwrap_or_else(Vector6::zeros);
            a += spatial::cross_motion(&twists[b], &sq);
            accel.push(a);
            let inertia = &self.inertia[b];
            let com = if inertia.mass > 0.0 { inertia.first_moment / inertia.mass } else { Vector3::zeros() };
            let fg = gravity * inertia.mass;
            let mut ext = spatial::stack(&com.cross(&fg), &fg);
            if let Some(w) = wrenches.get(b) {
                let (tau, f) = (spatial::angular(w), spatial::linear(w));
                ext += spatial::stack(&(tau + com.cross(&f)), &f);
            }
            let iv = inertia.mul_motion(&twists[b]);
            force.push(inertia.mul_motion(&a) + spatial::cross_force(&twists[b], &iv) - ext);
        }
        let mut tau = DVector::zeros(self.ndof);
        for b in (0..nb).rev() {
            let s = &self.motion[b];
            let off = self.dof_offset[b];
            for c in 0..s.ncols() {
                tau[off + c] = -s.column(c).dot(&force[b]);
            }
            if let Some(p) = self.parent[b] {
                let f = force[b];
                force[p] += f;
            }
        }
        tau
    }

    pub fn kinetic_energy(&self, v: &DVector<f64>) -> f64 {
        self.twists(v)
            .iter()
            .zip(&self.inertia)
            .map(|(t, i)| 0.5 * t.dot(&i.mul_motion(t)))
            .sum()
    }
}

/// Joint-space inertia by the composite-rigid-body algorithm.
pub fn mass_matrix(sub: &Subsystem) -> DMatrix<f64> {
    let kin = sub.kinematics();
    let h: Vec<_> = kin.inertia.iter().map(|i| i.to_matrix()).collect();
    crba::composite_assemble(&kin, &h)
}

/// Maps joint velocity to `(ω, v)` of the body: angular velocity and linear
/// velocity of the body origin, both world-aligned.
pub fn body_jacobian(sub: &Subsystem, body: usize) -> DMatrix<f64> {
    let kin = sub.kinematics();
    let mut j = kin.origin_jacobian(body);
    let o = kin.poses[body].translation.vector;
    for c in 0..j.ncols() {
        let w = Vector3::new(j[(0, c)], j[(1, c)], j[(2, c)]);
        let lin = Vector3::new(j[(3, c)], j[(4, c)], j[(5, c)]) + w.cross(&o);
        j[(3, c)] = lin.x;
        j[(4, c)] = lin.y;
        j[(5, c)] = lin.z;
    }
    j
}
