//! JSON scene description (SI units) and its validation.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "gravity": [0, 0, -9.81],
//!   "dt": 0.004166666666666667,
//!   "materials": [{ "name": "default", "mu": 0.5 }],
//!   "subsystems": [
//!     { "name": "ground",
//!       "bodies": [{ "name": "ground", "joint": { "kind": "fixed" },
//!                    "shapes": [{ "type": "half_space", "normal": [0, 0, 1], "offset": 0 }] }] },
//!     { "name": "ball", "position": [0, 0, 0.1],
//!       "bodies": [{ "name": "ball", "mass": 1.0,
//!                    "shapes": [{ "type": "sphere", "radius": 0.1 }] }] }
//!   ]
//! }
//! ```
//!
//! A body without an explicit joint gets a floating joint. A body without
//! an explicit inertia gets the solid inertia of its first shape.

use std::path::Path;

use nalgebra::{Isometry3, Matrix3, Quaternion, Translation3, UnitQuaternion, Vector2, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::assembly::{check_integration, Stabilization};
use crate::collision::{DishProfile, Shape, ShapeInstance, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::multibody::{Body, Joint, JointKind, Subsystem};
use crate::sim::{ExternalForce, JointLimit, Material, SpringSpec, SpringEnd, World};

pub const FORMAT_VERSION: u32 = 1;

fn default_gravity() -> [f64; 3] {
    [0.0, 0.0, -9.81]
}
fn default_dt() -> f64 {
    1.0 / 240.0
}
fn default_theta() -> f64 {
    0.5
}
fn default_margin() -> f64 {
    DEFAULT_MARGIN
}
fn default_material() -> String {
    "default".into()
}
fn default_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    #[serde(default)]
    pub translation: [f64; 3],
    /// Unit quaternion `(w, x, y, z)`.
    #[serde(default = "identity_quat")]
    pub rotation: [f64; 4],
}

fn identity_quat() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl Default for PoseSpec {
    fn default() -> Self {
        Self { translation: [0.0; 3], rotation: identity_quat() }
    }
}

impl PoseSpec {
    pub fn to_isometry(&self, what: &str) -> Result<Isometry3<f64>> {
        let [w, x, y, z] = self.rotation;
        let q = Quaternion::new(w, x, y, z);
        if (q.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::Scene(format!("{what}: rotation quaternion is not unit length")));
        }
        let t = self.translation;
        Ok(Isometry3::from_parts(Translation3::new(t[0], t[1], t[2]), UnitQuaternion::from_quaternion(q)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Sphere {
        radius: f64,
        #[serde(default)]
        pose: PoseSpec,
        #[serde(default = "default_material")]
        material: String,
    },
    HalfSpace {
        normal: [f64; 3],
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        pose: PoseSpec,
        #[serde(default = "default_material")]
        material: String,
    },
    Box {
        half_extents: [f64; 3],
        #[serde(default)]
        pose: PoseSpec,
        #[serde(default = "default_material")]
        material: String,
    },
    Dish {
        a: [f64; 2],
        b: [f64; 2],
        thickness: f64,
        #[serde(default)]
        pose: PoseSpec,
        #[serde(default = "default_material")]
        material: String,
    },
}

impl ShapeSpec {
    fn parts(&self) -> (Shape, &PoseSpec, &str) {
        match self {
            ShapeSpec::Sphere { radius, pose, material } => (Shape::Sphere { radius: *radius }, pose, material),
            ShapeSpec::HalfSpace { normal, offset, pose, material } => {
                (Shape::HalfSpace { normal: Vector3::from(*normal), offset: *offset }, pose, material)
            }
            ShapeSpec::Box { half_extents, pose, material } => (Shape::Cuboid { half_extents: Vector3::from(*half_extents) }, pose, material),
            ShapeSpec::Dish { a, b, thickness, pose, material } => (
                Shape::Dish(DishProfile { a: Vector2::from(*a), b: Vector2::from(*b), thickness: *thickness }),
                pose,
                material,
            ),
        }
    }

    pub fn sphere(radius: f64) -> Self {
        ShapeSpec::Sphere { radius, pose: PoseSpec::default(), material: default_material() }
    }

    pub fn ground() -> Self {
        ShapeSpec::HalfSpace { normal: [0.0, 0.0, 1.0], offset: 0.0, pose: PoseSpec::default(), material: default_material() }
    }

    pub fn cuboid(half_extents: [f64; 3]) -> Self {
        ShapeSpec::Box { half_extents, pose: PoseSpec::default(), material: default_material() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    pub kind: JointKind,
    /// Parent body name within the subsystem; `None` attaches to the ground.
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(default)]
    pub placement: PoseSpec,
    #[serde(default)]
    pub axis: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InertiaSpec {
    Diagonal([f64; 3]),
    Full([[f64; 3]; 3]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub name: String,
    #[serde(default)]
    pub mass: f64,
    #[serde(default)]
    pub inertia: Option<InertiaSpec>,
    #[serde(default)]
    pub com: [f64; 3],
    #[serde(default)]
    pub joint: Option<JointSpec>,
    #[serde(default)]
    pub shapes: Vec<ShapeSpec>,
}

impl BodySpec {
    pub fn new(name: impl Into<String>, mass: f64, shape: ShapeSpec) -> Self {
        Self { name: name.into(), mass, inertia: None, com: [0.0; 3], joint: None, shapes: vec![shape] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemSpec {
    pub name: String,
    pub bodies: Vec<BodySpec>,
    #[serde(default)]
    pub self_collision: bool,
    /// Initial root position for a floating root.
    #[serde(default)]
    pub position: Option<[f64; 3]>,
    /// Initial root orientation `(w, x, y, z)` for a floating root.
    #[serde(default)]
    pub orientation: Option<[f64; 4]>,
    /// Full generalized position; overrides `position`/`orientation`.
    #[serde(default)]
    pub q: Option<Vec<f64>>,
    #[serde(default)]
    pub v: Option<Vec<f64>>,
}

impl SubsystemSpec {
    pub fn free(name: impl Into<String>, body: BodySpec, position: [f64; 3]) -> Self {
        Self { name: name.into(), bodies: vec![body], self_collision: false, position: Some(position), orientation: None, q: None, v: None }
    }

    pub fn ground() -> Self {
        let mut body = BodySpec::new("ground", 0.0, ShapeSpec::ground());
        body.joint = Some(JointSpec { kind: JointKind::Fixed, parent: None, placement: PoseSpec::default(), axis: [0.0; 3] });
        Self { name: "ground".into(), bodies: vec![body], self_collision: false, position: None, orientation: None, q: None, v: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub name: String,
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionPair {
    pub a: String,
    pub b: String,
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnchorSpec {
    Body { subsystem: String, body: String, #[serde(default)] point: [f64; 3] },
    World { world: [f64; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpringDecl {
    pub a: AnchorSpec,
    pub b: AnchorSpec,
    /// Per-step impulse gain on the length error (N·s/m).
    pub stiffness: f64,
    /// Per-step impulse gain on the length rate (N·s²/m).
    pub damping: f64,
    #[serde(default)]
    pub rest_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitDecl {
    pub subsystem: String,
    pub body: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceDecl {
    pub subsystem: String,
    pub body: String,
    /// `(torque about COM, force at COM)`, world frame.
    pub wrench: [f64; 6],
    #[serde(default)]
    pub start: f64,
    /// Open-ended when absent.
    #[serde(default)]
    pub end: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSpec {
    pub counts: Vec<usize>,
    pub radius: f64,
    pub mass: f64,
    pub spacing: f64,
    pub mu: f64,
    /// Timed repetitions per count; the median is reported.
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

fn default_repeats() -> usize {
    5
}

impl Default for ScalingSpec {
    fn default() -> Self {
        Self { counts: vec![8, 16, 32, 64], radius: 0.05, mass: 1.0, spacing: 0.15, mu: 0.5, repeats: default_repeats() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default = "default_version")]
    pub format_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_gravity")]
    pub gravity: [f64; 3],
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub baumgarte: Option<f64>,
    #[serde(default)]
    pub slop: Option<f64>,
    #[serde(default)]
    pub materials: Vec<MaterialSpec>,
    #[serde(default)]
    pub friction_pairs: Vec<FrictionPair>,
    pub subsystems: Vec<SubsystemSpec>,
    #[serde(default)]
    pub springs: Vec<SpringDecl>,
    #[serde(default)]
    pub joint_limits: Vec<LimitDecl>,
    #[serde(default)]
    pub external_forces: Vec<ForceDecl>,
    /// Bound `W` of the uniform random wrenches in single-step mode.
    #[serde(default)]
    pub wrench_amplitude: f64,
    #[serde(default)]
    pub scaling: Option<ScalingSpec>,
}

fn solid_inertia(shape: &Shape, mass: f64) -> Option<Matrix3<f64>> {
    match shape {
        Shape::Sphere { radius } => Some(Matrix3::identity() * (0.4 * mass * radius * radius)),
        Shape::Cuboid { half_extents: h } => {
            let (x, y, z) = (4.0 * h.x * h.x, 4.0 * h.y * h.y, 4.0 * h.z * h.z);
            Some(Matrix3::from_diagonal(&Vector3::new(y + z, x + z, x + y)) * (mass / 12.0))
        }
        _ => None,
    }
}

impl SceneFile {
    pub fn new(name: impl Into<String>, subsystems: Vec<SubsystemSpec>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            name: name.into(),
            gravity: default_gravity(),
            dt: default_dt(),
            theta: default_theta(),
            margin: default_margin(),
            baumgarte: None,
            slop: None,
            materials: vec![MaterialSpec { name: default_material(), mu: 0.5 }],
            friction_pairs: Vec::new(),
            subsystems,
            springs: Vec::new(),
            joint_limits: Vec::new(),
            external_forces: Vec::new(),
            wrench_amplitude: 0.0,
            scaling: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scene(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Scene(msg) => Error::Scene(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    /// Validates the scene and builds the simulation world.
    pub fn build(&self) -> Result<World> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Scene(format!("unsupported format_version {} (expected {FORMAT_VERSION})", self.format_version)));
        }
        check_integration(self.dt, self.theta).map_err(|e| Error::Scene(e.to_string()))?;
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err(Error::Scene("gravity must be finite".into()));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::Scene("margin must be non-negative".into()));
        }
        let mut materials: Vec<Material> = Vec::new();
        for m in &self.materials {
            if !(m.mu >= 0.0) || !m.mu.is_finite() {
                return Err(Error::Scene(format!("material '{}' has invalid mu {}", m.name, m.mu)));
            }
            if materials.iter().any(|x| x.name == m.name) {
                return Err(Error::Scene(format!("material '{}' declared twice", m.name)));
            }
            materials.push(Material { name: m.name.clone(), mu: m.mu });
        }
        if !materials.iter().any(|m| m.name == "default") {
            materials.push(Material { name: "default".into(), mu: 0.5 });
        }
        let material_index = |name: &str| {
            materials
                .iter()
                .position(|m| m.name == name)
                .ok_or_else(|| Error::Scene(format!("unknown material '{name}'")))
        };
        let mut pair_mu = Vec::new();
        for p in &self.friction_pairs {
            if !(p.mu >= 0.0) || !p.mu.is_finite() {
                return Err(Error::Scene(format!("friction pair {}/{} has invalid mu", p.a, p.b)));
            }
            pair_mu.push((material_index(&p.a)?, material_index(&p.b)?, p.mu));
        }

        let mut subsystems = Vec::with_capacity(self.subsystems.len());
        for (si, s) in self.subsystems.iter().enumerate() {
            if self.subsystems[..si].iter().any(|o| o.name == s.name) {
                return Err(Error::Scene(format!("subsystem '{}' declared twice", s.name)));
            }
            subsystems.push(self.build_subsystem(s, &material_index)?);
        }

        let find = |sub: &str, body: &str| -> Result<(usize, usize)> {
            let j = self
                .subsystems
                .iter()
                .position(|s| s.name == sub)
                .ok_or_else(|| Error::Scene(format!("unknown subsystem '{sub}'")))?;
            let b = self.subsystems[j]
                .bodies
                .iter()
                .position(|b| b.name == body)
                .ok_or_else(|| Error::Scene(format!("unknown body '{body}' in subsystem '{sub}'")))?;
            Ok((j, b))
        };
        let anchor = |a: &AnchorSpec| -> Result<SpringEnd> {
            Ok(match a {
                AnchorSpec::Body { subsystem, body, point } => {
                    let (j, b) = find(subsystem, body)?;
                    SpringEnd::Body { subsystem: j, body: b, point: Vector3::from(*point) }
                }
                AnchorSpec::World { world } => SpringEnd::World(Vector3::from(*world)),
            })
        };
        let mut springs = Vec::new();
        for sp in &self.springs {
            if !(sp.stiffness > 0.0 && sp.damping > 0.0 && sp.rest_length >= 0.0) {
                return Err(Error::Scene("springs need positive stiffness and damping and non-negative rest length".into()));
            }
            springs.push(SpringSpec { a: anchor(&sp.a)?, b: anchor(&sp.b)?, stiffness: sp.stiffness, damping: sp.damping, rest: sp.rest_length });
        }
        let mut limits = Vec::new();
        for l in &self.joint_limits {
            let (j, b) = find(&l.subsystem, &l.body)?;
            let joint = &subsystems[j].joints[b];
            if joint.dof() != 1 {
                return Err(Error::Scene(format!("joint limit on '{}' needs a one-dof joint", l.body)));
            }
            if !(l.lower <= l.upper) {
                return Err(Error::Scene(format!("joint limit on '{}' has lower > upper", l.body)));
            }
            limits.push(JointLimit { subsystem: j, body: b, lower: l.lower, upper: l.upper });
        }
        let mut forces = Vec::new();
        for f in &self.external_forces {
            let (j, b) = find(&f.subsystem, &f.body)?;
            if !f.wrench.iter().all(|x| x.is_finite()) {
                return Err(Error::Scene("external wrench must be finite".into()));
            }
            forces.push(ExternalForce { subsystem: j, body: b, wrench: Vector6::from_row_slice(&f.wrench), start: f.start, end: f.end.unwrap_or(f64::INFINITY) });
        }
        if !(self.wrench_amplitude >= 0.0) {
            return Err(Error::Scene("wrench_amplitude must be non-negative".into()));
        }
        let mut stab = Stabilization::default();
        if let Some(a) = self.baumgarte {
            stab.alpha = a;
        }
        if let Some(s) = self.slop {
            stab.slop = s;
        }
        if !(stab.alpha >= 0.0 && stab.slop >= 0.0) {
            return Err(Error::Scene("baumgarte and slop must be non-negative".into()));
        }
        let mut world = World::empty();
        world.subsystems = subsystems;
        world.gravity = Vector3::from(self.gravity);
        world.dt = self.dt;
        world.theta = self.theta;
        world.margin = self.margin;
        world.stabilization = stab;
        world.materials = materials;
        world.pair_mu = pair_mu;
        world.springs = springs;
        world.limits = limits;
        world.forces = forces;
        world.wrench_amplitude = self.wrench_amplitude;
        world.check_collision_pairs()?;
        Ok(world)
    }

    fn build_subsystem(&self, s: &SubsystemSpec, material_index: &dyn Fn(&str) -> Result<usize>) -> Result<Subsystem> {
        let ctx = |msg: String| Error::Scene(format!("subsystem '{}': {msg}", s.name));
        let mut joints = Vec::with_capacity(s.bodies.len());
        let mut bodies = Vec::with_capacity(s.bodies.len());
        for (k, b) in s.bodies.iter().enumerate() {
            if s.bodies[..k].iter().any(|o| o.name == b.name) {
                return Err(ctx(format!("body '{}' declared twice", b.name)));
            }
            let joint = match &b.joint {
                None => Joint::floating(),
                Some(j) => {
                    let parent = match &j.parent {
                        None => None,
                        Some(p) => Some(
                            s.bodies[..k]
                                .iter()
                                .position(|o| &o.name == p)
                                .ok_or_else(|| ctx(format!("body '{}' has parent '{p}' which is not declared before it", b.name)))?,
                        ),
                    };
                    Joint::new(j.kind, parent, j.placement.to_isometry(&b.name)?, Vector3::from(j.axis))
                }
            };
            let mut shapes = Vec::with_capacity(b.shapes.len());
            for spec in &b.shapes {
                let (shape, pose, material) = spec.parts();
                shape.validate().map_err(|e| ctx(e.to_string()))?;
                shapes.push(ShapeInstance { shape, local: pose.to_isometry(&b.name)?, material: material_index(material)? });
            }
            let inertia = match &b.inertia {
                Some(InertiaSpec::Diagonal(d)) => Matrix3::from_diagonal(&Vector3::from(*d)),
                Some(InertiaSpec::Full(m)) => Matrix3::from_fn(|r, c| m[r][c]),
                None if joint.dof() == 0 && k == 0 => Matrix3::identity(),
                None => shapes
                    .first()
                    .and_then(|sh| solid_inertia(&sh.shape, b.mass))
                    .ok_or_else(|| ctx(format!("body '{}' needs an explicit inertia", b.name)))?,
            };
            let mut body = Body::new(b.name.clone(), b.mass, inertia).with_com(Vector3::from(b.com));
            body.shapes = shapes;
            joints.push(joint);
            bodies.push(body);
        }
        let mut sub = Subsystem::new(s.name.clone(), joints, bodies).map_err(|e| ctx(e.to_string()))?;
        sub.self_collision = s.self_collision;
        if s.position.is_some() || s.orientation.is_some() {
            if sub.joints[0].kind != JointKind::Floating {
                return Err(ctx("position/orientation need a floating root".into()));
            }
            let pose = PoseSpec { translation: s.position.unwrap_or([0.0; 3]), rotation: s.orientation.unwrap_or_else(identity_quat) };
            sub.set_floating_pose(0, &pose.to_isometry(&s.name)?);
        }
        if let Some(q) = &s.q {
            if q.len() != sub.q.len() {
                return Err(ctx(format!("q has {} entries, expected {}", q.len(), sub.q.len())));
            }
            sub.q.copy_from_slice(q);
        }
        if let Some(v) = &s.v {
            if v.len() != sub.v.len() {
                return Err(ctx(format!("v has {} entries, expected {}", v.len(), sub.v.len())));
            }
            sub.v.copy_from_slice(v);
        }
        if !sub.q.iter().chain(sub.v.iter()).all(|x| x.is_finite()) {
            return Err(ctx("non-finite initial state".into()));
        }
        Ok(sub)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BALL: &str = r#"{
        "format_version": 1,
        "subsystems": [
            { "name": "ground", "bodies": [{ "name": "ground", "joint": { "kind": "fixed" },
              "shapes": [{ "type": "half_space", "normal": [0, 0, 1] }] }] },
            { "name": "ball", "position": [0, 0, 0.1],
              "bodies": [{ "name": "ball", "mass": 2.0, "shapes": [{ "type": "sphere", "radius": 0.1 }] }] }
        ]
    }"#;

    #[test]
    fn parses_and_builds() {
        let scene = SceneFile::from_json(BALL).unwrap();
        let world = scene.build().unwrap();
        assert_eq!(world.subsystems.len(), 2);
        assert!((world.subsystems[1].bodies[0].inertia[(0, 0)] - 0.4 * 2.0 * 0.01).abs() < 1e-15);
        assert_eq!(world.subsystems[1].q[2], 0.1);
        let round = SceneFile::from_json(&scene.to_json()).unwrap();
        assert_eq!(round, scene);
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        assert!(SceneFile::from_json(&BALL.replace("\"mass\"", "\"weight\"")).is_err());
        let mut s = SceneFile::from_json(BALL).unwrap();
        s.format_version = 7;
        assert!(matches!(s.build(), Err(Error::Scene(_))));
    }

    #[test]
    fn rejects_unsupported_pairs_at_load() {
        let mut s = SceneFile::from_json(BALL).unwrap();
        s.subsystems.push(SubsystemSpec::free("b1", BodySpec::new("b1", 1.0, ShapeSpec::cuboid([0.1; 3])), [1.0, 0.0, 0.5]));
        s.subsystems.push(SubsystemSpec::free("b2", BodySpec::new("b2", 1.0, ShapeSpec::cuboid([0.1; 3])), [2.0, 0.0, 0.5]));
        assert!(matches!(s.build(), Err(Error::UnsupportedPair("box", "box"))));
    }

    #[test]
    fn rejects_bad_values() {
        let mut s = SceneFile::from_json(BALL).unwrap();
        s.theta = 1.0;
        assert!(s.build().is_err());
        let mut s = SceneFile::from_json(BALL).unwrap();
        s.subsystems[1].bodies[0].mass = -1.0;
        assert!(s.build().is_err());
        let mut s = SceneFile::from_json(BALL).unwrap();
        s.subsystems[1].v = Some(vec![0.0; 3]);
        assert!(s.build().is_err());
        assert!(SceneFile::from_json(&BALL.replace("\"radius\": 0.1", "\"radius\": -0.1")).unwrap().build().is_err());
    }
}
