//! Narrow-phase contact generation between primitive shapes and revolved
//! dish signed-distance fields.
//!
//! Normals point from shape B toward shape A; a negative gap is penetration.

use nalgebra::{Isometry3, Matrix3, Point3, Vector2, Vector3};

use crate::error::{Error, Result};

/// Contacts are generated while the gap is below this margin (m).
pub const DEFAULT_MARGIN: f64 = 0.005;

/// Profile of a dish: the revolution about local `z` of the segments `O–A`
/// and `A–B` in the `(ρ, z)` half-plane, padded by `thickness`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DishProfile {
    pub a: Vector2<f64>,
    pub b: Vector2<f64>,
    pub thickness: f64,
}

impl DishProfile {
    pub fn new(a: Vector2<f64>, b: Vector2<f64>, thickness: f64) -> Result<Self> {
        if !(thickness > 0.0) || a.x < 0.0 || b.x < 0.0 {
            return Err(Error::Scene(format!("invalid dish profile A={a:?} B={b:?} d={thickness}")));
        }
        Ok(Self { a, b, thickness })
    }

    fn bounding_radius(&self) -> f64 {
        self.a.norm().max(self.b.norm()) + self.thickness
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Sphere { radius: f64 },
    /// `{ x : normal·x ≤ offset }` in the shape frame.
    HalfSpace { normal: Vector3<f64>, offset: f64 },
    Cuboid { half_extents: Vector3<f64> },
    Dish(DishProfile),
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Sphere { .. } => "sphere",
            Shape::HalfSpace { .. } => "half_space",
            Shape::Cuboid { .. } => "box",
            Shape::Dish(_) => "dish",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Sphere { radius } => *radius > 0.0,
            Shape::HalfSpace { normal, offset } => (normal.norm() - 1.0).abs() < 1e-9 && offset.is_finite(),
            Shape::Cuboid { half_extents } => half_extents.iter().all(|h| *h > 0.0),
            Shape::Dish(p) => p.thickness > 0.0 && p.a.x >= 0.0 && p.b.x >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Scene(format!("invalid {} parameters: {self:?}", self.name())))
        }
    }

    /// Radius of a sphere about the shape origin enclosing the shape;
    /// infinite for half-spaces.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            Shape::Sphere { radius } => *radius,
            Shape::HalfSpace { .. } => f64::INFINITY,
            Shape::Cuboid { half_extents } => half_extents.norm(),
            Shape::Dish(p) => p.bounding_radius(),
        }
    }
}

/// A shape attached to a body.
#[derive(Clone, Debug)]
pub struct ShapeInstance {
    pub shape: Shape,
    /// Shape frame relative to the body frame.
    pub local: Isometry3<f64>,
    /// Index into the scene's material table.
    pub material: usize,
}

impl ShapeInstance {
    pub fn new(shape: Shape) -> Self {
        Self { shape, local: Isometry3::identity(), material: 0 }
    }

    pub fn at(mut self, local: Isometry3<f64>) -> Self {
        self.local = local;
        self
    }

    pub fn material(mut self, material: usize) -> Self {
        self.material = material;
        self
    }
}

/// Geometric part of a contact feature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactGeometry {
    pub gap: f64,
    pub point: Vector3<f64>,
    pub normal: Vector3<f64>,
    /// Columns `(t1, t2, n)`.
    pub frame: Matrix3<f64>,
}

impl ContactGeometry {
    fn new(gap: f64, point: Vector3<f64>, normal: Vector3<f64>) -> Self {
        Self { gap, point, normal, frame: contact_frame(&normal) }
    }

    fn flipped(self) -> Self {
        Self::new(self.gap, self.point, -self.normal)
    }
}

/// Orthonormal right-handed frame with columns `(t1, t2, n)`. The first
/// tangent comes from the world axis least aligned with `n`.
pub fn contact_frame(normal: &Vector3<f64>) -> Matrix3<f64> {
    let abs = normal.abs();
    let axis = if abs.x <= abs.y && abs.x <= abs.z {
        Vector3::x()
    } else if abs.y <= abs.z {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let t1 = (axis - normal * normal.dot(&axis)).normalize();
    let t2 = normal.cross(&t1);
    Matrix3::from_columns(&[t1, t2, *normal])
}

fn closest_on_segment(p: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> Vector2<f64> {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Signed distance of the 2D profile and its gradient.
pub fn dish_sdf_2d(profile: &DishProfile, q: &Vector2<f64>) -> (f64, Vector2<f64>) {
    let o = Vector2::zeros();
    let c1 = closest_on_segment(q, &o, &profile.a);
    let c2 = closest_on_segment(q, &profile.a, &profile.b);
    let (d1, d2) = ((q - c1).norm(), (q - c2).norm());
    let (dist, closest, seg) = if d1 <= d2 { (d1, c1, profile.a - o) } else { (d2, c2, profile.b - profile.a) };
    let grad = if dist > 0.0 {
        (q - closest) / dist
    } else {
        // On the core segment itself: use its left normal.
        let n = Vector2::new(-seg.y, seg.x);
        if n.norm() > 0.0 { n.normalize() } else { Vector2::new(0.0, 1.0) }
    };
    (dist - profile.thickness, grad)
}

/// Signed distance of a dish at local point `p`, with its gradient. On the
/// revolution axis the radial direction is taken as `+x`.
pub fn dish_sdf(profile: &DishProfile, p: &Vector3<f64>) -> (f64, Vector3<f64>) {
    let rho = (p.x * p.x + p.y * p.y).sqrt();
    let (value, g) = dish_sdf_2d(profile, &Vector2::new(rho, p.z));
    let (cx, cy) = if rho > 0.0 { (p.x / rho, p.y / rho) } else { (1.0, 0.0) };
    (value, Vector3::new(g.x * cx, g.x * cy, g.y))
}

/// Whether [`collide`] handles this pair (in either order).
pub fn supports(a: &Shape, b: &Shape) -> bool {
    use Shape::*;
    matches!(
        (a, b),
        (Sphere { .. }, Sphere { .. })
            | (Sphere { .. }, HalfSpace { .. })
            | (HalfSpace { .. }, Sphere { .. })
            | (Cuboid { .. }, HalfSpace { .. })
            | (HalfSpace { .. }, Cuboid { .. })
            | (Sphere { .. }, Cuboid { .. })
            | (Cuboid { .. }, Sphere { .. })
            | (Sphere { .. }, Dish(_))
            | (Dish(_), Sphere { .. })
    )
}

/// Contact features between two posed shapes whose gap is below `margin`.
pub fn collide(a: &Shape, pose_a: &Isometry3<f64>, b: &Shape, pose_b: &Isometry3<f64>, margin: f64) -> Result<Vec<ContactGeometry>> {
    use Shape::*;
    let swap = |v: Vec<ContactGeometry>| v.into_iter().map(ContactGeometry::flipped).collect();
    Ok(match (a, b) {
        (Sphere { radius: ra }, Sphere { radius: rb }) => sphere_sphere(*ra, pose_a, *rb, pose_b, margin),
        (Sphere { radius }, HalfSpace { normal, offset }) => sphere_plane(*radius, pose_a, normal, *offset, pose_b, margin),
        (HalfSpace { normal, offset }, Sphere { radius }) => swap(sphere_plane(*radius, pose_b, normal, *offset, pose_a, margin)),
        (Cuboid { half_extents }, HalfSpace { normal, offset }) => box_plane(half_extents, pose_a, normal, *offset, pose_b, margin),
        (HalfSpace { normal, offset }, Cuboid { half_extents }) => swap(box_plane(half_extents, pose_b, normal, *offset, pose_a, margin)),
        (Sphere { radius }, Cuboid { half_extents }) => sphere_box(*radius, pose_a, half_extents, pose_b, margin),
        (Cuboid { half_extents }, Sphere { radius }) => swap(sphere_box(*radius, pose_b, half_extents, pose_a, margin)),
        (Sphere { radius }, Dish(p)) => sphere_dish(*radius, pose_a, p, pose_b, margin),
        (Dish(p), Sphere { radius }) => swap(sphere_dish(*radius, pose_b, p, pose_a, margin)),
        _ => return Err(Error::UnsupportedPair(a.name(), b.name())),
    })
}

fn sphere_sphere(ra: f64, pa: &Isometry3<f64>, rb: f64, pb: &Isometry3<f64>, margin: f64) -> Vec<ContactGeometry> {
    let (ca, cb) = (pa.translation.vector, pb.translation.vector);
    let d = ca - cb;
    let dist = d.norm();
    let gap = dist - ra - rb;
    if gap >= margin {
        return Vec::new();
    }
    let n = if dist > 0.0 { d / dist } else { Vector3::z() };
    vec![ContactGeometry::new(gap, cb + n * (rb + 0.5 * gap), n)]
}

fn plane_in_world(normal: &Vector3<f64>, offset: f64, pose: &Isometry3<f64>) -> (Vector3<f64>, f64) {
    let n = pose.rotation * normal;
    (n, offset + n.dot(&pose.translation.vector))
}

fn sphere_plane(r: f64, ps: &Isometry3<f64>, normal: &Vector3<f64>, offset: f64, pp: &Isometry3<f64>, margin: f64) -> Vec<ContactGeometry> {
    let (n, off) = plane_in_world(normal, offset, pp);
    let c = ps.translation.vector;
    let d = n.dot(&c) - off;
    let gap = d - r;
    if gap >= margin {
        return Vec::new();
    }
    vec![ContactGeometry::new(gap, c - n * (0.5 * (r + d)), n)]
}

fn box_plane(h: &Vector3<f64>, pbox: &Isometry3<f64>, normal: &Vector3<f64>, offset: f64, pp: &Isometry3<f64>, margin: f64) -> Vec<ContactGeometry> {
    let (n, off) = plane_in_world(normal, offset, pp);
    let mut out = Vec::new();
    for corner in 0..8 {
        let sx = if corner & 1 == 0 { -1.0 } else { 1.0 };
        let sy = if corner & 2 == 0 { -1.0 } else { 1.0 };
        let sz = if corner & 4 == 0 { -1.0 } else { 1.0 };
        let c = pbox * Point3::new(sx * h.x, sy * h.y, sz * h.z);
        let d = n.dot(&c.coords) - off;
        if d < margin {
            out.push(ContactGeometry::new(d, c.coords - n * (0.5 * d), n));
        }
    }
    out
}

fn sphere_box(r: f64, ps: &Isometry3<f64>, h: &Vector3<f64>, pbox: &Isometry3<f64>, margin: f64) -> Vec<ContactGeometry> {
    let c_local = pbox.inverse_transform_point(&Point3::from(ps.translation.vector)).coords;
    let clamped = Vector3::new(c_local.x.clamp(-h.x, h.x), c_local.y.clamp(-h.y, h.y), c_local.z.clamp(-h.z, h.z));
    let inside = clamped == c_local;
    let (gap, n_local, surface) = if inside {
        // Push out through the nearest face.
        let mut best = (f64::INFINITY, 0usize, 1.0);
        for axis in 0..3 {
            for s in [-1.0, 1.0] {
                let depth = h[axis] - s * c_local[axis];
                if depth < best.0 {
                    best = (depth, axis, s);
                }
            }
        }
        let (depth, axis, s) = best;
        let mut n = Vector3::zeros();
        n[axis] = s;
        let mut surf = c_local;
        surf[axis] = s * h[axis];
        (-depth - r, n, surf)
    } else {
        let diff = c_local - clamped;
        let dist = diff.norm();
        (dist - r, diff / dist, clamped)
    };
    if gap >= margin {
        return Vec::new();
    }
    let n = pbox.rotation * n_local;
    let surf = (pbox * Point3::from(surface)).coords;
    let sphere_pt = ps.translation.vector - n * r;
    vec![ContactGeometry::new(gap, 0.5 * (surf + sphere_pt), n)]
}

fn sphere_dish(r: f64, ps: &Isometry3<f64>, profile: &DishProfile, pd: &Isometry3<f64>, margin: f64) -> Vec<ContactGeometry> {
    let c = ps.translation.vector;
    let local = pd.inverse_transform_point(&Point3::from(c)).coords;
    let (value, grad) = dish_sdf(profile, &local);
    let gap = value - r;
    if gap >= margin {
        return Vec::new();
    }
    let n = (pd.rotation * grad).normalize();
    vec![ContactGeometry::new(gap, c - n * value, n)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Translation3, UnitQuaternion};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn at(x: f64, y: f64, z: f64) -> Isometry3<f64> {
        Isometry3::translation(x, y, z)
    }

    fn ground() -> Shape {
        Shape::HalfSpace { normal: Vector3::z(), offset: 0.0 }
    }

    fn bowl() -> DishProfile {
        DishProfile::new(Vector2::new(0.06, 0.0), Vector2::new(0.1, 0.05), 0.004).unwrap()
    }

    /// Brute-force 2D distance to the padded profile by dense segment sampling.
    fn brute_sdf(profile: &DishProfile, p: &Vector3<f64>) -> f64 {
        let q = Vector2::new((p.x * p.x + p.y * p.y).sqrt(), p.z);
        let mut best = f64::INFINITY;
        let n = 20_000;
        for (s, e) in [(Vector2::zeros(), profile.a), (profile.a, profile.b)] {
            for i in 0..=n {
                let pt = s + (e - s) * (i as f64 / n as f64);
                best = best.min((q - pt).norm());
            }
        }
        best - profile.thickness
    }

    #[test]
    fn separated_spheres_produce_nothing() {
        let s = Shape::Sphere { radius: 1.0 };
        assert!(collide(&s, &at(0.0, 0.0, 0.0), &s, &at(3.0, 0.0, 0.0), 0.1).unwrap().is_empty());
    }

    #[test]
    fn sphere_on_ground() {
        let s = Shape::Sphere { radius: 1.0 };
        let c = collide(&s, &at(0.3, -0.2, 0.9), &ground(), &Isometry3::identity(), DEFAULT_MARGIN).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].gap + 0.1).abs() < 1e-15);
        assert_eq!(c[0].normal, Vector3::z());
        // Midpoint between the sphere's lowest point (z=-0.1) and the plane.
        assert!((c[0].point - Vector3::new(0.3, -0.2, -0.05)).norm() < 1e-15);
    }

    #[test]
    fn resting_box_has_four_corners() {
        let b = Shape::Cuboid { half_extents: Vector3::new(0.5, 0.5, 0.5) };
        let c = collide(&b, &at(0.0, 0.0, 0.5), &ground(), &Isometry3::identity(), DEFAULT_MARGIN).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|f| f.gap.abs() < 1e-15 && f.point.z.abs() < 1e-15));
    }

    #[test]
    fn unsupported_pair_errors() {
        let b = Shape::Cuboid { half_extents: Vector3::new(0.5, 0.5, 0.5) };
        assert!(matches!(
            collide(&b, &at(0.0, 0.0, 0.0), &b, &at(0.5, 0.0, 0.0), 0.1),
            Err(Error::UnsupportedPair("box", "box"))
        ));
        assert!(!supports(&b, &b));
    }

    #[test]
    fn frame_examples() {
        assert_eq!(contact_frame(&Vector3::z()), Matrix3::identity());
        let r = contact_frame(&-Vector3::z());
        assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-14);
        assert_eq!(r.column(2), -Vector3::z());
    }

    #[test]
    fn random_frames_are_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let n = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if n.norm() < 1e-3 {
                continue;
            }
            let n = n.normalize();
            let r = contact_frame(&n);
            assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
            assert!((r.column(2) - n).norm() < 1e-15);
        }
    }

    #[test]
    fn dish_surface_point_is_zero() {
        let p = bowl();
        let ab = p.b - p.a;
        let mid = p.a + ab * 0.4;
        let outward = Vector2::new(ab.y, -ab.x).normalize();
        let q = mid + outward * p.thickness;
        let (v, _) = dish_sdf(&p, &Vector3::new(q.x * 0.6, q.x * 0.8, q.y));
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn dish_above_padded_tip() {
        // Collinear profile: straight above A, the nearest core point is A.
        let p = DishProfile::new(Vector2::new(1.0, 0.0), Vector2::new(1.5, 0.0), 0.02).unwrap();
        let x = Vector3::new(1.0, 0.0, p.thickness + 0.1);
        let (v, _) = dish_sdf(&p, &x);
        assert!((v - 0.1).abs() < 1e-12);
        assert!((brute_sdf(&p, &x) - 0.1).abs() < 1e-6);
    }

    #[test]
    fn dish_matches_brute_force() {
        let p = bowl();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let x = Vector3::new(rng.random_range(-0.15..0.15), rng.random_range(-0.15..0.15), rng.random_range(-0.05..0.1));
            let (v, _) = dish_sdf(&p, &x);
            assert!((v - brute_sdf(&p, &x)).abs() < 1e-5);
        }
    }

    #[test]
    fn dish_gradient_on_axis_uses_x() {
        let p = bowl();
        let (_, g) = dish_sdf(&p, &Vector3::new(0.0, 0.0, 0.03));
        assert_eq!(g.y, 0.0);
        assert!((g.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_in_bowl_touches_inner_wall() {
        let p = bowl();
        let s = Shape::Sphere { radius: 0.01 };
        let c = collide(&s, &at(0.0, 0.0, 0.0141), &Shape::Dish(p), &Isometry3::identity(), DEFAULT_MARGIN).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].normal - Vector3::z()).norm() < 1e-12);
        assert!((c[0].gap - 0.0001).abs() < 1e-12);
        // Contact point on the dish surface.
        assert!((c[0].point.z - p.thickness).abs() < 1e-12);
    }

    #[test]
    fn swapping_flips_normal_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let shapes = [
            Shape::Sphere { radius: 0.3 },
            Shape::Cuboid { half_extents: Vector3::new(0.4, 0.3, 0.2) },
            Shape::Dish(bowl()),
            ground(),
        ];
        for _ in 0..500 {
            let i = rng.random_range(0..shapes.len());
            let j = rng.random_range(0..shapes.len());
            if !supports(&shapes[i], &shapes[j]) {
                continue;
            }
            let pose = |rng: &mut ChaCha8Rng| {
                Isometry3::from_parts(
                    Translation3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)),
                    UnitQuaternion::from_euler_angles(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                )
            };
            let (pa, pb) = (pose(&mut rng), pose(&mut rng));
            let ab = collide(&shapes[i], &pa, &shapes[j], &pb, 10.0).unwrap();
            let ba = collide(&shapes[j], &pb, &shapes[i], &pa, 10.0).unwrap();
            assert_eq!(ab.len(), ba.len());
            for (x, y) in ab.iter().zip(&ba) {
                assert!((x.gap - y.gap).abs() < 1e-12);
                assert!((x.point - y.point).norm() < 1e-12);
                assert!((x.normal + y.normal).norm() < 1e-12);
                assert!((x.frame.transpose() * x.frame - Matrix3::identity()).norm() < 1e-12);
                assert!((x.frame.column(2) - x.normal).norm() < 1e-12);
            }
        }
    }
}
