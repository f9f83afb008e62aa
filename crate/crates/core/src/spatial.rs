//! Spatial-vector helpers.
//!
//! Six-vectors are stored angular-above-linear. Unless stated otherwise all
//! spatial quantities are expressed in world coordinates about the world
//! origin, so composite inertias are plain sums and need no transforms.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

/// Cross-product matrix: `skew(a) * b == a.cross(&b)`.
#[inline]
pub fn skew(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

#[inline]
pub fn angular(v: &Vector6<f64>) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

#[inline]
pub fn linear(v: &Vector6<f64>) -> Vector3<f64> {
    Vector3::new(v[3], v[4], v[5])
}

#[inline]
pub fn stack(ang: &Vector3<f64>, lin: &Vector3<f64>) -> Vector6<f64> {
    Vector6::new(ang.x, ang.y, ang.z, lin.x, lin.y, lin.z)
}

/// Motion cross product `a ×ₘ b`.
pub fn cross_motion(a: &Vector6<f64>, b: &Vector6<f64>) -> Vector6<f64> {
    let (w, v) = (angular(a), linear(a));
    let (w2, v2) = (angular(b), linear(b));
    stack(&w.cross(&w2), &(w.cross(&v2) + v.cross(&w2)))
}

/// Force cross product `a ×* f`.
pub fn cross_force(a: &Vector6<f64>, f: &Vector6<f64>) -> Vector6<f64> {
    let (w, v) = (angular(a), linear(a));
    let (n, f) = (angular(f), linear(f));
    stack(&(w.cross(&n) + v.cross(&f)), &w.cross(&f))
}

/// Linear velocity of world point `p` for a twist expressed about the origin.
#[inline]
pub fn point_velocity(twist: &Vector6<f64>, p: &Vector3<f64>) -> Vector3<f64> {
    linear(twist) + angular(twist).cross(p)
}

/// The 3×6 map `[-[p]  I]` from an origin twist to the velocity of point `p`.
pub fn point_map(p: &Vector3<f64>) -> nalgebra::SMatrix<f64, 3, 6> {
    let mut m = nalgebra::SMatrix::<f64, 3, 6>::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-skew(p)));
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&Matrix3::identity());
    m
}

/// Rigid-body spatial inertia about the world origin in its ten-scalar form:
/// mass, first moment `m·c` and the rotational inertia about the origin.
///
/// The same layout also holds the effective body matrix `M + Σ β JᵀJ` of a
/// body carrying full three-row point constraints, since each such term is a
/// point mass of weight `β` at the contact point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialInertia {
    pub mass: f64,
    pub first_moment: Vector3<f64>,
    pub rotational: Matrix3<f64>,
}

impl SpatialInertia {
    pub fn zero() -> Self {
        Self { mass: 0.0, first_moment: Vector3::zeros(), rotational: Matrix3::zeros() }
    }

    /// Inertia of a body with mass `mass`, COM `com` (world) and central
    /// rotational inertia `inertia_com` (world-aligned).
    pub fn from_body(mass: f64, com: &Vector3<f64>, inertia_com: &Matrix3<f64>) -> Self {
        let c = skew(com);
        Self {
            mass,
            first_moment: com * mass,
            rotational: inertia_com - c * c * mass,
        }
    }

    /// A point mass of weight `w` at world point `p`.
    pub fn point(w: f64, p: &Vector3<f64>) -> Self {
        let s = skew(p);
        Self { mass: w, first_moment: p * w, rotational: -(s * s) * w }
    }

    pub fn add(&mut self, other: &SpatialInertia) {
        self.mass += other.mass;
        self.first_moment += other.first_moment;
        self.rotational += other.rotational;
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mass: self.mass * s,
            first_moment: self.first_moment * s,
            rotational: self.rotational * s,
        }
    }

    pub fn to_matrix(&self) -> Matrix6<f64> {
        let h = skew(&self.first_moment);
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotational);
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&h);
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&h.transpose());
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&(Matrix3::identity() * self.mass));
        m
    }

    pub fn mul_motion(&self, v: &Vector6<f64>) -> Vector6<f64> {
        let (w, lin) = (angular(v), linear(v));
        stack(
            &(self.rotational * w + self.first_moment.cross(&lin)),
            &(lin * self.mass - self.first_moment.cross(&w)),
        )
    }

    /// The ten independent scalars: mass, first moment, upper triangle of the
    /// rotational block.
    pub fn to_array(&self) -> [f64; 10] {
        let r = &self.rotational;
        [
            self.mass,
            self.first_moment.x,
            self.first_moment.y,
            self.first_moment.z,
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 2)],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_matches_cross() {
        let a = Vector3::new(0.3, -1.2, 2.0);
        let b = Vector3::new(-0.7, 0.4, 1.1);
        assert!((skew(&a) * b - a.cross(&b)).norm() < 1e-15);
    }

    #[test]
    fn inertia_matrix_applies_like_mul_motion() {
        let si = SpatialInertia::from_body(
            2.0,
            &Vector3::new(0.1, 0.2, -0.3),
            &Matrix3::from_diagonal(&Vector3::new(0.5, 0.6, 0.7)),
        );
        let v = Vector6::new(0.1, -0.2, 0.3, 1.0, 2.0, -1.0);
        assert!((si.to_matrix() * v - si.mul_motion(&v)).norm() < 1e-14);
        let m = si.to_matrix();
        assert!((m - m.transpose()).norm() < 1e-15);
    }

    #[test]
    fn point_mass_equals_point_map_gram() {
        let p = Vector3::new(1.0, -0.5, 0.25);
        let j = point_map(&p);
        let dense = j.transpose() * j * 3.0;
        assert!((SpatialInertia::point(3.0, &p).to_matrix() - dense).norm() < 1e-14);
    }
}
