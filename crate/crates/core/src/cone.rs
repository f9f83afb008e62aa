//! Closed-form constraint operators.
//!
//! Contact quantities are 3-vectors ordered `(t1, t2, n)`: two tangential
//! components followed by the normal one. The friction cone is
//! `C = { λ : ‖λ_t‖ ≤ μ λ_n }`.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};

/// Relative distance to a branch boundary below which the derivative of the
/// proximal operator is reported as taken at a nonsmooth point.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Candidate impulse for a contact projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeInput {
    pub lambda_star: Vector3<f64>,
    pub mu: f64,
}

impl ConeInput {
    pub fn new(lambda_star: Vector3<f64>, mu: f64) -> Self {
        debug_assert!(mu.is_finite() && mu >= 0.0, "friction coefficient must be finite and non-negative");
        Self { lambda_star, mu }
    }

    #[inline]
    fn tangential(&self) -> Vector2<f64> {
        Vector2::new(self.lambda_star.x, self.lambda_star.y)
    }

    #[inline]
    fn normal(&self) -> f64 {
        self.lambda_star.z
    }
}

/// Which smooth piece of a cone projection an input falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContactCase {
    Open,
    Stick,
    Slip,
}

#[inline]
pub fn project_positive(x: f64) -> f64 {
    x.max(0.0)
}

/// Nested projection: clamp the normal component, then project the tangential
/// part onto the disk of radius `μ λ_n`. The resulting pair `(λ, (λ-λ*)/β)`
/// satisfies the Signorini-Coulomb conditions exactly.
pub fn project_cone_strict(input: ConeInput) -> Vector3<f64> {
    let n = project_positive(input.normal());
    if input.mu == 0.0 || n == 0.0 {
        return Vector3::new(0.0, 0.0, n);
    }
    let t = input.tangential();
    let radius = input.mu * n;
    let norm = t.norm();
    if norm <= radius {
        Vector3::new(t.x, t.y, n)
    } else {
        let s = radius / norm;
        Vector3::new(t.x * s, t.y * s, n)
    }
}

/// Classify an input for the proximal (closest-point) projection.
pub fn prox_case(input: ConeInput) -> ContactCase {
    let (t, n, mu) = (input.tangential().norm(), input.normal(), input.mu);
    if mu == 0.0 {
        return if n > 0.0 { ContactCase::Stick } else { ContactCase::Open };
    }
    if t <= mu * n {
        ContactCase::Stick
    } else if mu * t + n <= 0.0 {
        ContactCase::Open
    } else {
        ContactCase::Slip
    }
}

/// Euclidean projection onto the friction cone.
pub fn project_cone_prox(input: ConeInput) -> Vector3<f64> {
    let mu = input.mu;
    if mu == 0.0 {
        return Vector3::new(0.0, 0.0, project_positive(input.normal()));
    }
    let t = input.tangential();
    let tn = t.norm();
    let n = input.normal();
    if tn <= mu * n {
        return input.lambda_star;
    }
    if mu * tn + n <= 0.0 {
        return Vector3::zeros();
    }
    let s = (mu * tn + n) / (mu * mu + 1.0);
    let dir = t / tn;
    Vector3::new(mu * s * dir.x, mu * s * dir.y, s)
}

fn slip_block(input: ConeInput) -> Matrix3<f64> {
    let mu = input.mu;
    let t = input.tangential();
    let tn = t.norm();
    let dir = t / tn;
    let proj = Matrix2::identity() - dir * dir.transpose();
    let tt = Matrix2::identity() * (mu * mu) + proj * (mu * input.normal() / tn);
    let inv = 1.0 / (mu * mu + 1.0);
    Matrix3::new(
        tt[(0, 0)],
        tt[(0, 1)],
        mu * dir.x,
        tt[(1, 0)],
        tt[(1, 1)],
        mu * dir.y,
        mu * dir.x,
        mu * dir.y,
        1.0,
    ) * inv
}

/// Jacobian of [`project_cone_prox`], resolving branch boundaries toward the
/// larger derivative: the stick side of the stick/slip boundary and the slip
/// side of the slip/open boundary.
pub fn prox_derivative_resolved(input: ConeInput) -> Matrix3<f64> {
    if input.mu == 0.0 {
        let d = if input.normal() >= 0.0 { 1.0 } else { 0.0 };
        return Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, d));
    }
    let (t, n, mu) = (input.tangential().norm(), input.normal(), input.mu);
    if t <= mu * n {
        Matrix3::identity()
    } else if mu * t + n < 0.0 {
        Matrix3::zeros()
    } else {
        slip_block(input)
    }
}

/// Jacobian of [`project_cone_prox`]; errors at nonsmooth points so the caller
/// can pick an adjacent branch explicitly.
pub fn prox_derivative(input: ConeInput) -> Result<Matrix3<f64>> {
    let (t, n, mu) = (input.tangential().norm(), input.normal(), input.mu);
    let scale = input.lambda_star.norm().max(f64::MIN_POSITIVE);
    let near = |gap: f64| gap.abs() <= BOUNDARY_TOL * scale;
    let at_boundary = if mu == 0.0 {
        near(n)
    } else {
        near(t - mu * n) || near(mu * t + n)
    };
    if at_boundary {
        return Err(Error::NonsmoothPoint { lambda_star: input.lambda_star.into(), mu });
    }
    Ok(prox_derivative_resolved(input))
}

/// Hard constraint impulse `max(-βJv - u - βe, 0)`.
#[inline]
pub fn closed_form_hard(jv: f64, u: f64, e: f64, beta: f64) -> f64 {
    project_positive(-beta * jv - u - beta * e)
}

/// Soft constraint impulse `-(b(βJv + u) + βke)/(b + β)`.
#[inline]
pub fn closed_form_soft(jv: f64, u: f64, e: f64, k: f64, b: f64, beta: f64) -> f64 {
    -(b * (beta * jv + u) + beta * k * e) / (b + beta)
}

/// Outcome of checking a velocity/impulse pair against the Signorini-Coulomb
/// conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SccCheck {
    pub case: ContactCase,
    /// Slip rate that best satisfies the maximal-dissipation condition.
    pub delta: f64,
    /// `[normal complementarity, cone complementarity, max dissipation]`.
    pub violations: [f64; 3],
}

impl SccCheck {
    pub fn max_violation(&self) -> f64 {
        self.violations.iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluates the three Signorini-Coulomb conditions for constraint velocity
/// `w = Jv + e` and impulse `lambda`.
///
/// Complementarity residuals use `|min(a, b)|`, which vanishes iff
/// `a, b ≥ 0` and `ab = 0`.
pub fn check_scc(w: &Vector3<f64>, lambda: &Vector3<f64>, mu: f64, tol: f64) -> SccCheck {
    let wt = Vector2::new(w.x, w.y);
    let lt = Vector2::new(lambda.x, lambda.y);
    let ln = lambda.z;
    let lt_sq = lt.norm_squared();
    let delta = if lt_sq > 0.0 {
        (-mu * ln * wt.dot(&lt) / lt_sq).max(0.0)
    } else {
        // No tangential impulse: maximal dissipation forces wt = 0 unless the
        // contact is open; the best δ is the slip speed itself.
        if mu * ln > 0.0 { 0.0 } else { wt.norm() }
    };
    let normal = ln.min(w.z).abs();
    let cone = delta.min(mu * ln - lt.norm()).abs();
    let dissipation = (lt * delta + wt * (mu * ln)).norm();
    let case = if ln <= tol {
        ContactCase::Open
    } else if delta > tol {
        ContactCase::Slip
    } else {
        ContactCase::Stick
    };
    SccCheck { case, delta, violations: [normal, cone, dissipation] }
}
