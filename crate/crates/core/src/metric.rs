//! Solver-agnostic accuracy measure.

use nalgebra::DVector;

use crate::assembly::ContactProblem;

/// Per-constraint residual `λ_i − T_i(λ_i − J_i v̂ − e_i)` with
/// `v̂ = A⁻¹(b + Jᵀλ)` and `T_i` the strict or closed-form operator at unit
/// penalty. Zero exactly when every constraint law holds.
pub fn constraint_residuals(problem: &ContactProblem, lambda: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let vhat = problem.velocity_from_impulse(lambda);
    problem
        .constraints
        .iter()
        .zip(lambda)
        .map(|(c, l)| {
            let w = c.velocity(&vhat);
            l - c.kind.unit_operator(l, &w, &c.e)
        })
        .collect()
}

/// `‖Jv̂ − z‖` over all constraints divided by the number of contacts (not
/// divided when there are none).
pub fn contact_residual_metric(problem: &ContactProblem, lambda: &[DVector<f64>]) -> f64 {
    let norm = constraint_residuals(problem, lambda).iter().map(|r| r.norm_squared()).sum::<f64>().sqrt();
    let contacts = problem.contact_count();
    if contacts == 0 {
        norm
    } else {
        norm / contacts as f64
    }
}
