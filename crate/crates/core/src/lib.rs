//! Multibody frictional-contact dynamics with augmented-Lagrangian solvers.
//!
//! Three solvers share one problem description ([`assembly::ContactProblem`]):
//!
//! * [`solver::canal`]: cascaded Newton augmented Lagrangian. Each outer
//!   iteration solves a strongly convex surrogate with exact Newton steps and
//!   an exact line search, then updates the friction perturbation, the
//!   multipliers and the penalty.
//! * [`solver::subadmm`]: subsystem-split ADMM. Velocity updates are
//!   independent per kinematic tree, impulse updates independent per
//!   constraint.
//! * [`solver::pgs`]: projected Gauss-Seidel over the Delassus operator, kept
//!   as a baseline.
//!
//! [`sim`] drives collision, assembly, solve and integration;
//! [`harness`] produces the CSV benchmarks.

pub mod assembly;
pub mod collision;
pub mod cone;
pub mod crba;
mod error;
pub mod harness;
pub mod metric;
pub mod multibody;
pub mod scene;
pub mod scenes;
pub mod sim;
pub mod solver;
pub mod spatial;

pub use assembly::{ConstraintKind, ConstraintSpec, ContactProblem};
pub use cone::{check_scc, project_cone_prox, project_cone_strict, ConeInput, ContactCase};
pub use error::{Error, Result};
pub use metric::contact_residual_metric;
pub use multibody::{Body, Joint, JointKind, Subsystem};
pub use scene::SceneFile;
pub use sim::{SolverKind, World};
pub use solver::{ResidualReport, SolveControl, SolverState};
