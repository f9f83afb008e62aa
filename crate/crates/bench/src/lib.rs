//! Shared fixtures for the criterion benchmarks.

use mcsim_core::scene::ScalingSpec;
use mcsim_core::sim::{SolverKind, SolverSettings};
use mcsim_core::{scenes, ContactProblem};

/// Named contact problems assembled from the first step of built-in scenes.
pub fn fixtures() -> Vec<(&'static str, ContactProblem)> {
    let assemble = |scene: mcsim_core::SceneFile| scene.build().and_then(|w| w.assemble()).expect("fixture scene");
    let spec = ScalingSpec::default();
    vec![
        ("stack4", assemble(scenes::sphere_stack(4, 1.0))),
        ("stack4_ratio50", assemble(scenes::sphere_stack(4, 50.0))),
        ("slab20", assemble(scenes::slab_on_spheres())),
        ("grid16", assemble(scenes::sphere_grid(16, &spec))),
        ("grid64", assemble(scenes::sphere_grid(64, &spec))),
    ]
}

/// Cold-start settings used by every benchmark.
pub fn settings(kind: SolverKind) -> SolverSettings {
    let mut s = SolverSettings::new(kind);
    s.warm_start = false;
    s
}
