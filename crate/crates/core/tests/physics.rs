//! Trajectory-level checks against analytic motion, plus randomized
//! invariants.

use mcsim_core::scene::MaterialSpec;
use mcsim_core::scenes;
use mcsim_core::sim::{self, SolverKind, SolverSettings};
use nalgebra::Vector3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn sliding_ball_decelerates_at_mu_g() {
    // A solid ball launched without spin slides with deceleration μg until
    // it reaches pure rolling at 5/7 of the launch speed.
    let (mu, v0, g) = (0.2, 2.0, 9.81);
    for kind in SolverKind::ALL {
        let mut scene = scenes::sphere_stack(1, 1.0);
        scene.subsystems[1].v = Some(vec![0.0, 0.0, 0.0, v0, 0.0, 0.0]);
        scene.materials = vec![MaterialSpec { name: "default".into(), mu }];
        let mut world = scene.build().unwrap();
        let settings = SolverSettings::new(kind).with_limits(5000, 1e-11);
        let steps = 60;
        for _ in 0..steps {
            world.step(&settings).unwrap();
        }
        let t = world.time;
        let vx = world.linear_momentum().x;
        let expected = v0 - mu * g * t;
        assert!(expected > 5.0 / 7.0 * v0, "still sliding at t = {t}");
        assert!((vx - expected).abs() < 1e-3, "{kind}: vx {vx} vs {expected}");
    }
}

#[test]
fn rolling_ball_ends_at_five_sevenths() {
    let (mu, v0) = (0.4, 1.0);
    let mut scene = scenes::sphere_stack(1, 1.0);
    scene.subsystems[1].v = Some(vec![0.0, 0.0, 0.0, v0, 0.0, 0.0]);
    scene.materials = vec![MaterialSpec { name: "default".into(), mu }];
    let mut world = scene.build().unwrap();
    let settings = SolverSettings::new(SolverKind::Canal);
    for _ in 0..240 {
        world.step(&settings).unwrap();
    }
    // With θ = 1/2 the end-of-step velocity alternates about the constrained
    // mid-step velocity; average two consecutive steps.
    let a = world.linear_momentum().x;
    world.step(&settings).unwrap();
    let b = world.linear_momentum().x;
    let vx = 0.5 * (a + b);
    assert!((vx - 5.0 / 7.0 * v0).abs() < 1e-8, "{vx}");
}

#[test]
fn box_at_rest_stays_put() {
    let mut world = scenes::resting_box().build().unwrap();
    let start = world.subsystems[1].q.clone();
    let settings = SolverSettings::new(SolverKind::Canal);
    for _ in 0..200 {
        world.step(&settings).unwrap();
    }
    assert!((&world.subsystems[1].q - &start).amax() < 1e-4);
    assert!(world.penetration() < 1e-3);
}

#[test]
fn dish_settles_into_the_bowl() {
    let mut world = scenes::dish_on_plate().build().unwrap();
    let settings = SolverSettings::new(SolverKind::Canal);
    for _ in 0..240 {
        world.step(&settings).unwrap();
    }
    let speed = world.subsystems[1].v.amax();
    assert!(speed < 1e-2, "{speed}");
    assert!(world.penetration() < 5e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn converged_impulses_lie_in_their_cones(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let problem = scenes::random_small(&mut rng).build().unwrap().assemble().unwrap();
        let (state, report) = sim::solve(&problem, None, &SolverSettings::new(SolverKind::Canal).with_limits(300, 1e-10)).unwrap();
        prop_assert!(report.converged);
        prop_assert!(report.metric < 1e-8, "metric {}", report.metric);
        for (c, l) in problem.constraints.iter().zip(&state.lambda) {
            if let Some(mu) = c.mu() {
                prop_assert!(l[2] >= -1e-12);
                prop_assert!((l[0] * l[0] + l[1] * l[1]).sqrt() <= mu * l[2] + 1e-10);
            }
        }
    }

    #[test]
    fn pgs_impulses_lie_in_their_cones_at_every_budget(seed in 0u64..10_000, sweeps in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let problem = scenes::random_small(&mut rng).build().unwrap().assemble().unwrap();
        let (state, _) = sim::solve(&problem, None, &SolverSettings::new(SolverKind::Pgs).with_limits(sweeps, 0.0)).unwrap();
        for (c, l) in problem.constraints.iter().zip(&state.lambda) {
            let mu = c.mu().unwrap();
            prop_assert!(l[2] >= 0.0);
            prop_assert!((l[0] * l[0] + l[1] * l[1]).sqrt() <= mu * l[2] * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn momentum_is_conserved_without_gravity(vx in -2.0f64..2.0, wz in -3.0f64..3.0) {
        let mut scene = scenes::zero_gravity();
        scene.subsystems[0].v = Some(vec![0.0, 0.0, wz, vx, 0.0, 0.0]);
        let mut world = scene.build().unwrap();
        let p0 = world.linear_momentum();
        let settings = SolverSettings::new(SolverKind::SubAdmm);
        for _ in 0..50 {
            world.step(&settings).unwrap();
        }
        prop_assert!((world.linear_momentum() - p0).norm() < 1e-10 * (1.0 + p0.norm()));
    }

    #[test]
    fn free_fall_matches_kinematics(h in 0.5f64..5.0, steps in 1usize..100) {
        let mut world = scenes::free_fall(h).build().unwrap();
        let settings = SolverSettings::new(SolverKind::Canal);
        for _ in 0..steps {
            world.step(&settings).unwrap();
        }
        let t = world.time;
        let v = world.linear_momentum();
        prop_assert!((v - Vector3::new(0.0, 0.0, -9.81 * t)).norm() < 1e-9);
    }
}
