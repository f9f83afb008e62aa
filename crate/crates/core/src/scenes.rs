//! Programmatic scene builders shared by tests, benchmarks and the shipped
//! example files.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scene::{BodySpec, MaterialSpec, PoseSpec, SceneFile, ScalingSpec, ShapeSpec, SubsystemSpec};

/// One sphere dropped from rest without ground.
pub fn free_fall(height: f64) -> SceneFile {
    let ball = SubsystemSpec::free("ball", BodySpec::new("ball", 1.0, ShapeSpec::sphere(0.1)), [0.0, 0.0, height]);
    SceneFile::new("free_fall", vec![ball])
}

/// Spheres drifting and spinning without gravity or contact.
pub fn zero_gravity() -> SceneFile {
    let mut subs = Vec::new();
    for k in 0..3 {
        let mut s = SubsystemSpec::free(format!("s{k}"), BodySpec::new(format!("s{k}"), 1.0 + k as f64, ShapeSpec::sphere(0.1)), [k as f64, 0.0, 0.0]);
        s.v = Some(vec![0.3 * k as f64, -1.0, 2.0, 0.5, -0.2 * k as f64, 0.1]);
        subs.push(s);
    }
    let mut scene = SceneFile::new("zero_gravity", subs);
    scene.gravity = [0.0; 3];
    scene
}

/// Vertical column of touching spheres on the ground; masses alternate
/// between 1 kg and `ratio` kg from the bottom up.
pub fn sphere_stack(n: usize, ratio: f64) -> SceneFile {
    let r = 0.1;
    let mut subs = vec![SubsystemSpec::ground()];
    for k in 0..n {
        let m = if k % 2 == 0 { 1.0 } else { ratio };
        subs.push(SubsystemSpec::free(format!("s{k}"), BodySpec::new(format!("s{k}"), m, ShapeSpec::sphere(r)), [0.0, 0.0, r + 2.0 * r * k as f64]));
    }
    SceneFile::new("sphere_stack", subs)
}

/// A heavy slab resting on ten spheres (2 × 5 grid) on the ground: ten
/// sphere–ground and ten sphere–slab contacts.
pub fn slab_on_spheres() -> SceneFile {
    let r = 0.05;
    let pitch = 0.12;
    let mut subs = vec![SubsystemSpec::ground()];
    for ix in 0..5 {
        for iy in 0..2 {
            let x = (ix as f64 - 2.0) * pitch;
            let y = (iy as f64 - 0.5) * pitch;
            let name = format!("ball_{ix}_{iy}");
            subs.push(SubsystemSpec::free(name.clone(), BodySpec::new(name, 1.0, ShapeSpec::sphere(r)), [x, y, r]));
        }
    }
    let h = [0.3, 0.12, 0.05];
    subs.push(SubsystemSpec::free("slab", BodySpec::new("slab", 50.0, ShapeSpec::cuboid(h)), [0.0, 0.0, 2.0 * r + h[2]]));
    SceneFile::new("slab_on_spheres", subs)
}

/// A cube resting on the ground.
pub fn resting_box() -> SceneFile {
    let h = 0.1;
    let subs = vec![
        SubsystemSpec::ground(),
        SubsystemSpec::free("box", BodySpec::new("box", 1.0, ShapeSpec::cuboid([h; 3])), [0.0, 0.0, h]),
    ];
    SceneFile::new("resting_box", subs)
}

/// A rigid ring of sphere proxies (standing in for a small dish's rim)
/// settling into a fixed bowl.
pub fn dish_on_plate() -> SceneFile {
    let bowl = ShapeSpec::Dish { a: [0.12, 0.0], b: [0.2, 0.08], thickness: 0.005, pose: PoseSpec::default(), material: "default".into() };
    let mut plate = BodySpec::new("plate", 0.0, bowl);
    plate.joint = Some(crate::scene::JointSpec {
        kind: crate::multibody::JointKind::Fixed,
        parent: None,
        placement: PoseSpec::default(),
        axis: [0.0; 3],
    });
    let plate = SubsystemSpec { name: "plate".into(), bodies: vec![plate], self_collision: false, position: None, orientation: None, q: None, v: None };
    let ring_r = 0.06;
    let proxy_r = 0.01;
    let shapes = (0..8)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / 8.0;
            ShapeSpec::Sphere {
                radius: proxy_r,
                pose: PoseSpec { translation: [ring_r * a.cos(), ring_r * a.sin(), 0.0], rotation: [1.0, 0.0, 0.0, 0.0] },
                material: "default".into(),
            }
        })
        .collect();
    let mut dish = BodySpec::new("dish", 0.2, ShapeSpec::sphere(proxy_r));
    dish.shapes = shapes;
    let (m, r) = (0.2, ring_r);
    dish.inertia = Some(crate::scene::InertiaSpec::Diagonal([0.5 * m * r * r, 0.5 * m * r * r, m * r * r]));
    let dish = SubsystemSpec::free("dish", dish, [0.0, 0.0, 0.005 + proxy_r + 0.02]);
    let mut scene = SceneFile::new("dish_on_plate", vec![plate, dish]);
    scene.materials = vec![MaterialSpec { name: "default".into(), mu: 0.6 }];
    scene
}

/// Small spheres poured into a fixed bowl; positions jittered by a seeded
/// generator.
pub fn particle_pour(n: usize, seed: u64) -> SceneFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scene = dish_on_plate();
    scene.name = "particle_pour".into();
    scene.subsystems.truncate(1);
    let r = 0.01;
    for k in 0..n {
        let layer = k / 16;
        let slot = k % 16;
        let (gx, gy) = ((slot % 4) as f64 - 1.5, (slot / 4) as f64 - 1.5);
        let jitter = [rng.random_range(-0.002..0.002), rng.random_range(-0.002..0.002)];
        let pos = [gx * 0.025 + jitter[0], gy * 0.025 + jitter[1], 0.05 + 0.025 * layer as f64];
        scene.subsystems.push(SubsystemSpec::free(format!("p{k}"), BodySpec::new(format!("p{k}"), 0.01, ShapeSpec::sphere(r)), pos));
    }
    scene.theta = 0.0;
    scene
}

/// `n` spheres resting side by side on the ground in a square grid.
pub fn sphere_grid(n: usize, spec: &ScalingSpec) -> SceneFile {
    let side = (n as f64).sqrt().ceil() as usize;
    let mut subs = vec![SubsystemSpec::ground()];
    for k in 0..n {
        let (ix, iy) = ((k % side) as f64, (k / side) as f64);
        let name = format!("s{k}");
        subs.push(SubsystemSpec::free(name.clone(), BodySpec::new(name, spec.mass, ShapeSpec::sphere(spec.radius)), [ix * spec.spacing, iy * spec.spacing, spec.radius - 0.0005]));
    }
    let mut scene = SceneFile::new(format!("sphere_grid_{n}"), subs);
    scene.materials = vec![MaterialSpec { name: "default".into(), mu: spec.mu }];
    scene
}

/// One to three sphere columns on the ground with random masses, friction,
/// velocities and slight penetrations. Every contact Jacobian has full row
/// rank, so the contact problem has a unique solution.
pub fn random_small(rng: &mut ChaCha8Rng) -> SceneFile {
    let columns = rng.random_range(1..=3);
    let mut subs = vec![SubsystemSpec::ground()];
    for c in 0..columns {
        let height = rng.random_range(1..=2);
        let r = rng.random_range(0.05..0.15);
        let mut z = r - rng.random_range(0.0..0.002);
        for h in 0..height {
            let name = format!("c{c}_{h}");
            let mut s = SubsystemSpec::free(name.clone(), BodySpec::new(name, rng.random_range(0.2..5.0), ShapeSpec::sphere(r)), [c as f64, 0.0, z]);
            let mut v = vec![0.0; 6];
            for x in v.iter_mut() {
                *x = rng.random_range(-0.5..0.5);
            }
            v[5] = rng.random_range(-0.3..0.0);
            s.v = Some(v);
            subs.push(s);
            z += 2.0 * r - rng.random_range(0.0..0.002);
        }
    }
    let mut scene = SceneFile::new("random_small", subs);
    scene.materials = vec![MaterialSpec { name: "default".into(), mu: rng.random_range(0.1..1.0) }];
    scene
}
