//! Writes the built-in scenes as JSON into a directory (default `scenes/`).

use std::path::PathBuf;

use mcsim_core::scene::ScalingSpec;
use mcsim_core::scenes;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "scenes".into()));
    std::fs::create_dir_all(&dir)?;
    let mut scaling = scenes::sphere_grid(1, &ScalingSpec::default());
    scaling.name = "scaling".into();
    scaling.scaling = Some(ScalingSpec::default());
    let all = [
        ("sphere_stack", scenes::sphere_stack(4, 1.0)),
        ("mass_ratio_stack", scenes::sphere_stack(4, 50.0)),
        ("slab_on_spheres", scenes::slab_on_spheres()),
        ("resting_box", scenes::resting_box()),
        ("dish_on_plate", scenes::dish_on_plate()),
        ("particle_pour", scenes::particle_pour(32, 7)),
        ("free_fall", scenes::free_fall(1.0)),
        ("scaling", scaling),
    ];
    for (name, mut scene) in all {
        scene.name = name.into();
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, scene.to_json())?;
        println!("{}", path.display());
    }
    Ok(())
}
