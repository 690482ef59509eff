//! Load a world file, check its geometry and the curvature condition, and
//! list the critical points of the potential.
//!
//! cargo run --example validate_world -- [world.json] [k]

use std::path::PathBuf;

use stochnav::geometry::{load_world, validate_world};
use stochnav::potentials::{check_condition, default_seeds, find_critical_points, PotentialSpec};

fn main() -> stochnav::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/four_spheres.world.json"));
    let k: f64 = args.next().map_or(Ok(7.0), |s| s.parse()).expect("k must be a number");
    let world = load_world(&path)?;

    let geometry = validate_world(&world, 720);
    println!("geometry: passed {}, pair margin {:.3}", geometry.passed, geometry.min_pair_margin);

    let condition = check_condition(&world, 2000)?;
    println!("condition: passed {}, κ(Q) = {:.3}, largest admissible κ(Q) = {:.3}", condition.passed, condition.condition_number, condition.n_cond);
    for (i, o) in condition.obstacles.iter().enumerate() {
        println!("  obstacle {}: margin {:.4}", i + 1, o.margin);
    }

    let spec = PotentialSpec::rimon_koditschek(k)?;
    let report = find_critical_points(&world, &spec, &default_seeds(&world, 20));
    println!("critical points at k = {k}:");
    for p in &report.points {
        println!("  {:?} at ({:.4}, {:.4})", p.kind, p.point[0], p.point[1]);
    }
    println!("one minimum and one saddle per obstacle: {}", report.is_navigation_pattern(world.obstacles.len()));
    Ok(())
}
