//! Randomized invariants of the geometry and potentials.

use approx::assert_relative_eq;
use nalgebra::{dvector, DMatrix};
use proptest::prelude::*;
use stochnav::geometry::{EggAxis, EggObstacle, EllipseObstacle, Obstacle, QuadraticObjective, SphereObstacle, WorkspaceSphere, World, WorldSpec};
use stochnav::numeric::fd_gradient;
use stochnav::potentials::{Potential, PotentialSpec};
use stochnav::Point;

fn world() -> World {
    let s = |x: f64, y: f64, r: f64| Obstacle::Sphere(SphereObstacle::new(dvector![x, y], r).unwrap());
    let e = EllipseObstacle::new(dvector![-6.0, -6.0], DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]), 2.0).unwrap();
    let g = EggObstacle::new(dvector![6.0, -9.0], 1.5, EggAxis::Vertical).unwrap();
    World::new(
        WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
        vec![s(6.0, 6.0, 2.5), s(-6.0, 6.0, 3.0), Obstacle::Ellipse(e), Obstacle::Egg(g)],
        QuadraticObjective::new(dvector![1.0, 2.0], DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.5]), 0.5).unwrap(),
    )
    .unwrap()
}

fn point() -> impl Strategy<Value = Point> {
    (0.0..19.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| dvector![r * t.cos(), r * t.sin()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn factor_gradients_match_differences(x in point()) {
        let w = world();
        for i in 0..w.factor_count() {
            let fd = fd_gradient(|p| w.factor_value(i, p), &x, 1e-5);
            let g = w.factor_gradient(i, &x);
            assert_relative_eq!(g, fd, epsilon = 1e-5 * (1.0 + g.norm()), max_relative = 1e-6);
        }
    }

    #[test]
    fn rk_value_lies_in_unit_interval(x in point(), k in 1.0..40.0f64) {
        let w = world();
        prop_assume!(w.in_free_interior(&x));
        let phi = PotentialSpec::rimon_koditschek(k).unwrap().value(&w, &x).unwrap();
        prop_assert!((0.0..=1.0).contains(&phi), "phi = {phi}");
    }

    #[test]
    fn descent_direction_is_scaled_gradient(x in point(), k in 1.0..20.0f64, lb in any::<bool>()) {
        let w = world();
        prop_assume!(w.in_free_interior(&x));
        let spec = if lb { PotentialSpec::log_barrier(k) } else { PotentialSpec::rimon_koditschek(k) }.unwrap();
        let d = spec.descent_direction(&w, &x);
        let g = spec.gradient(&w, &x).unwrap() * spec.descent_scale(&w, &x).unwrap();
        assert_relative_eq!(d, g, epsilon = 1e-9 * (1.0 + d.norm()), max_relative = 1e-8);
    }

    #[test]
    fn world_files_round_trip(x in point()) {
        let w = world();
        let text = serde_json::to_string(&WorldSpec::from_world(&w)).unwrap();
        let back = serde_json::from_str::<WorldSpec>(&text).unwrap().build().unwrap();
        assert_relative_eq!(back.beta(&x), w.beta(&x), max_relative = 1e-12);
        assert_relative_eq!(back.objective.value(&x), w.objective.value(&x), max_relative = 1e-12);
    }
}
