//! Empirical constants: the estimate bound `B` and outward-pointing radii `γᵢ`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::World;
use crate::numeric::derive_seed;
use crate::potentials::PotentialSpec;
use crate::sensors::{estimate, SensorRig};
use crate::Point;

/// Smallest outward-pointing radius reported.
pub const GAMMA_FLOOR: f64 = 1e-3;

/// Uniform point of the workspace ball with at least `clearance` to `∂F`.
pub fn sample_free_point<R: Rng + ?Sized>(world: &World, rng: &mut R, clearance: f64) -> Option<Point> {
    let n = world.dim();
    let r = world.workspace.radius;
    for _ in 0..100_000 {
        let p = Point::from_iterator(n, (0..n).map(|_| rng.random_range(-r..r)));
        if p.norm() >= r {
            continue;
        }
        let x = &world.workspace.center + p;
        if world.in_free_interior(&x) && world.clearance(&x) >= clearance {
            return Some(x);
        }
    }
    None
}

/// Twice the largest `‖ĝ‖` seen over `samples` free-space points.
pub fn estimate_bound(world: &World, rig: &SensorRig, spec: &PotentialSpec, samples: usize, seed: u64) -> Result<f64> {
    let rig = rig.with_bound(f64::INFINITY).with_seed(derive_seed(&[seed, 0xB0]));
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut max = 0.0f64;
    for t in 0..samples {
        let Some(x) = sample_free_point(world, &mut rng, 0.0) else { break };
        let g = estimate(world, &rig, spec, &x, t as u64)?;
        max = max.max(g.raw_norm);
    }
    Ok(2.0 * max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    /// Per-obstacle radius (zero-based obstacle index).
    pub gamma: Vec<f64>,
    pub ladder: Vec<f64>,
}

impl GammaReport {
    pub fn min(&self) -> f64 {
        self.gamma.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Largest probe distance below which `−ĝᵀ∇βᵢ > 0` held for every probe and
/// draw, searched over a geometric ladder from the sensing range down to
/// [`GAMMA_FLOOR`].
pub fn estimate_gamma(
    world: &World,
    rig: &SensorRig,
    spec: &PotentialSpec,
    probes: usize,
    draws: usize,
    rungs: usize,
) -> Result<GammaReport> {
    let rungs = rungs.max(2);
    let ratio = (GAMMA_FLOOR / rig.range).powf(1.0 / (rungs - 1) as f64);
    let ladder: Vec<f64> = (0..rungs).map(|j| rig.range * ratio.powi(j as i32)).collect();
    let mut gamma = Vec::with_capacity(world.obstacles.len());
    for (j, o) in world.obstacles.iter().enumerate() {
        let boundary = o.boundary_points(probes);
        let mut best = GAMMA_FLOOR;
        // ascending so the first failure stops the search
        for &delta in ladder.iter().rev() {
            let mut ok = true;
            'probe: for (pi, p) in boundary.iter().enumerate() {
                let grad = o.gradient(p);
                let gn = grad.norm();
                if gn == 0.0 {
                    continue;
                }
                let x = p + &grad * (delta / gn);
                if !world.in_free_interior(&x) {
                    continue;
                }
                let gi = o.gradient(&x);
                let probe_rig = rig.with_seed(derive_seed(&[rig.seed, j as u64, pi as u64, delta.to_bits()]));
                for t in 0..draws {
                    let g = estimate(world, &probe_rig, spec, &x, t as u64)?;
                    if !(-g.direction.dot(&gi) > 0.0) {
                        ok = false;
                        break 'probe;
                    }
                }
            }
            if !ok {
                break;
            }
            best = delta;
        }
        gamma.push(best);
    }
    Ok(GammaReport { gamma, ladder })
}
