//! Random world generators for the elliptical and egg-shaped settings.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::{
    validate_world, EggAxis, EggObstacle, EllipseObstacle, Obstacle, QuadraticObjective, WorkspaceSphere, World,
};
use crate::numeric::derive_seed;
use crate::potentials::check_condition;
use crate::Point;

/// Consecutive rejected draws before a generator gives up.
pub const MAX_REJECTIONS: usize = 1000;
const VALIDATION_SAMPLES: usize = 1000;
const CONDITION_SAMPLES: usize = 1000;

fn default_c0() -> Vec<f64> {
    vec![0.0, 0.0]
}

fn default_r0() -> f64 {
    20.0
}

fn default_l() -> f64 {
    6.0
}

fn default_delta() -> f64 {
    1.0
}

fn default_eig() -> (f64, f64) {
    (1.0, 2.0)
}

fn default_scale_fraction() -> (f64, f64) {
    (0.1, 0.2)
}

fn default_egg_count() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticalWorldParams {
    #[serde(default = "default_c0")]
    pub c0: Vec<f64>,
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_l")]
    pub l: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Range of the eigenvalues of each `Aᵢ`.
    #[serde(default = "default_eig")]
    pub eigenvalues: (f64, f64),
    /// Range of `rᵢ` as fractions of `r₀`.
    #[serde(default = "default_scale_fraction")]
    pub scale_fraction: (f64, f64),
    #[serde(default)]
    pub fmin: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for EllipticalWorldParams {
    fn default() -> Self {
        Self {
            c0: default_c0(),
            r0: default_r0(),
            l: default_l(),
            delta: default_delta(),
            eigenvalues: default_eig(),
            scale_fraction: default_scale_fraction(),
            fmin: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EggWorldParams {
    #[serde(default = "default_c0")]
    pub c0: Vec<f64>,
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_l")]
    pub l: f64,
    #[serde(default = "default_egg_count")]
    pub count: usize,
    #[serde(default = "default_scale_fraction")]
    pub scale_fraction: (f64, f64),
    #[serde(default)]
    pub fmin: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for EggWorldParams {
    fn default() -> Self {
        Self {
            c0: default_c0(),
            r0: default_r0(),
            l: default_l(),
            count: default_egg_count(),
            scale_fraction: default_scale_fraction(),
            fmin: 0.0,
            seed: 0,
        }
    }
}

fn check_common(c0: &[f64], r0: f64, frac: (f64, f64)) -> Result<()> {
    if c0.len() != 2 {
        return Err(NavError::Unsupported("world generators are planar".into()));
    }
    if !(r0 > 0.0) {
        return Err(NavError::InvalidParameter(format!("r0 = {r0} must be positive")));
    }
    if !(frac.0 > 0.0 && frac.0 <= frac.1) {
        return Err(NavError::InvalidParameter("scale fraction range must be positive and ordered".into()));
    }
    Ok(())
}

fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

fn rotated_diag(theta: f64, a: f64, b: f64) -> DMatrix<f64> {
    let r = rotation(theta);
    let m = &r * DMatrix::from_diagonal(&DVector::from_vec(vec![a, b])) * r.transpose();
    // exact symmetry for the constructor's check
    (&m + m.transpose()) * 0.5
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Places the objective: `Q` eigenvalues from `[1, N_cond + 1]`, redrawn
/// until their ratio is below `N_cond`. Returns `None` if the geometry
/// tolerates no conditioning (`N_cond ≤ 1`).
fn objective_for(
    rng: &mut ChaCha8Rng,
    workspace: &WorkspaceSphere,
    obstacles: &[Obstacle],
    xstar: Point,
    fmin: f64,
) -> Result<Option<World>> {
    let probe = World::new(workspace.clone(), obstacles.to_vec(), QuadraticObjective::isotropic(xstar.clone(), fmin)?)?;
    let report = check_condition(&probe, CONDITION_SAMPLES)?;
    let n_cond = report.n_cond;
    if !(n_cond > 1.0) {
        return Ok(None);
    }
    let hi = if n_cond.is_finite() { n_cond + 1.0 } else { 2.0 };
    for _ in 0..MAX_REJECTIONS {
        let a = uniform_in(rng, 1.0, hi);
        let b = uniform_in(rng, 1.0, hi);
        if a.max(b) / a.min(b) < n_cond {
            let q = rotated_diag(rng.random_range(0.0..PI), a, b);
            let world = World::new(workspace.clone(), obstacles.to_vec(), QuadraticObjective::new(xstar, q, fmin)?)?;
            if check_condition(&world, CONDITION_SAMPLES)?.passed {
                return Ok(Some(world));
            }
            return Ok(None);
        }
    }
    Ok(None)
}

/// Four ellipses, one per quadrant around `L(±1, ±1)`, and a goal drawn
/// from `[−r₀/2, r₀/2]²`; everything is redrawn until the world validates
/// and the validity condition can be met.
pub fn generate_elliptical_world(p: &EllipticalWorldParams) -> Result<World> {
    check_common(&p.c0, p.r0, p.scale_fraction)?;
    if !(p.delta > 0.0 && p.delta < p.l) {
        return Err(NavError::InvalidParameter("need 0 < delta < L".into()));
    }
    if !(p.eigenvalues.0 > 0.0 && p.eigenvalues.0 <= p.eigenvalues.1) {
        return Err(NavError::InvalidParameter("eigenvalue range must be positive and ordered".into()));
    }
    let c0 = DVector::from_vec(p.c0.clone());
    let workspace = WorkspaceSphere::new(c0.clone(), p.r0)?;
    for attempt in 0..MAX_REJECTIONS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[p.seed, 0xE11, attempt as u64]));
        let mut obstacles = Vec::with_capacity(4);
        for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
            let center = DVector::from_vec(vec![
                c0[0] + p.l * sx + uniform_in(&mut rng, -p.delta, p.delta),
                c0[1] + p.l * sy + uniform_in(&mut rng, -p.delta, p.delta),
            ]);
            let theta = rng.random_range(0.0..PI);
            let a = uniform_in(&mut rng, p.eigenvalues.0, p.eigenvalues.1);
            let b = uniform_in(&mut rng, p.eigenvalues.0, p.eigenvalues.1);
            let r = p.r0 * uniform_in(&mut rng, p.scale_fraction.0, p.scale_fraction.1);
            obstacles.push(Obstacle::Ellipse(EllipseObstacle::new(center, rotated_diag(theta, a, b), r)?));
        }
        let h = p.r0 / 2.0;
        let xstar = DVector::from_vec(vec![c0[0] + uniform_in(&mut rng, -h, h), c0[1] + uniform_in(&mut rng, -h, h)]);
        if let Some(world) = accept(&mut rng, &workspace, obstacles, xstar, p.fmin)? {
            return Ok(world);
        }
    }
    Err(NavError::Infeasible(MAX_REJECTIONS))
}

/// Cheap rejection: some sampled boundary point of one obstacle lies inside another.
fn plainly_overlapping(obstacles: &[Obstacle]) -> bool {
    let boundaries: Vec<Vec<Point>> = obstacles.iter().map(|o| o.boundary_points(360)).collect();
    (0..obstacles.len()).any(|i| {
        (0..obstacles.len()).any(|j| i != j && boundaries[i].iter().any(|p| obstacles[j].value(p) <= 0.0))
    })
}

fn accept(
    rng: &mut ChaCha8Rng,
    workspace: &WorkspaceSphere,
    obstacles: Vec<Obstacle>,
    xstar: Point,
    fmin: f64,
) -> Result<Option<World>> {
    if plainly_overlapping(&obstacles) {
        return Ok(None);
    }
    let probe = World::new(workspace.clone(), obstacles.clone(), QuadraticObjective::isotropic(xstar.clone(), fmin)?)?;
    if !probe.in_free_interior(&xstar) || !validate_world(&probe, VALIDATION_SAMPLES).passed {
        return Ok(None);
    }
    objective_for(rng, workspace, &obstacles, xstar, fmin)
}

/// Eggs with tips uniform in `[−L/2, L/2]²`, each horizontal or vertical
/// with equal probability; objective as for the elliptical world.
pub fn generate_egg_world(p: &EggWorldParams) -> Result<World> {
    check_common(&p.c0, p.r0, p.scale_fraction)?;
    if !(p.l > 0.0) {
        return Err(NavError::InvalidParameter("L must be positive".into()));
    }
    let c0 = DVector::from_vec(p.c0.clone());
    let workspace = WorkspaceSphere::new(c0.clone(), p.r0)?;
    let h = p.l / 2.0;
    for attempt in 0..MAX_REJECTIONS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[p.seed, 0xE66, attempt as u64]));
        let mut obstacles = Vec::with_capacity(p.count);
        for _ in 0..p.count {
            let tip = DVector::from_vec(vec![c0[0] + uniform_in(&mut rng, -h, h), c0[1] + uniform_in(&mut rng, -h, h)]);
            let r = p.r0 * uniform_in(&mut rng, p.scale_fraction.0, p.scale_fraction.1);
            let axis = if rng.random_bool(0.5) { EggAxis::Horizontal } else { EggAxis::Vertical };
            obstacles.push(Obstacle::Egg(EggObstacle::new(tip, r, axis)?));
        }
        let hx = p.r0 / 2.0;
        let xstar =
            DVector::from_vec(vec![c0[0] + uniform_in(&mut rng, -hx, hx), c0[1] + uniform_in(&mut rng, -hx, hx)]);
        if let Some(world) = accept(&mut rng, &workspace, obstacles, xstar, p.fmin)? {
            return Ok(world);
        }
    }
    Err(NavError::Infeasible(MAX_REJECTIONS))
}
