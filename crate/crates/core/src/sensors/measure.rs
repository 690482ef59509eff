//! Ground-truth local quantities and their noisy readings.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{NavError, Result};
use crate::geometry::{Projection, World};
use crate::numeric::{derive_seed, sym_eigen};
use crate::sensors::{quantity, EstimatorKind, SensorRig};
use crate::Point;

/// Obstacles this many distance-noise deviations beyond the range are never read in range.
const CANDIDATE_SIGMAS: f64 = 6.0;

/// Smallest eigenvalue kept when projecting a perturbed ellipse matrix.
const PD_FLOOR: f64 = 1e-6;

/// Exact local information about one sensed obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleTruth {
    /// Factor index (`≥ 1`).
    pub index: usize,
    pub projection: Projection,
    /// Boundary curvature radius at the projection (circle fitting only).
    pub radius: f64,
    /// Normalised ellipse `(A, c, r)` with `λ_min(A) = 1` (ellipse fitting only).
    pub ellipse: Option<(DMatrix<f64>, Point, f64)>,
    /// Noise-free fitted obstacle function at `x`.
    pub model_value: f64,
}

/// Everything a noisy reading is drawn around.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTruth {
    pub x: Point,
    pub f0: f64,
    pub grad_f0: DVector<f64>,
    /// Factor indices that may be read in range; always starts with `0`.
    pub candidates: Vec<usize>,
    pub obstacles: Vec<ObstacleTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipseReading {
    pub center: Point,
    pub matrix: DMatrix<f64>,
    pub radius: f64,
    /// The perturbed matrix needed the positive-definite projection.
    pub projected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reading {
    pub index: usize,
    pub true_distance: f64,
    /// Noise-free value of the fitted obstacle function at `x`.
    pub model_value: f64,
    pub distance: f64,
    pub radius: f64,
    pub normal: DVector<f64>,
    pub ellipse: Option<EllipseReading>,
    /// A negative distance or radius draw was clamped to zero.
    pub clamped: bool,
}

/// One noisy snapshot at step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurements {
    pub x: Point,
    pub t: u64,
    pub f0: f64,
    pub grad_f0: DVector<f64>,
    /// Factors in the awareness set: the workspace and every obstacle read within range.
    pub awareness: Vec<usize>,
    pub readings: Vec<Reading>,
    /// Deterministic gain applied to the combined estimate.
    pub gain: f64,
}

impl Measurements {
    pub fn clamp_count(&self) -> usize {
        self.readings.iter().filter(|r| r.clamped).count()
    }
}

/// `{0} ∪ {i : dᵢ(x) ≤ c}` in factor indexing, from exact distances.
pub fn awareness_set(world: &World, rig: &SensorRig, x: &Point) -> Result<Vec<usize>> {
    let mut out = vec![0];
    for i in 1..world.factor_count() {
        let p = world.project(i, x)?;
        if p.distance <= rig.range {
            out.push(i);
        }
    }
    Ok(out)
}

/// Exact local quantities at `x` as needed by the rig's estimator.
pub fn sense(world: &World, rig: &SensorRig, x: &Point) -> Result<LocalTruth> {
    if let Some(i) = world.first_violation(x) {
        return Err(if i == 0 { NavError::OutsideFreeSpace } else { NavError::CollisionQuery { index: i } });
    }
    let mut candidates = vec![0];
    let mut obstacles = Vec::new();
    let candidate_range = rig.range + CANDIDATE_SIGMAS * rig.noise.distance_sigma(rig.range);
    if rig.estimator != EstimatorKind::ExactOracle {
        for i in 1..world.factor_count() {
            let projection = world.project(i, x)?;
            if projection.distance > candidate_range {
                continue;
            }
            candidates.push(i);
            let obstacle = &world.obstacles[i - 1];
            let (radius, ellipse) = match rig.estimator {
                EstimatorKind::CircleFit => (obstacle.boundary_curvature_radius(&projection.point)?, None),
                _ => {
                    let (a, c, level) = obstacle.fitted_ellipse();
                    let mu = crate::numeric::sym_eigenvalues(&a)[0];
                    (f64::NAN, Some((a / mu, c, (level / mu).sqrt())))
                }
            };
            let model_value = match &ellipse {
                Some((a, c, r)) => {
                    let u = x - c;
                    (u.dot(&(a * &u)) - r * r).max(0.0)
                }
                None => projection.distance * (projection.distance + 2.0 * radius),
            };
            obstacles.push(ObstacleTruth { index: i, projection, radius, ellipse, model_value });
        }
    } else {
        candidates.extend(1..world.factor_count());
    }
    Ok(LocalTruth {
        x: x.clone(),
        f0: world.objective.value(x),
        grad_f0: world.objective.gradient(x),
        candidates,
        obstacles,
    })
}

fn stream(rig: &SensorRig, t: u64, i: usize, q: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(&[rig.seed, t, i as u64, q]))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn noisy_vector(v: &DVector<f64>, sigma: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
    if sigma == 0.0 {
        return v.clone();
    }
    DVector::from_iterator(v.len(), v.iter().map(|&c| c + sigma * normal(rng)))
}

/// Noisy reading of a local truth at step `t`.
///
/// An obstacle joins the awareness set when its distance reading is within
/// range, so the set itself is random near the range boundary.
pub fn draw(truth: &LocalTruth, rig: &SensorRig, t: u64) -> Measurements {
    let noise = &rig.noise;
    let f0 = if noise.sigma_f0 > 0.0 {
        truth.f0 + noise.sigma_f0 * normal(&mut stream(rig, t, 0, quantity::F0))
    } else {
        truth.f0
    };
    let grad_f0 = noisy_vector(&truth.grad_f0, noise.sigma_grad_f0, &mut stream(rig, t, 0, quantity::GRAD_F0));
    let readings: Vec<Reading> = truth
        .obstacles
        .iter()
        .map(|o| read_obstacle(o, rig, t))
        .filter(|r| r.distance <= rig.range)
        .collect();
    let awareness = if rig.estimator == EstimatorKind::ExactOracle {
        truth.candidates.clone()
    } else {
        std::iter::once(0).chain(readings.iter().map(|r| r.index)).collect()
    };
    let gain = rig.gain(truth.grad_f0.norm());
    Measurements { x: truth.x.clone(), t, f0, grad_f0, awareness, readings, gain }
}

fn read_obstacle(o: &ObstacleTruth, rig: &SensorRig, t: u64) -> Reading {
    let d = o.projection.distance;
    let sigma = rig.noise.distance_sigma(d);
    let mut clamped = false;
    let mut distance = d;
    let mut normal_vec = o.projection.normal.clone();
    if sigma > 0.0 {
        distance = d + sigma * normal(&mut stream(rig, t, o.index, quantity::DISTANCE));
        if distance < 0.0 {
            distance = 0.0;
            clamped = true;
        }
        let noisy = noisy_vector(&normal_vec, sigma, &mut stream(rig, t, o.index, quantity::NORMAL));
        let len = noisy.norm();
        if len > 0.0 {
            normal_vec = noisy / len;
        }
    }
    let mut radius = o.radius;
    if sigma > 0.0 && radius.is_finite() {
        radius += sigma * normal(&mut stream(rig, t, o.index, quantity::RADIUS));
        if radius < 0.0 {
            radius = 0.0;
            clamped = true;
        }
    }
    let ellipse = o.ellipse.as_ref().map(|(a, c, r)| {
        if sigma == 0.0 {
            return EllipseReading { center: c.clone(), matrix: a.clone(), radius: *r, projected: false };
        }
        let center = noisy_vector(c, sigma, &mut stream(rig, t, o.index, quantity::ELLIPSE_CENTER));
        let mut r_hat = r + sigma * normal(&mut stream(rig, t, o.index, quantity::ELLIPSE_SCALE));
        if r_hat < 0.0 {
            r_hat = 0.0;
            clamped = true;
        }
        let n = a.nrows();
        let amp = sigma * a.abs().max();
        let mut rng = stream(rig, t, o.index, quantity::ELLIPSE_MATRIX);
        let mut m = a.clone();
        for i in 0..n {
            for j in i..n {
                let e = amp * normal(&mut rng);
                m[(i, j)] += e;
                if i != j {
                    m[(j, i)] += e;
                }
            }
        }
        let (values, vectors) = sym_eigen(&m);
        let projected = values[0] < PD_FLOOR;
        if projected {
            let clipped = values.map(|v| v.max(PD_FLOOR));
            m = &vectors * DMatrix::from_diagonal(&clipped) * vectors.transpose();
        }
        EllipseReading { center, matrix: m, radius: r_hat, projected }
    });
    Reading { index: o.index, true_distance: d, model_value: o.model_value, distance, radius, normal: normal_vec, ellipse, clamped }
}

/// Senses and draws in one call.
pub fn measure(world: &World, rig: &SensorRig, x: &Point, t: u64) -> Result<Measurements> {
    Ok(draw(&sense(world, rig, x)?, rig, t))
}
