//! Dependence of the bias on `k`: decay fits, saddle tracking, Jacobian
//! quotients, the bracket bound and the awareness discontinuity.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bias::{closed_form, closed_form_bias};
use crate::error::{NavError, Result};
use crate::geometry::World;
use crate::numeric::{fd_jacobian, linear_fit};
use crate::potentials::{default_seeds, find_critical_points, CriticalKind, Potential, PotentialKind, PotentialSpec};
use crate::sensors::{sample_free_point, SensorRig};
use crate::Point;

/// Norms below this are dropped from log-log fits.
pub const DECAY_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub ks: Vec<f64>,
    pub norms: Vec<f64>,
    /// Slope of `log‖·‖` against `log k`; absent with fewer than two usable points.
    pub slope: Option<f64>,
    pub residual: Option<f64>,
    /// Orders whose norm fell below [`DECAY_FLOOR`].
    pub dropped: Vec<f64>,
}

/// Log-log least squares over the usable `(k, norm)` pairs.
pub fn fit_decay(ks: &[f64], norms: &[f64]) -> DecayFit {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut dropped = Vec::new();
    for (&k, &n) in ks.iter().zip(norms) {
        if n.is_finite() && n >= DECAY_FLOOR {
            lx.push(k.ln());
            ly.push(n.ln());
        } else {
            dropped.push(k);
        }
    }
    let (slope, residual) = if lx.len() >= 2 {
        let (s, _, r) = linear_fit(&lx, &ly);
        (Some(s), Some(r))
    } else {
        (None, None)
    };
    DecayFit { ks: ks.to_vec(), norms: norms.to_vec(), slope, residual, dropped }
}

/// `‖b̃_k(x)‖` over the ladder `ks` at a fixed point, with its decay fit.
pub fn scaled_bias_decay(world: &World, rig: &SensorRig, spec: &PotentialSpec, x: &Point, ks: &[f64]) -> Result<DecayFit> {
    let norms = ks
        .iter()
        .map(|&k| {
            let c = closed_form(world, rig, &spec.with_order(k)?, x)?;
            Ok(DVector::from_vec(c.scaled_bias).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(fit_decay(ks, &norms))
}

/// One saddle followed along a ladder of orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleTrack {
    pub ks: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

/// Locates the saddles at the first order and continues each one to the
/// next order by Newton from its previous position. Saddles that are lost
/// along the way are dropped.
pub fn track_saddles(world: &World, kind: PotentialKind, ks: &[f64]) -> Result<Vec<SaddleTrack>> {
    let first = *ks.first().ok_or_else(|| NavError::InvalidParameter("empty k ladder".into()))?;
    let report = find_critical_points(world, &PotentialSpec::new(kind, first)?, &default_seeds(world, 20));
    let mut tracks: Vec<SaddleTrack> = report
        .of_kind(CriticalKind::Saddle)
        .map(|s| SaddleTrack { ks: vec![first], points: vec![s.point.clone()] })
        .collect();
    for &k in &ks[1..] {
        let spec = PotentialSpec::new(kind, k)?;
        tracks.retain_mut(|t| {
            let prev = DVector::from_vec(t.points.last().expect("track is never empty").clone());
            let found = find_critical_points(world, &spec, std::slice::from_ref(&prev));
            let next = found
                .of_kind(CriticalKind::Saddle)
                .map(|c| c.position())
                .min_by(|a, b| (a - &prev).norm().total_cmp(&(b - &prev).norm()));
            match next {
                Some(p) => {
                    t.ks.push(k);
                    t.points.push(p.iter().copied().collect());
                    true
                }
                None => false,
            }
        });
    }
    Ok(tracks.into_iter().filter(|t| t.ks.len() == ks.len()).collect())
}

/// `‖b̃_k(x_c(k))‖` along each tracked saddle.
pub fn saddle_bias_decay(
    world: &World,
    rig: &SensorRig,
    spec: &PotentialSpec,
    ks: &[f64],
) -> Result<Vec<(SaddleTrack, DecayFit)>> {
    track_saddles(world, spec.kind, ks)?
        .into_iter()
        .map(|t| {
            let norms = t
                .ks
                .iter()
                .zip(&t.points)
                .map(|(&k, p)| {
                    let c = closed_form(world, rig, &spec.with_order(k)?, &DVector::from_vec(p.clone()))?;
                    Ok(DVector::from_vec(c.scaled_bias).norm())
                })
                .collect::<Result<Vec<f64>>>()?;
            let fit = fit_decay(&t.ks, &norms);
            Ok((t, fit))
        })
        .collect()
}

/// Denominators below this flag a quotient as degenerate.
pub const QUOTIENT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientRow {
    pub k: f64,
    pub saddle: usize,
    pub point: Vec<f64>,
    /// `|vᵀJb v / vᵀ∇²φ v|` with `v = ∇β/‖∇β‖`.
    pub q_v: f64,
    /// The same quotient along the unit vector orthogonal to `v`.
    pub q_vperp: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientTable {
    pub rows: Vec<QuotientRow>,
    /// Per tracked saddle, decay fits of `q_v` and `q_v⊥`.
    pub fits: Vec<(DecayFit, DecayFit)>,
}

impl QuotientTable {
    /// CSV with header `k,saddle,q_v,q_vperp`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,saddle,q_v,q_vperp\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{:e},{:e}\n", r.k, r.saddle, r.q_v, r.q_vperp));
        }
        out
    }
}

/// Jacobian quotients at the saddles of `φ_k` for each `k` in the ladder.
/// Both Jacobians are central finite differences with step `1e-6·scale`.
pub fn saddle_quotient_check(world: &World, rig: &SensorRig, spec: &PotentialSpec, ks: &[f64]) -> Result<QuotientTable> {
    if world.dim() != 2 {
        return Err(NavError::Unsupported("quotients are defined here for planar worlds".into()));
    }
    let h = 1e-6 * world.scale();
    let tracks = track_saddles(world, spec.kind, ks)?;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (s, t) in tracks.iter().enumerate() {
        let mut qv = Vec::new();
        let mut qp = Vec::new();
        for (&k, p) in t.ks.iter().zip(&t.points) {
            let sk = spec.with_order(k)?;
            let x = DVector::from_vec(p.clone());
            let nan = |p: &Point| DVector::from_element(p.len(), f64::NAN);
            let jb = fd_jacobian(|q| closed_form_bias(world, rig, &sk, q).unwrap_or_else(|_| nan(q)), &x, h);
            let hess = fd_jacobian(|q| sk.gradient(world, q).unwrap_or_else(|_| nan(q)), &x, h);
            let g = world.beta_gradient(&x);
            let v = &g / g.norm();
            let vp = DVector::from_vec(vec![-v[1], v[0]]);
            let quad = |m: &nalgebra::DMatrix<f64>, u: &DVector<f64>| u.dot(&(m * u));
            let (dv, dp) = (quad(&hess, &v), quad(&hess, &vp));
            let flagged = dv.abs() < QUOTIENT_FLOOR * hess.norm().max(f64::MIN_POSITIVE)
                || dp.abs() < QUOTIENT_FLOOR * hess.norm().max(f64::MIN_POSITIVE);
            let row = QuotientRow {
                k,
                saddle: s,
                point: p.clone(),
                q_v: (quad(&jb, &v) / dv).abs(),
                q_vperp: (quad(&jb, &vp) / dp).abs(),
                flagged,
            };
            qv.push(row.q_v);
            qp.push(row.q_vperp);
            rows.push(row);
        }
        fits.push((fit_decay(&t.ks, &qv), fit_decay(&t.ks, &qp)));
    }
    Ok(QuotientTable { rows, fits })
}

/// Largest bracket norm `‖Σ ∇βᵢ/βᵢ − Σ gᵢ/mᵢ‖` over random free points
/// with at least `clearance` to every boundary, and where it occurred.
pub fn bracket_bound(world: &World, rig: &SensorRig, samples: usize, clearance: f64, seed: u64) -> Result<(f64, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = PotentialSpec::rimon_koditschek(1.0)?;
    let mut best = (0.0, world.objective.xstar.clone());
    for _ in 0..samples {
        let x = sample_free_point(world, &mut rng, clearance).ok_or(NavError::Infeasible(100_000))?;
        let n = DVector::from_vec(closed_form(world, rig, &spec, &x)?.bracket).norm();
        if n > best.0 {
            best = (n, x);
        }
    }
    Ok(best)
}

/// A jump of `b_k` between consecutive samples of a segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    /// Segment parameters bracketing the jump.
    pub t0: f64,
    pub t1: f64,
    pub size: f64,
    /// Obstacle whose distance crosses the range `c` inside the bracket.
    pub threshold_obstacle: Option<usize>,
}

/// Samples `b̃_k` at `n + 1` points of the segment `from → to` and reports
/// steps that are more than `factor` times the median step. `b̃_k` and `b_k`
/// differ by a continuous positive scale, so they jump at the same places;
/// the scaled form keeps the smooth variation from swamping the test. With
/// noisy readings the awareness edge is smeared out and no jump is expected.
pub fn discontinuity_sweep(
    world: &World,
    rig: &SensorRig,
    spec: &PotentialSpec,
    from: &Point,
    to: &Point,
    n: usize,
    factor: f64,
) -> Result<Vec<Jump>> {
    let at = |t: f64| from + (to - from) * t;
    let ts: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
    let bs = ts
        .iter()
        .map(|&t| closed_form(world, rig, spec, &at(t)).map(|c| DVector::from_vec(c.scaled_bias)))
        .collect::<Result<Vec<_>>>()?;
    let steps: Vec<f64> = bs.windows(2).map(|w| (&w[1] - &w[0]).norm()).collect();
    let mut sorted = steps.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let mut jumps = Vec::new();
    for (j, &s) in steps.iter().enumerate() {
        if s > factor * median {
            let (a, b) = (at(ts[j]), at(ts[j + 1]));
            let threshold_obstacle = (1..world.factor_count()).find(|&i| {
                let da = world.project(i, &a).map(|p| p.distance).unwrap_or(f64::NAN);
                let db = world.project(i, &b).map(|p| p.distance).unwrap_or(f64::NAN);
                (da - rig.range) * (db - rig.range) <= 0.0
            });
            jumps.push(Jump { t0: ts[j], t1: ts[j + 1], size: s, threshold_obstacle });
        }
    }
    Ok(jumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::scaled_bias;
    use crate::geometry::{EllipseObstacle, Obstacle, QuadraticObjective, SphereObstacle, WorkspaceSphere};
    use crate::sensors::{EstimatorKind, NoiseModel};
    use nalgebra::{dmatrix, dvector};

    fn ellipse_world() -> World {
        World::new(
            WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
            vec![
                Obstacle::Ellipse(
                    EllipseObstacle::new(dvector![6.0, 6.0], dmatrix![1.0, 0.0; 0.0, 2.0], 3.0).unwrap(),
                ),
                Obstacle::Ellipse(
                    EllipseObstacle::new(dvector![-6.0, 5.0], dmatrix![1.5, 0.3; 0.3, 1.0], 2.5).unwrap(),
                ),
            ],
            QuadraticObjective::isotropic(dvector![1.0, -8.0], 0.0).unwrap(),
        )
        .unwrap()
    }

    fn rig(exponent: f64) -> SensorRig {
        let noise = NoiseModel { sigma_f0: 1.0, sigma_grad_f0: 1.0, eta: 0.1, exponent };
        SensorRig::new(7.0, noise, EstimatorKind::CircleFit, 3).unwrap()
    }

    #[test]
    fn decay_fit_recovers_power_law() {
        let ks = [8.0, 16.0, 32.0, 64.0];
        let norms: Vec<f64> = ks.iter().map(|k| 3.0 / (k * k)).collect();
        let fit = fit_decay(&ks, &norms);
        assert!((fit.slope.unwrap() + 2.0).abs() < 1e-12);
        let fit = fit_decay(&ks, &[1.0, 0.0, 1e-20, 0.5]);
        assert_eq!(fit.dropped, vec![16.0, 32.0]);
    }

    #[test]
    fn scaled_identity_holds() {
        let w = ellipse_world();
        let r = rig(1.0);
        let spec = PotentialSpec::rimon_koditschek(8.0).unwrap();
        let x = dvector![0.5, 1.0];
        let c = closed_form(&w, &r, &spec, &x).unwrap();
        let s = spec.descent_scale(&w, &x).unwrap();
        for i in 0..2 {
            assert!((c.scaled_bias[i] - s * c.bias[i]).abs() <= 1e-9 * c.scaled_bias[i].abs());
        }
    }

    #[test]
    fn interior_scaled_bias_decays_like_inverse_k() {
        let w = ellipse_world();
        let spec = PotentialSpec::rimon_koditschek(8.0).unwrap();
        let fit = scaled_bias_decay(&w, &rig(1.0), &spec, &dvector![0.5, 1.0], &[8.0, 16.0, 32.0, 64.0]).unwrap();
        assert!((fit.slope.unwrap() + 1.0).abs() < 0.15, "{fit:?}");
    }

    #[test]
    fn bias_vanishes_at_the_boundary_for_fast_noise_decay() {
        let w = ellipse_world();
        let r = rig(1.5);
        let spec = PotentialSpec::rimon_koditschek(8.0).unwrap();
        let x0 = dvector![6.0, 0.0];
        let p = w.project(1, &x0).unwrap();
        let mut last = f64::INFINITY;
        let mut first = None;
        for e in [-1.0, -1.25, -1.5, -1.75, -2.0, -2.5, -3.0, -4.0] {
            let d = 10f64.powf(e);
            let out = (&x0 - &p.point).normalize();
            let b = closed_form_bias(&w, &r, &spec, &(&p.point + out * d)).unwrap().norm();
            assert!(b < last, "d={d}: {b} !< {last}");
            last = b;
            first.get_or_insert(b);
        }
        assert!(last < 0.01 * first.unwrap());
        let round = World::new(
            WorkspaceSphere::new(dvector![0.0, 0.0], 10.0).unwrap(),
            vec![Obstacle::Sphere(SphereObstacle::new(dvector![2.0, 0.0], 1.0).unwrap())],
            QuadraticObjective::isotropic(dvector![5.0, 0.0], 0.0).unwrap(),
        )
        .unwrap();
        let on = closed_form(&round, &r, &spec, &dvector![3.0, 0.0]).unwrap();
        assert!(on.bias.iter().chain(&on.scaled_bias).all(|&v| v == 0.0));
    }

    #[test]
    fn saddles_are_tracked_and_quotients_reported() {
        let w = World::new(
            WorkspaceSphere::new(dvector![0.0, 0.0], 10.0).unwrap(),
            vec![Obstacle::Sphere(SphereObstacle::new(dvector![2.0, 0.0], 1.0).unwrap())],
            QuadraticObjective::isotropic(dvector![5.0, 0.0], 0.0).unwrap(),
        )
        .unwrap();
        let r = rig(1.0);
        let spec = PotentialSpec::rimon_koditschek(8.0).unwrap();
        let table = saddle_quotient_check(&w, &r, &spec, &[8.0, 16.0, 32.0]).unwrap();
        assert_eq!(table.fits.len(), 1);
        assert_eq!(table.rows.len(), 3);
        assert!(table.to_csv().starts_with("k,saddle,q_v,q_vperp\n"));
        let x = DVector::from_vec(table.rows[0].point.clone());
        let g = w.beta_gradient(&x);
        let v = &g / g.norm();
        let vp = dvector![-v[1], v[0]];
        assert!(v.dot(&vp).abs() < 1e-12);
        let _ = scaled_bias(&w, &r, &spec, &x).unwrap();
    }

    #[test]
    fn noiseless_jump_sits_on_the_range_edge() {
        let w = ellipse_world();
        let r = rig(1.0).with_noise(NoiseModel::noiseless());
        let spec = PotentialSpec::rimon_koditschek(8.0).unwrap();
        let jumps =
            discontinuity_sweep(&w, &r, &spec, &dvector![6.0, -1.0], &dvector![6.0, -12.0], 400, 50.0).unwrap();
        assert_eq!(jumps.len(), 1, "{jumps:?}");
        assert_eq!(jumps[0].threshold_obstacle, Some(1));
        let noisy = discontinuity_sweep(&w, &rig(1.0), &spec, &dvector![6.0, -1.0], &dvector![6.0, -12.0], 400, 50.0)
            .unwrap();
        assert!(noisy.is_empty(), "{noisy:?}");
    }

    #[test]
    fn bracket_bound_is_finite() {
        let w = ellipse_world();
        let (b, x) = bracket_bound(&w, &rig(1.0), 500, 0.05, 9).unwrap();
        assert!(b.is_finite() && b > 0.0);
        assert!(w.in_free_interior(&x));
    }
}
