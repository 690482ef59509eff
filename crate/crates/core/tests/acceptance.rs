//! One test per acceptance criterion. Each prints a single `PASS`/`FAIL`
//! line to stderr (bypassing output capture) and then asserts.

use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::{dvector, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stochnav::analysis::{
    closed_form_bias, monte_carlo_bias, saddle_bias_decay, saddle_quotient_check, scaled_bias_decay,
};
use stochnav::descent::{run_sgd, RunOptions, StepSchedule};
use stochnav::descent::saddle_escape_trial;
use stochnav::experiments::{
    generate_egg_world, generate_elliptical_world, median, paired_sign_test, run_campaign, CampaignConfig,
    CampaignResult, EggWorldParams, EllipticalWorldParams,
};
use stochnav::geometry::{
    EllipseObstacle, Obstacle, QuadraticObjective, SphereObstacle, World, WorkspaceSphere,
};
use stochnav::numeric::fd_gradient;
use stochnav::potentials::{
    check_condition, default_seeds, find_critical_points, locate_minimum, CriticalKind, Potential, PotentialKind, PotentialSpec,
};
use stochnav::sensors::{sample_free_point, EstimatorKind, NoiseModel, SensorRig};

const WORLDS: u64 = 100;
const MASTER_SEED: u64 = 2024;

fn report(id: u32, name: &str, pass: bool, detail: &str, elapsed: Duration) {
    let line = format!(
        "criterion {id:>2} {:<4} {name}: {detail} [{:.1}s]\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn noise() -> NoiseModel {
    NoiseModel { sigma_f0: 1.0, sigma_grad_f0: 1.0, eta: 0.1, exponent: 1.0 }
}

fn rig() -> SensorRig {
    SensorRig::new(7.0, noise(), EstimatorKind::CircleFit, MASTER_SEED).unwrap()
}

fn schedule() -> StepSchedule {
    StepSchedule::new(0.05, 5e-3).unwrap()
}

fn elliptical_worlds() -> Vec<World> {
    (0..WORLDS).map(|seed| generate_elliptical_world(&EllipticalWorldParams { seed, ..Default::default() }).unwrap()).collect()
}

fn egg_worlds() -> Vec<World> {
    (0..WORLDS).map(|seed| generate_egg_world(&EggWorldParams { seed, ..Default::default() }).unwrap()).collect()
}

fn four_spheres() -> World {
    let s = |x: f64, y: f64, r: f64| Obstacle::Sphere(SphereObstacle::new(dvector![x, y], r).unwrap());
    World::new(
        WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
        vec![s(6.0, 6.0, 2.5), s(-6.0, 6.0, 3.0), s(-6.0, -6.0, 2.0), s(6.0, -6.0, 3.5)],
        QuadraticObjective::isotropic(dvector![1.0, 2.0], 0.0).unwrap(),
    )
    .unwrap()
}

fn campaign(worlds: &[World], spec: PotentialSpec, rig: SensorRig) -> (CampaignResult, Duration) {
    let mut cfg = CampaignConfig::new(spec, rig, schedule());
    cfg.starts = 5;
    cfg.seeds = 1;
    cfg.max_steps = 5000;
    cfg.stop_radius = 0.2;
    let t = Instant::now();
    let r = run_campaign(worlds, &cfg);
    (r, t.elapsed())
}

struct Campaigns {
    k7: (CampaignResult, Duration),
    k12: (CampaignResult, Duration),
    egg: (CampaignResult, Duration),
    log_barrier: (CampaignResult, Duration),
}

/// The four 5000-step campaigns, run once and shared between criteria.
fn campaigns() -> &'static Campaigns {
    static CELL: OnceLock<Campaigns> = OnceLock::new();
    CELL.get_or_init(|| {
        let ell = elliptical_worlds();
        let eggs = egg_worlds();
        Campaigns {
            k7: campaign(&ell, PotentialSpec::rimon_koditschek(7.0).unwrap(), rig()),
            k12: campaign(&ell, PotentialSpec::rimon_koditschek(12.0).unwrap(), rig()),
            egg: campaign(&eggs, PotentialSpec::rimon_koditschek(15.0).unwrap(), rig().with_bound(10.0)),
            log_barrier: campaign(&ell, PotentialSpec::log_barrier(10.0).unwrap(), rig().with_gain_reference(10.0)),
        }
    })
}

fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-12)
}

#[test]
fn c01_gradient_correctness() {
    let t = Instant::now();
    let worlds = [
        ("sphere", four_spheres()),
        ("ellipse", generate_elliptical_world(&EllipticalWorldParams { seed: 1, ..Default::default() }).unwrap()),
        ("egg", generate_egg_world(&EggWorldParams { seed: 1, ..Default::default() }).unwrap()),
    ];
    let mut worst = 0.0_f64;
    for (i, (_, w)) in worlds.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        for spec in [PotentialSpec::rimon_koditschek(7.0).unwrap(), PotentialSpec::log_barrier(10.0).unwrap()] {
            for _ in 0..200 {
                let x = sample_free_point(w, &mut rng, 0.5).unwrap();
                let grad = spec.gradient(w, &x).unwrap();
                // φ rounds towards one at large order; difference ln φ instead
                let fd = match spec.kind {
                    PotentialKind::RimonKoditschek => {
                        fd_gradient(|p| spec.rk_log_value(w, p).unwrap(), &x, 1e-5) * spec.value(w, &x).unwrap()
                    }
                    PotentialKind::LogBarrier => fd_gradient(|p| spec.value(w, p).unwrap(), &x, 1e-5),
                };
                worst = worst.max(rel_err(&grad, &fd));
                let scaled = spec.descent_direction(w, &x) / spec.descent_scale(w, &x).unwrap();
                worst = worst.max(rel_err(&scaled, &grad));
            }
        }
    }
    let elapsed = t.elapsed();
    let pass = worst < 1e-6 && elapsed < Duration::from_secs(5);
    report(1, "gradient correctness", pass, &format!("max relative error {worst:.2e} over 1200 points"), elapsed);
    assert!(pass);
}

#[test]
fn c02_admissibility_and_polarity() {
    let t = Instant::now();
    let w = generate_elliptical_world(&EllipticalWorldParams { seed: 2, ..Default::default() }).unwrap();
    let spec = PotentialSpec::rimon_koditschek(7.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut in_range = true;
    for _ in 0..500 {
        let x = sample_free_point(&w, &mut rng, 0.0).unwrap();
        let v = spec.value(&w, &x).unwrap();
        in_range &= (0.0..=1.0).contains(&v);
    }
    let mut boundary_err = 0.0_f64;
    for o in &w.obstacles {
        for mut p in o.boundary_points(64) {
            // sampled points can round to just inside the obstacle
            let n = o.gradient(&p).normalize();
            let mut step = f64::EPSILON * p.norm();
            while o.value(&p) < 0.0 {
                p += &n * step;
                step *= 2.0;
            }
            boundary_err = boundary_err.max((spec.value(&w, &p).unwrap() - 1.0).abs());
        }
    }
    let goal_err = (locate_minimum(&w, &spec).unwrap() - &w.objective.xstar).norm();

    let offset = generate_elliptical_world(&EllipticalWorldParams { seed: 2, fmin: 5.0, ..Default::default() }).unwrap();
    let dists: Vec<f64> = [8.0, 16.0, 32.0]
        .iter()
        .map(|&k| {
            let spec = PotentialSpec::rimon_koditschek(k).unwrap();
            (locate_minimum(&offset, &spec).unwrap() - &offset.objective.xstar).norm()
        })
        .collect();
    let halving = dists.windows(2).all(|d| d[1] <= 0.5 * d[0]);
    let pass = in_range && boundary_err < 1e-9 && goal_err < 1e-6 && halving;
    report(
        2,
        "admissibility and polarity",
        pass,
        &format!(
            "φ in [0,1]: {in_range}; max |φ−1| on boundary {boundary_err:.1e}; |x̄−x*| {goal_err:.1e}; offset distances {:.3e} {:.3e} {:.3e}",
            dists[0], dists[1], dists[2]
        ),
        t.elapsed(),
    );
    assert!(pass);
}

#[test]
fn c03_condition_checker() {
    let t = Instant::now();
    let sphere = World::new(
        WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
        vec![Obstacle::Sphere(SphereObstacle::new(dvector![4.0, 0.0], 1.0).unwrap())],
        QuadraticObjective::isotropic(dvector![0.0, 0.0], 0.0).unwrap(),
    )
    .unwrap();
    let dense = check_condition(&sphere, 100_000).unwrap();
    let margin = dense.obstacles[0].margin;
    let flat = World::new(
        WorkspaceSphere::new(dvector![0.0, 0.0], 20.0).unwrap(),
        vec![Obstacle::Ellipse(
            EllipseObstacle::new(dvector![0.0, 1.5], DMatrix::from_diagonal(&dvector![1.0, 100.0]), 5.0).unwrap(),
        )],
        QuadraticObjective::isotropic(dvector![0.0, 0.0], 0.0).unwrap(),
    )
    .unwrap();
    let flat_fails = !check_condition(&flat, 2000).unwrap().passed;
    let pass = (margin - 1.6).abs() < 1e-6 && dense.passed && flat_fails;
    report(3, "condition checker", pass, &format!("sphere margin {margin:.9}; flat ellipse rejected: {flat_fails}"), t.elapsed());
    assert!(pass);
}

#[test]
fn c04_non_collision() {
    let c = campaigns();
    let runs = c.k7.0.aggregates.runs + c.k12.0.aggregates.runs;
    let collisions = c.k7.0.aggregates.collisions + c.k12.0.aggregates.collisions;
    let errors = c.k7.0.aggregates.errors + c.k12.0.aggregates.errors;
    let elapsed = c.k7.1 + c.k12.1;
    let pass = runs == 1000 && collisions == 0 && errors == 0 && elapsed < Duration::from_secs(120);
    report(4, "non-collision", pass, &format!("{collisions} collisions, {errors} errors in {runs} runs"), elapsed);
    assert!(pass);
}

#[test]
fn c05_convergence() {
    let c = campaigns();
    let parts = [("k=7", &c.k7), ("k=12", &c.k12), ("egg k=15", &c.egg), ("log barrier k=10", &c.log_barrier)];
    let elapsed: Duration = parts.iter().map(|(_, r)| r.1).sum();
    let detail: Vec<String> = parts
        .iter()
        .map(|(n, r)| format!("{n} {}/{} ({} collisions)", r.0.aggregates.successes, r.0.aggregates.runs, r.0.aggregates.collisions))
        .collect();
    let pass = parts.iter().all(|(_, r)| r.0.aggregates.runs > 0 && r.0.aggregates.successes == r.0.aggregates.runs)
        && elapsed < Duration::from_secs(600);
    report(5, "convergence", pass, &detail.join("; "), elapsed);
    assert!(pass);
}

#[test]
fn c06_k_closeness() {
    let c = campaigns();
    let t = Instant::now();
    let d7 = c.k7.0.deviation_by_world(WORLDS as usize);
    let d12 = c.k12.0.deviation_by_world(WORLDS as usize);
    let mean = |d: &[Option<f64>]| {
        let v: Vec<f64> = d.iter().flatten().copied().collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (m7, m12) = (mean(&d7), mean(&d12));
    let test = paired_sign_test(&d12, &d7);
    let pass = m12 < m7 && test.p_value < 0.01;
    report(
        6,
        "k-closeness",
        pass,
        &format!("mean deviation k=7 {m7:.4}, k=12 {m12:.4}; k=12 closer in {}/{} worlds, p = {:.2e}", test.wins, test.wins + test.losses, test.p_value),
        t.elapsed(),
    );
    assert!(pass);
}

#[test]
fn c07_unbiasedness() {
    let t = Instant::now();
    let w = four_spheres();
    let exact = SensorRig::new(100.0, noise(), EstimatorKind::ExactOracle, 7).unwrap();
    let spec = PotentialSpec::rimon_koditschek(7.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let x = sample_free_point(&w, &mut rng, 0.5).unwrap();
        // the mean estimate against α·∇φ_k, a positive multiple of the descent direction
        let mc = monte_carlo_bias(&w, &exact, &spec, &x, 1_000_000).unwrap();
        for i in 0..2 {
            worst = worst.max(mc.raw[i].abs() / mc.mean_se[i]);
        }
    }
    let pass = worst < 4.0;
    report(7, "unbiasedness", pass, &format!("max |mean − direction|/SE {worst:.2} at 10 points, 10⁶ draws each"), t.elapsed());
    assert!(pass);
}

#[test]
fn c08_bias_structure() {
    let t = Instant::now();
    let ks = [8.0, 16.0, 32.0, 64.0];
    let rig = rig();
    let spec = PotentialSpec::rimon_koditschek(8.0).unwrap();
    let mut max_z = 0.0_f64;
    let mut interior = Vec::new();
    let mut saddle = Vec::new();
    for seed in 0..5 {
        let w = generate_elliptical_world(&EllipticalWorldParams { seed, ..Default::default() }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(800 + seed);
        for _ in 0..2 {
            let x = sample_free_point(&w, &mut rng, 1.0).unwrap();
            let cf = closed_form_bias(&w, &rig, &spec, &x).unwrap();
            let mc = monte_carlo_bias(&w, &rig, &spec, &x, 20_000).unwrap();
            for i in 0..2 {
                max_z = max_z.max((cf[i] - mc.bias[i]).abs() / mc.bias_se[i].max(f64::MIN_POSITIVE));
            }
        }
        // interior probes well inside the sensing range of some obstacle
        let mut taken = 0;
        while taken < 2 {
            let x = sample_free_point(&w, &mut rng, 1.0).unwrap();
            if w.obstacle_clearance(&x) > 5.0 {
                continue;
            }
            if let Some(s) = scaled_bias_decay(&w, &rig, &spec, &x, &ks).unwrap().slope {
                interior.push(s);
                taken += 1;
            }
        }
        for (_, fit) in saddle_bias_decay(&w, &rig, &spec, &ks).unwrap() {
            if let Some(s) = fit.slope {
                saddle.push(s);
            }
        }
    }
    let imin = interior.iter().copied().fold(f64::INFINITY, f64::min);
    let imax = interior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let smax = saddle.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pass = max_z < 4.0 && (imin - -1.0).abs() <= 0.15 && (imax - -1.0).abs() <= 0.15 && !saddle.is_empty() && smax <= -1.7;
    report(
        8,
        "bias structure",
        pass,
        &format!(
            "closed form vs MC max z {max_z:.2} at 10 points; interior slopes [{imin:.3}, {imax:.3}]; {} saddle slopes, max {smax:.3}",
            saddle.len()
        ),
        t.elapsed(),
    );
    assert!(pass);
}

#[test]
fn c09_saddle_quotients() {
    let t = Instant::now();
    let w = four_spheres();
    let spec = PotentialSpec::rimon_koditschek(8.0).unwrap();
    let table = saddle_quotient_check(&w, &rig(), &spec, &[8.0, 16.0, 32.0]).unwrap();
    let mut slopes = Vec::new();
    let mut ok = !table.fits.is_empty();
    for (v, vp) in &table.fits {
        for s in [v.slope, vp.slope] {
            ok &= s.is_some_and(|s| (s + 1.0).abs() <= 0.3);
            slopes.push(s.map_or("none".to_string(), |s| format!("{s:.2}")));
        }
    }
    report(9, "saddle quotients", ok, &format!("(q_v, q_v⊥) slopes per saddle: {}", slopes.join(" ")), t.elapsed());
    assert!(ok);
}

#[test]
fn c10_saddle_escape() {
    let t = Instant::now();
    let w = generate_elliptical_world(&EllipticalWorldParams { seed: 0, ..Default::default() }).unwrap();
    let spec = PotentialSpec::rimon_koditschek(7.0).unwrap();
    let report_cp = find_critical_points(&w, &spec, &default_seeds(&w, 20));
    let saddle = report_cp.of_kind(CriticalKind::Saddle).next().expect("a saddle").clone();
    let minimum = locate_minimum(&w, &spec).unwrap();
    let opts = RunOptions::until(5000, 0.2, minimum);
    let stats = saddle_escape_trial(&w, &spec, &rig(), &schedule(), &saddle, 100, &opts).unwrap();

    let control = SensorRig::new(7.0, NoiseModel::noiseless(), EstimatorKind::ExactOracle, 0).unwrap();
    let xc = saddle.position();
    let traj = run_sgd(&w, &spec, &control, &schedule(), &xc, &RunOptions::fixed(10_000)).unwrap();
    let drift = traj.iterates.iter().map(|x| (x - &xc).norm()).fold(0.0, f64::max);
    let pass = stats.converged == 100 && drift < 1e-6;
    report(
        10,
        "saddle escape",
        pass,
        &format!(
            "{}/100 converged ({} left along +v, {} along −v); noiseless control drift {drift:.1e}",
            stats.converged, stats.positive_side, stats.negative_side
        ),
        t.elapsed(),
    );
    assert!(pass);
}

#[test]
fn c11_log_barrier_clearance() {
    let c = campaigns();
    let t = Instant::now();
    let per_world = |r: &CampaignResult| -> Vec<Option<f64>> {
        (0..WORLDS as usize)
            .map(|w| {
                let v: Vec<f64> = r.world_rows(w).filter_map(|row| row.metrics.as_ref()).map(|m| m.min_obstacle_clearance).collect();
                median(&v)
            })
            .collect()
    };
    let lb = per_world(&c.log_barrier.0);
    let rk = per_world(&c.k7.0);
    let test = paired_sign_test(&lb, &rk);
    let lb_median = median(&lb.iter().flatten().copied().collect::<Vec<_>>()).unwrap();
    let rk_median = median(&rk.iter().flatten().copied().collect::<Vec<_>>()).unwrap();
    let collisions = c.log_barrier.0.aggregates.collisions + c.k7.0.aggregates.collisions;
    let pass = lb_median < rk_median && test.p_value < 0.01 && collisions == 0;
    report(
        11,
        "log-barrier clearance",
        pass,
        &format!(
            "median min-clearance log barrier {lb_median:.3}, RK {rk_median:.3}; smaller in {}/{} worlds, p = {:.2e}; {collisions} collisions",
            test.wins,
            test.wins + test.losses,
            test.p_value
        ),
        t.elapsed(),
    );
    assert!(pass);
}

fn run_cli(args: &[&str], dir: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_stochnav"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = walk(dir)
        .into_iter()
        .map(|p| (p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn c12_reproducibility() {
    let t = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let config = r#"{
        "world": {"source": "elliptical", "count": 2, "params": {"seed": 5}},
        "potential": {"kind": "rimon_koditschek", "k": 7},
        "rig": {"range_c": 7, "eta": 0.1, "sigma_f0": 1, "sigma_gradf0": 1, "estimator": "circle_fit", "seed": 9},
        "starts": 2,
        "seeds": 2,
        "max_steps": 400,
        "k_sweep": [7, 12],
        "contours": true,
        "bias": {"grid": 3, "ks": [8, 16, 32], "draws": 10000, "quotients": true}
    }"#;
    std::fs::write(dir.join("run.json"), config).unwrap();
    let commands = ["validate", "simulate", "montecarlo", "bias-diag"];
    let mut codes = Vec::new();
    for round in ["a", "b"] {
        for c in commands {
            codes.push(run_cli(&[c, "run.json", "--seed", "3", "-o", &format!("{round}/{c}")], dir));
        }
        codes.push(run_cli(
            &["plot", "run.json", "-o", &format!("{round}/plot"), "--traj", &format!("{round}/simulate/traj_0_0.csv")],
            dir,
        ));
    }
    let a = snapshot(&dir.join("a"));
    let b = snapshot(&dir.join("b"));
    let names_match = a.iter().map(|f| &f.0).eq(b.iter().map(|f| &f.0));
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.as_str()).collect();
    let usable = codes.iter().all(|&c| c == 0 || c == 1);
    let pass = names_match && differing.is_empty() && usable && a.len() >= 12;
    report(
        12,
        "reproducibility",
        pass,
        &format!("{} output files compared across two runs; differing: {differing:?}; exit codes {codes:?}", a.len()),
        t.elapsed(),
    );
    assert!(pass);
}
