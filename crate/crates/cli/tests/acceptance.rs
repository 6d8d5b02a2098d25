//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use bloch_collapse::integrator::{first_passage_steps, simulate};
use bloch_collapse::rng::{stream, Purpose};
use bloch_collapse::{
    derivatives, random_walk_oracle, splitting_probability, BlochState, Generator, NoiseDistribution, NoiseLaw,
    NoiseTarget, StopRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_bloch-collapse");
const SEED: &str = "20240611";

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(BIN).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn z_score(n0: f64, n: f64, p: f64) -> f64 {
    (n0 / n - p) / (p * (1.0 - p) / n).sqrt()
}

fn born(theta0: f64) -> f64 {
    (theta0 / 2.0).cos().powi(2)
}

/// ½ + ½ u(θ₀)/u(δθ) with u = asinh(cot θ), the walk coordinate in which the
/// fuzzy-collapse dynamics is a driftless random walk.
fn splitting(theta0: f64, delta_theta: f64) -> f64 {
    let u = |t: f64| ((FRAC_PI_2 - t).sin() / t.sin()).asinh();
    0.5 + 0.5 * u(theta0) / u(delta_theta)
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let v = f();
    let elapsed = start.elapsed();
    let within = limit.is_none_or(|l| elapsed <= l);
    let detail = format!("{} ({:.1} s)", v.detail, elapsed.as_secs_f64());
    Verdict::new(v.pass && within, if within { detail } else { format!("{detail}, over time limit") })
}

fn a1_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut p = [0.0; 8];
        for x in &mut p {
            *x = rng.random_range(-1.0..1.0);
        }
        let g = Generator::from_params(p);
        let theta = rng.random_range(0.2..PI - 0.2);
        let phi = rng.random_range(0.1..6.1);
        let chi = rng.random_range(0.1..6.1);
        let n = rng.random_range(0.5..2.0);
        let fd = oracle::finite_difference(g.matrix(), theta, phi, chi, n, 1e-7);
        let d = derivatives(&BlochState::new(theta, phi, chi, n).unwrap(), &g);
        let got = [d.theta_dot, d.phi_dot().unwrap(), d.chi_dot().unwrap(), d.log_n_dot];
        for k in 0..4 {
            worst = worst.max((got[k] - fd[k]).abs());
        }
    }
    Verdict::new(worst < 1e-5, format!("max |analytic - finite difference| = {worst:.2e} over 1000 pairs"))
}

fn a2_fig5(dir: &Path) -> Verdict {
    let out = dir.join("a2");
    if let Err(e) = cli(&["ensemble", "--out", out.to_str().unwrap(), "--preset", "fig5", "--seed", SEED, "--runs", "10000", "--threads", "1"]) {
        return Verdict::new(false, e);
    }
    let delta_theta = 0.2;
    let mut max_split = 0.0f64;
    let (mut gap, mut born_z, mut unresolved, mut total) = (-1.0, 0.0, 0.0, 0.0);
    for r in rows(&out.join("ensemble.csv")) {
        let (theta0, n0, n1) = (r[0], r[2], r[3]);
        unresolved += r[4];
        total += n0 + n1 + r[4];
        let n = n0 + n1;
        max_split = max_split.max(z_score(n0, n, splitting(theta0, delta_theta)).abs());
        let g = (born(theta0) - splitting(theta0, delta_theta)).abs();
        if g > gap {
            gap = g;
            born_z = z_score(n0, n, born(theta0));
        }
    }
    Verdict::new(
        max_split < 3.0 && born_z.abs() > 5.0,
        format!(
            "splitting max |z| = {max_split:.2} (need < 3), Born |z| at largest gap = {:.2} (need > 5), {:.1}% of runs unresolved",
            born_z.abs(),
            100.0 * unresolved / total
        ),
    )
}

fn a3_nonlinear(dir: &Path) -> Verdict {
    let out = dir.join("a3");
    if let Err(e) = cli(&["nonlinear", "--out", out.to_str().unwrap(), "--preset", "fig6", "--seed", SEED, "--runs", "10000", "--threads", "1"]) {
        return Verdict::new(false, e);
    }
    let table = rows(&out.join("nonlinear.csv"));
    let max_z = table.iter().map(|r| z_score(r[2], r[2] + r[3], born(r[0])).abs()).fold(0.0, f64::max);
    Verdict::new(table.len() == 9 && max_z < 3.0, format!("max |z| against cos²(θ₀/2) = {max_z:.2} over {} points", table.len()))
}

fn fig4_noise() -> NoiseLaw {
    NoiseLaw::new(NoiseTarget::AlphaI, NoiseDistribution::Gaussian { mean: 0.0, sigma: 20.0 })
}

fn a4_instability() -> Verdict {
    const DT: f64 = 0.005;
    let noise = fig4_noise();
    let weights = [0.1, 0.3, 0.5, 0.7, 0.9];
    let (mut entered, mut stuck) = (0, 0);
    let mut earliest_stuck = usize::MAX;
    for run in 0..100u32 {
        let w: f64 = weights[run as usize % weights.len()];
        let s0 = BlochState::on_sphere(2.0 * w.sqrt().acos(), 0.0).unwrap();
        let mut rng = stream(20240611, Purpose::Trajectory, 0, run);
        let traj = simulate(&s0, &noise, &Generator::zero(), DT, &StopRule::max_steps(10_000), 1, &mut rng).unwrap();
        let w0: Vec<f64> = traj.samples.iter().map(|s| (s.theta() / 2.0).cos().powi(2)).collect();
        if let Some(first) = w0.iter().position(|&x| x > 0.99) {
            entered += 1;
            if !w0[first..].iter().any(|&x| x < 0.9) {
                stuck += 1;
                earliest_stuck = earliest_stuck.min(first);
            }
        }
    }

    let (a, b) = (PI / 3.0, PI / 2.0);
    let cap = 10_000u64;
    let passage = |from: f64, to: f64, group: u32| {
        let s0 = BlochState::on_sphere(from, 0.0).unwrap();
        let times: Vec<f64> = (0..2000)
            .map(|run| {
                let mut rng = stream(20240611, Purpose::FirstPassage, group, run);
                first_passage_steps(&s0, to, &noise, &Generator::zero(), DT, cap, &mut rng).unwrap_or(cap) as f64
            })
            .collect();
        let n = times.len() as f64;
        let mean = times.iter().sum::<f64>() / n;
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean * DT, (var / n).sqrt() * DT)
    };
    let (m1, e1) = passage(a, b, 0);
    let (m2, e2) = passage(b, a, 1);
    let z = (m1 - m2) / (e1 * e1 + e2 * e2).sqrt();
    let late = if stuck > 0 { format!(", earliest such entry at step {earliest_stuck} of 10000") } else { String::new() };
    Verdict::new(
        stuck == 0 && z.abs() < 3.0,
        format!(
            "{stuck} of {entered} trajectories reaching weight0 > 0.99 never fell back below 0.9{late}; \
             mean first passage π/3→π/2 = {m1:.2} ± {e1:.2}, π/2→π/3 = {m2:.2} ± {e2:.2} (|z| = {:.2})",
            z.abs()
        ),
    )
}

fn a5_flattening() -> Verdict {
    let ps: Vec<f64> = [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0].iter().map(|&t| splitting_probability(t, 1e-6).unwrap()).collect();
    Verdict::new(ps.iter().all(|p| (0.49..=0.51).contains(p)), format!("P at δθ = 1e-6: {ps:.4?}"))
}

fn a6_walk() -> Verdict {
    let (theta0, delta_theta) = (PI / 3.0, 0.2);
    let target = splitting(theta0, delta_theta);
    let mut errors = Vec::new();
    for step in [0.4, 0.2, 0.1, 0.05] {
        match random_walk_oracle(theta0, delta_theta, step, 100_000, 20240611) {
            Ok(est) => errors.push((est.probability - target).abs()),
            Err(e) => return Verdict::new(false, e.to_string()),
        }
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let finest = *errors.last().unwrap();
    Verdict::new(decreasing && finest < 0.01, format!("|walk - P| for step 0.4, 0.2, 0.1, 0.05: {errors:.4?}"))
}

fn matrix(v: &Value) -> Vec<(f64, f64)> {
    v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap().iter().map(|c| (c[0].as_f64().unwrap(), c[1].as_f64().unwrap())))
        .collect()
}

fn a7_envariance(dir: &Path) -> Verdict {
    let mut failures = Vec::new();
    for n in 1..=8usize {
        for m in 1..=8usize {
            let out = dir.join(format!("a7-{n}-{m}"));
            if let Err(e) = cli(&["envariance", "--out", out.to_str().unwrap(), "--n", &n.to_string(), "--m", &m.to_string()]) {
                return Verdict::new(false, e);
            }
            let v: Value = serde_json::from_str(&fs::read_to_string(out.join("envariance.json")).unwrap()).unwrap();
            let r = &v["results"];
            let check = |name: &str| r["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap().clone();
            let mut bad = Vec::new();
            if r["all_joint_swaps_envariant"] != true || check("joint-swap-undone-on-env2")["overlap"].as_f64() != Some(1.0) {
                bad.push("equal-weight joint swap");
            }
            let env1 = check("system-swap-undone-on-env1");
            if n == m && env1["invariant"] != true {
                bad.push("equal-weight system swap undone on env1");
            }
            if n != m && !(env1["overlap"].as_f64().unwrap() < 1.0 && check("system-swap-alone")["overlap"].as_f64().unwrap() < 1.0) {
                bad.push("unequal-weight system swap");
            }
            let expected = ((n * (n - 1) + m * (m - 1)) as f64).sqrt() / (n + m) as f64;
            if (r["frobenius_distance"].as_f64().unwrap() - expected).abs() > 1e-12 {
                bad.push("Frobenius distance");
            }
            let (p, q) = (matrix(&r["env1_traced_system_registered"]), matrix(&r["env1_traced_branch_registered"]));
            if p.len() != q.len() || p.iter().zip(&q).any(|(x, y)| (x.0 - y.0).abs() > 1e-12 || (x.1 - y.1).abs() > 1e-12) {
                bad.push("env1 partial traces");
            }
            if !bad.is_empty() {
                failures.push(format!("n={n} m={m}: {}", bad.join(", ")));
            }
        }
    }
    Verdict::new(failures.is_empty(), if failures.is_empty() { "64 (n, m) pairs checked".to_string() } else { failures.join("; ") })
}

fn same_bytes(a: &Path, b: &Path) -> Result<bool, String> {
    let list = |d: &Path| -> Vec<(String, Vec<u8>)> {
        let mut v: Vec<_> = fs::read_dir(d)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect();
        v.sort();
        v
    };
    if !a.exists() || !b.exists() {
        return Err(format!("missing output under {} or {}", a.display(), b.display()));
    }
    Ok(list(a) == list(b))
}

fn a8_determinism(dir: &Path) -> Verdict {
    let traj = |out: &PathBuf, threads: &str| {
        cli(&[
            "trajectory", "--out", out.to_str().unwrap(), "--preset", "fig4", "--seed", SEED, "--steps", "10000", "--stride", "100",
            "--threads", threads,
        ])
    };
    let mut notes = Vec::new();
    let mut pass = true;
    let reruns: [(&str, Box<dyn Fn(&PathBuf) -> Result<(), String>>); 3] = [
        ("a2", Box::new(|o: &PathBuf| cli(&["ensemble", "--out", o.to_str().unwrap(), "--preset", "fig5", "--seed", SEED, "--runs", "10000", "--threads", "4"]))),
        ("a3", Box::new(|o: &PathBuf| cli(&["nonlinear", "--out", o.to_str().unwrap(), "--preset", "fig6", "--seed", SEED, "--runs", "10000", "--threads", "3"]))),
        ("a4", Box::new(|o: &PathBuf| traj(o, "2"))),
    ];
    if let Err(e) = traj(&dir.join("a4"), "1") {
        return Verdict::new(false, e);
    }
    for (name, rerun) in reruns {
        let again = dir.join(format!("{name}-rerun"));
        let result = rerun(&again).and_then(|()| same_bytes(&dir.join(name), &again));
        match result {
            Ok(true) => notes.push(format!("{name} identical")),
            Ok(false) => {
                pass = false;
                notes.push(format!("{name} differs"));
            }
            Err(e) => {
                pass = false;
                notes.push(e);
            }
        }
    }
    Verdict::new(pass, notes.join(", "))
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();
    let verdicts = [
        ("A1 derivative oracle", timed(Some(Duration::from_secs(10)), a1_oracle)),
        ("A2 fig5 splitting statistics", timed(None, || a2_fig5(dir))),
        ("A3 nonlinear Born rule", timed(Some(Duration::from_secs(60)), || a3_nonlinear(dir))),
        ("A4 pole instability", timed(None, a4_instability)),
        ("A5 small-band flattening", timed(None, a5_flattening)),
        ("A6 random-walk convergence", timed(None, a6_walk)),
        ("A7 envariance", timed(Some(Duration::from_secs(10)), || a7_envariance(dir))),
        ("A8 determinism", timed(None, || a8_determinism(dir))),
    ];
    let mut failed = 0;
    for (name, v) in &verdicts {
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} passed, {failed} failed", verdicts.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
