//! Minimal nonlinear collapse model.
//!
//! θ̇ = sin θ (λ − cos θ), φ̇ = 0, with λ drawn once per measurement. Both
//! poles attract for every λ ∈ (−1, 1); the separatrix cos θ = λ splits the
//! basins, and cos θ₀ > λ flows to |0⟩. With λ uniform on [−1, 1] the chance
//! of ending at |0⟩ is (1 + cos θ₀)/2 = cos²(θ₀/2).

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CollapseError, Result};
use crate::integrator::{Outcome, OutcomeCounts, Trajectory};
use crate::rng::{self, Purpose};
use crate::state::BlochState;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-6;

/// One realization of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearModel {
    lambda: f64,
}

impl NonlinearModel {
    pub fn new(lambda: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&lambda) {
            Ok(Self { lambda })
        } else {
            Err(CollapseError::Domain(format!("lambda must lie in [-1, 1], got {lambda}")))
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta_dot(&self, theta: f64) -> f64 {
        nl_derivatives(theta, self.lambda).0
    }
}

/// Distribution f(λ) on [−1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LambdaDistribution {
    /// Uniform on [−1, 1].
    Flat,
    /// λ fixed to one value.
    Fixed { lambda: f64 },
    /// Density sampled at equally spaced nodes from −1 to 1 (inclusive),
    /// linearly interpolated.
    Tabulated { density: Vec<f64> },
}

const NORMALIZATION_TOL: f64 = 1e-6;

impl LambdaDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            LambdaDistribution::Flat => Ok(()),
            LambdaDistribution::Fixed { lambda } => NonlinearModel::new(*lambda).map(|_| ()),
            LambdaDistribution::Tabulated { density } => {
                if density.len() < 2 || density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
                    return Err(CollapseError::Config("tabulated density needs >= 2 non-negative nodes".into()));
                }
                let total = self.cdf(1.0);
                if (total - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(CollapseError::Config(format!("density integrates to {total}, not 1")));
                }
                Ok(())
            }
        }
    }

    /// P(λ < x), with a fixed λ counted as a point mass.
    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(-1.0, 1.0);
        match self {
            LambdaDistribution::Flat => (x + 1.0) / 2.0,
            LambdaDistribution::Fixed { lambda } => {
                if *lambda < x {
                    1.0
                } else {
                    0.0
                }
            }
            LambdaDistribution::Tabulated { density } => {
                let h = 2.0 / (density.len() - 1) as f64;
                let mut acc = 0.0;
                for (k, w) in density.windows(2).enumerate() {
                    let left = -1.0 + k as f64 * h;
                    if x <= left {
                        break;
                    }
                    let frac = ((x - left) / h).min(1.0);
                    // trapezoid over [left, left + frac h] of the linear interpolant
                    let right_val = w[0] + (w[1] - w[0]) * frac;
                    acc += 0.5 * (w[0] + right_val) * frac * h;
                }
                acc
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            LambdaDistribution::Flat => 2.0 * rng.random::<f64>() - 1.0,
            LambdaDistribution::Fixed { lambda } => *lambda,
            LambdaDistribution::Tabulated { .. } => {
                // invert the cdf by bisection
                let target = rng.random::<f64>() * self.cdf(1.0);
                let (mut lo, mut hi) = (-1.0f64, 1.0f64);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// (θ̇, φ̇)
pub fn nl_derivatives(theta: f64, lambda: f64) -> (f64, f64) {
    (theta.sin() * (lambda - theta.cos()), 0.0)
}

/// Late-time pointer state reached from θ₀ for a given λ.
pub fn outcome(theta0: f64, lambda: f64) -> Outcome {
    if theta0 <= 0.0 {
        return Outcome::Pointer0;
    }
    if theta0 >= PI {
        return Outcome::Pointer1;
    }
    let c = theta0.cos();
    if c > lambda {
        Outcome::Pointer0
    } else if c < lambda {
        Outcome::Pointer1
    } else {
        Outcome::Separatrix
    }
}

/// ∫ f(λ) Θ(cos θ₀ − λ) dλ
pub fn born_probability(theta0: f64, f: &LambdaDistribution) -> Result<f64> {
    f.validate()?;
    Ok(match f {
        LambdaDistribution::Flat => (1.0 + theta0.cos()) / 2.0,
        other => other.cdf(theta0.cos()),
    })
}

fn rk4(theta: f64, lambda: f64, dt: f64) -> f64 {
    let f = |t: f64| t.sin() * (lambda - t.cos());
    let k1 = f(theta);
    let k2 = f(theta + 0.5 * dt * k1);
    let k3 = f(theta + 0.5 * dt * k2);
    let k4 = f(theta + dt * k3);
    theta + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn integrate(theta0: f64, phi0: f64, lambda: f64, dt: f64, tol: f64, max_steps: u64, record: bool) -> Result<Trajectory> {
    if !(dt > 0.0 && tol > 0.0) {
        return Err(CollapseError::Config(format!("dt and tol must be positive (dt = {dt}, tol = {tol})")));
    }
    NonlinearModel::new(lambda)?;
    let mut theta = theta0.clamp(0.0, PI);
    let sample = |theta: f64| BlochState::on_sphere(theta, phi0).expect("finite angles");
    let mut traj = Trajectory { times: vec![0.0], samples: vec![sample(theta)], outcome: Outcome::Unresolved, steps: 0 };
    let settled = |t: f64| {
        if t < tol {
            Some(Outcome::Pointer0)
        } else if PI - t < tol {
            Some(Outcome::Pointer1)
        } else {
            None
        }
    };
    let mut k = 0;
    let outcome = loop {
        if let Some(o) = settled(theta) {
            break o;
        }
        if k == max_steps {
            break Outcome::Unresolved;
        }
        theta = rk4(theta, lambda, dt).clamp(0.0, PI);
        k += 1;
        if record {
            traj.times.push(k as f64 * dt);
            traj.samples.push(sample(theta));
        }
    };
    if !record && k > 0 {
        traj.times.push(k as f64 * dt);
        traj.samples.push(sample(theta));
    }
    traj.steps = k;
    traj.outcome = outcome;
    Ok(traj)
}

/// Fixed-step RK4 integration of θ until it is within `tol` of a pole. φ is
/// carried unchanged.
pub fn simulate_nl(theta0: f64, lambda: f64, dt: f64, tol: f64, max_steps: u64) -> Result<Trajectory> {
    integrate(theta0, 0.0, lambda, dt, tol, max_steps, true)
}

/// Like [`simulate_nl`] from an arbitrary azimuth, keeping only the endpoints.
pub fn settle(theta0: f64, phi0: f64, lambda: f64, dt: f64, tol: f64, max_steps: u64) -> Result<Trajectory> {
    integrate(theta0, phi0, lambda, dt, tol, max_steps, false)
}

/// How each draw's outcome is decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Resolution {
    /// Closed-form basin test.
    Analytic,
    /// RK4 integration.
    Integrate { dt: f64, tol: f64, max_steps: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonlinearEntry {
    pub theta0: f64,
    pub counts: OutcomeCounts,
    /// Draws whose integrated outcome disagreed with the basin test; only
    /// counted under [`Resolution::Integrate`].
    pub disagreements: u64,
}

/// `runs` draws of λ per initial angle. Draw `r` at angle index `i` uses
/// stream `(seed, i, r)`.
pub fn nonlinear_ensemble(
    theta0s: &[f64],
    f: &LambdaDistribution,
    resolution: Resolution,
    runs: u64,
    seed: u64,
) -> Result<Vec<NonlinearEntry>> {
    f.validate()?;
    if runs == 0 || runs > u64::from(u32::MAX) {
        return Err(CollapseError::Config(format!("runs out of range: {runs}")));
    }
    theta0s
        .iter()
        .enumerate()
        .map(|(i, &theta0)| {
            let per_run = (0..runs)
                .into_par_iter()
                .map(|r| {
                    let lambda = f.sample(&mut rng::stream(seed, Purpose::Nonlinear, i as u32, r as u32));
                    let exact = outcome(theta0, lambda);
                    match resolution {
                        Resolution::Analytic => Ok((exact, 0)),
                        Resolution::Integrate { dt, tol, max_steps } => {
                            let o = settle(theta0, 0.0, lambda, dt, tol, max_steps)?.outcome;
                            Ok((o, u64::from(o != exact)))
                        }
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let counts = per_run.iter().fold(OutcomeCounts::default(), |c, (o, _)| c.record(*o));
            let disagreements = per_run.iter().map(|(_, d)| d).sum();
            Ok(NonlinearEntry { theta0, counts, disagreements })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poles_are_fixed() {
        for lambda in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert_eq!(nl_derivatives(0.0, lambda).0, 0.0);
            assert!(nl_derivatives(PI, lambda).0.abs() < 1e-15);
        }
    }

    #[test]
    fn separatrix_is_stationary() {
        for lambda in [-0.9, -0.2, 0.0, 0.4, 0.95] {
            assert!(nl_derivatives(f64::acos(lambda), lambda).0.abs() < 1e-15);
        }
    }

    #[test]
    fn flow_sign_below_separatrix() {
        let (td, pd) = nl_derivatives(PI / 3.0, 0.2);
        assert!((td - (PI / 3.0).sin() * (0.2 - 0.5)).abs() < 1e-15);
        assert!(td < 0.0);
        assert_eq!(pd, 0.0);
    }

    #[test]
    fn outcomes() {
        assert_eq!(outcome(PI / 3.0, 0.2), Outcome::Pointer0);
        assert_eq!(outcome(PI / 3.0, 0.9), Outcome::Pointer1);
        let theta = 1.234f64;
        assert_eq!(outcome(theta, theta.cos()), Outcome::Separatrix);
        assert_eq!(outcome(0.0, -1.0), Outcome::Pointer0);
        assert_eq!(outcome(PI, 1.0), Outcome::Pointer1);
    }

    #[test]
    fn flat_born_probability_is_born_weight() {
        for k in 0..=100 {
            let theta = PI * k as f64 / 100.0;
            let p = born_probability(theta, &LambdaDistribution::Flat).unwrap();
            assert!((p - crate::analysis::born_weight(theta)).abs() < 1e-15);
        }
        assert!((born_probability(PI / 2.0, &LambdaDistribution::Flat).unwrap() - 0.5).abs() < 1e-16);
    }

    #[test]
    fn fixed_lambda_gives_step_function() {
        let f = LambdaDistribution::Fixed { lambda: 0.0 };
        assert_eq!(born_probability(1.0, &f).unwrap(), 1.0);
        assert_eq!(born_probability(2.0, &f).unwrap(), 0.0);
    }

    #[test]
    fn tabulated_flat_density_matches_flat() {
        let f = LambdaDistribution::Tabulated { density: vec![0.5; 11] };
        for theta in [0.3, 1.0, 2.5] {
            let p = born_probability(theta, &f).unwrap();
            assert!((p - crate::analysis::born_weight(theta)).abs() < 1e-12);
        }
        // triangular density 1 − |λ|
        let tri = LambdaDistribution::Tabulated { density: vec![0.0, 1.0, 0.0] };
        assert!((born_probability(PI / 2.0, &tri).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unnormalized_density_rejected() {
        let f = LambdaDistribution::Tabulated { density: vec![1.0; 5] };
        assert!(matches!(born_probability(1.0, &f), Err(CollapseError::Config(_))));
    }

    #[test]
    fn integration_reaches_predicted_pole() {
        let t = simulate_nl(PI / 4.0, 0.0, DEFAULT_DT, DEFAULT_TOL, 1_000_000).unwrap();
        assert_eq!(t.outcome, Outcome::Pointer0);
        assert!(t.final_state().theta() < DEFAULT_TOL);
        assert!(t.samples.iter().all(|s| s.phi() == 0.0));
    }

    #[test]
    fn separatrix_start_stays_put() {
        let t = simulate_nl(PI / 2.0, 0.0, DEFAULT_DT, DEFAULT_TOL, 5_000).unwrap();
        assert_eq!(t.outcome, Outcome::Unresolved);
        assert!((t.final_state().theta() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn settle_keeps_phi() {
        let t = settle(2.0, 1.7, 0.5, 1e-2, 1e-6, 1_000_000).unwrap();
        assert_eq!(t.outcome, Outcome::Pointer1);
        assert!(t.samples.iter().all(|s| s.is_pole() || s.phi() == 1.7));
    }

    #[test]
    fn lambda_range_checked() {
        assert!(NonlinearModel::new(1.5).is_err());
        assert!(simulate_nl(1.0, -1.2, 1e-3, 1e-6, 10).is_err());
    }

    #[test]
    fn linearization_at_poles_contracts() {
        // θ̇/θ → λ − 1 < 0 near θ = 0; (π − θ) shrinks near θ = π
        for lambda in [-0.99, -0.5, 0.0, 0.5, 0.99] {
            let m = NonlinearModel::new(lambda).unwrap();
            let eps = 1e-6;
            assert!(((m.theta_dot(eps) / eps) - (lambda - 1.0)).abs() < 1e-6);
            assert!(m.theta_dot(PI - eps) > 0.0);
        }
    }
}
