//! Stepping under piecewise-constant stochastic generators.
//!
//! Within a step of length dt the generator is frozen, so each step applies
//! the exact two-state propagator for that interval. The gauge is reset to
//! n = 1, χ = 0 after every step; θ and φ do not depend on it.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derivatives::{phase_dots, theta_dot};
use crate::error::{CollapseError, Result};
use crate::evolution::exact_evolve;
use crate::generator::Generator;
use crate::rng::{self, Purpose, StreamRng};
use crate::state::{amplitudes_from_bloch, bloch_from_amplitudes, BlochState, POLE_EPS};

/// Generator parameter(s) driven by the noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseTarget {
    AlphaR,
    AlphaI,
    BetaR,
    BetaI,
    GammaR,
    GammaI,
    DeltaR,
    DeltaI,
    /// αi − δi as one parameter, applied as αi += x/2, δi −= x/2.
    AlphaMinusDeltaI,
}

impl NoiseTarget {
    pub fn overlay(&self, base: &Generator, x: f64) -> Generator {
        let mut g = *base;
        match self {
            NoiseTarget::AlphaR => g.alpha_r += x,
            NoiseTarget::AlphaI => g.alpha_i += x,
            NoiseTarget::BetaR => g.beta_r += x,
            NoiseTarget::BetaI => g.beta_i += x,
            NoiseTarget::GammaR => g.gamma_r += x,
            NoiseTarget::GammaI => g.gamma_i += x,
            NoiseTarget::DeltaR => g.delta_r += x,
            NoiseTarget::DeltaI => g.delta_i += x,
            NoiseTarget::AlphaMinusDeltaI => {
                g.alpha_i += 0.5 * x;
                g.delta_i -= 0.5 * x;
            }
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseDistribution {
    Flat { lo: f64, hi: f64 },
    Gaussian { mean: f64, sigma: f64 },
}

impl NoiseDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseDistribution::Flat { lo, hi } if lo.is_finite() && hi.is_finite() && lo <= hi => Ok(()),
            NoiseDistribution::Gaussian { mean, sigma } if mean.is_finite() && sigma.is_finite() && sigma >= 0.0 => {
                Ok(())
            }
            other => Err(CollapseError::Config(format!("invalid noise distribution {other:?}"))),
        }
    }

    /// Symmetric about zero.
    pub fn is_symmetric(&self) -> bool {
        match *self {
            NoiseDistribution::Flat { lo, hi } => lo == -hi,
            NoiseDistribution::Gaussian { mean, .. } => mean == 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseDistribution::Flat { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            NoiseDistribution::Gaussian { mean, sigma } => {
                if sigma == 0.0 {
                    mean
                } else {
                    // validated: sigma finite and positive
                    Normal::new(mean, sigma).expect("valid normal").sample(rng)
                }
            }
        }
    }
}

/// A fluctuating generator parameter, redrawn once per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLaw {
    pub target: NoiseTarget,
    pub distribution: NoiseDistribution,
}

impl NoiseLaw {
    pub fn new(target: NoiseTarget, distribution: NoiseDistribution) -> Self {
        Self { target, distribution }
    }

    /// No fluctuation at all.
    pub fn silent() -> Self {
        Self::new(NoiseTarget::AlphaI, NoiseDistribution::Flat { lo: 0.0, hi: 0.0 })
    }

    pub fn is_biased(&self) -> bool {
        !self.distribution.is_symmetric()
    }

    pub fn draw<R: Rng + ?Sized>(&self, base: &Generator, rng: &mut R) -> Generator {
        self.target.overlay(base, self.distribution.sample(rng))
    }
}

/// When to stop a trajectory. With neither rule set a trajectory would never
/// end; [`StopRule::validate`] rejects that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    /// Fuzzy-collapse band δθ around each pole.
    pub fuzzy: Option<f64>,
    pub max_steps: Option<u64>,
}

impl StopRule {
    pub fn none() -> Self {
        Self { fuzzy: None, max_steps: None }
    }

    pub fn fuzzy(delta_theta: f64) -> Self {
        Self { fuzzy: Some(delta_theta), max_steps: None }
    }

    pub fn max_steps(n: u64) -> Self {
        Self { fuzzy: None, max_steps: Some(n) }
    }

    pub fn with_max_steps(self, n: u64) -> Self {
        Self { max_steps: Some(n), ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.fuzzy {
            if !(d > 0.0 && d < FRAC_PI_2) {
                return Err(CollapseError::Config(format!("fuzzy band must lie in (0, pi/2), got {d}")));
            }
        }
        if self.fuzzy.is_none() && self.max_steps.is_none() {
            return Err(CollapseError::Config("stop rule never terminates".into()));
        }
        Ok(())
    }

    /// Outcome if `theta` lies inside a fuzzy band.
    pub fn resolved(&self, theta: f64) -> Option<Outcome> {
        let d = self.fuzzy?;
        if theta <= d {
            Some(Outcome::Pointer0)
        } else if theta >= PI - d {
            Some(Outcome::Pointer1)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pointer0,
    Pointer1,
    Unresolved,
    /// Started exactly on an unstable separatrix.
    Separatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub samples: Vec<BlochState>,
    pub outcome: Outcome,
    pub steps: u64,
}

impl Trajectory {
    pub fn final_state(&self) -> &BlochState {
        self.samples.last().expect("trajectory always holds its initial state")
    }
}

/// One interval of exact evolution under a frozen generator, gauge reset.
pub fn step(s: &BlochState, g: &Generator, dt: f64) -> BlochState {
    let psi = exact_evolve(g, &amplitudes_from_bloch(s), dt);
    match bloch_from_amplitudes(&psi) {
        Ok(next) => next.renormalized(),
        // exp(−iĜdt) is invertible, so only under/overflow can land here
        Err(_) => *s,
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(CollapseError::Config(format!("dt must be positive, got {dt}")))
    }
}

/// Run one noisy trajectory, recording every `stride`-th step plus the end.
pub fn simulate<R: Rng + ?Sized>(
    s0: &BlochState,
    noise: &NoiseLaw,
    base: &Generator,
    dt: f64,
    stop: &StopRule,
    stride: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    check_dt(dt)?;
    stop.validate()?;
    noise.distribution.validate()?;
    let stride = stride.max(1);
    let mut s = s0.renormalized();
    let mut traj = Trajectory { times: vec![0.0], samples: vec![s], outcome: Outcome::Unresolved, steps: 0 };
    let (steps, outcome) = advance(&mut s, noise, base, dt, stop, rng, |k, state| {
        if k % stride as u64 == 0 {
            traj.times.push(k as f64 * dt);
            traj.samples.push(*state);
        }
    });
    if steps % stride as u64 != 0 {
        traj.times.push(steps as f64 * dt);
        traj.samples.push(s);
    }
    traj.steps = steps;
    traj.outcome = outcome;
    Ok(traj)
}

/// Step until the stop rule fires; returns (steps taken, outcome).
fn advance<R: Rng + ?Sized>(
    s: &mut BlochState,
    noise: &NoiseLaw,
    base: &Generator,
    dt: f64,
    stop: &StopRule,
    rng: &mut R,
    mut record: impl FnMut(u64, &BlochState),
) -> (u64, Outcome) {
    if let Some(o) = stop.resolved(s.theta()) {
        return (0, o);
    }
    let limit = stop.max_steps.unwrap_or(u64::MAX);
    let mut k = 0;
    while k < limit {
        let g = noise.draw(base, rng);
        *s = step(s, &g, dt);
        k += 1;
        record(k, s);
        if let Some(o) = stop.resolved(s.theta()) {
            return (k, o);
        }
    }
    (k, Outcome::Unresolved)
}

/// Outcome of a single run without recording samples.
pub fn run_outcome<R: Rng + ?Sized>(
    s0: &BlochState,
    noise: &NoiseLaw,
    base: &Generator,
    dt: f64,
    stop: &StopRule,
    rng: &mut R,
) -> (u64, Outcome) {
    let mut s = s0.renormalized();
    advance(&mut s, noise, base, dt, stop, rng, |_, _| {})
}

/// Steps until θ first reaches `target` (crossing counts), or `None` if
/// `max_steps` run out first.
pub fn first_passage_steps<R: Rng + ?Sized>(
    s0: &BlochState,
    target: f64,
    noise: &NoiseLaw,
    base: &Generator,
    dt: f64,
    max_steps: u64,
    rng: &mut R,
) -> Option<u64> {
    let mut s = s0.renormalized();
    let side = (s.theta() - target).signum();
    if side == 0.0 {
        return Some(0);
    }
    for k in 1..=max_steps {
        s = step(&s, &noise.draw(base, rng), dt);
        if (s.theta() - target) * side <= 0.0 {
            return Some(k);
        }
    }
    None
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub noise: NoiseLaw,
    pub base: Generator,
    pub dt: f64,
    pub stop: StopRule,
    pub runs: u64,
    pub master_seed: u64,
    pub biased: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub n0: u64,
    pub n1: u64,
    pub unresolved: u64,
}

impl OutcomeCounts {
    pub fn record(mut self, o: Outcome) -> Self {
        match o {
            Outcome::Pointer0 => self.n0 += 1,
            Outcome::Pointer1 => self.n1 += 1,
            Outcome::Unresolved | Outcome::Separatrix => self.unresolved += 1,
        }
        self
    }

    pub fn merge(self, other: Self) -> Self {
        Self { n0: self.n0 + other.n0, n1: self.n1 + other.n1, unresolved: self.unresolved + other.unresolved }
    }

    pub fn resolved(&self) -> u64 {
        self.n0 + self.n1
    }

    pub fn total(&self) -> u64 {
        self.n0 + self.n1 + self.unresolved
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleEntry {
    pub theta0: f64,
    pub phi0: f64,
    pub counts: OutcomeCounts,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub entries: Vec<EnsembleEntry>,
    pub config: EnsembleConfig,
}

/// `runs` independent trajectories from each initial condition. Run `r` of
/// initial condition `i` always uses stream `(master_seed, i, r)`.
pub fn ensemble(
    initial: &[BlochState],
    noise: &NoiseLaw,
    base: &Generator,
    dt: f64,
    stop: &StopRule,
    runs: u64,
    master_seed: u64,
) -> Result<EnsembleResult> {
    check_dt(dt)?;
    stop.validate()?;
    noise.distribution.validate()?;
    if runs == 0 {
        return Err(CollapseError::Config("runs must be at least 1".into()));
    }
    if runs > u64::from(u32::MAX) || initial.len() > 0x00ff_ffff {
        return Err(CollapseError::Config("ensemble too large for the stream layout".into()));
    }
    let entries = initial
        .iter()
        .enumerate()
        .map(|(i, s0)| {
            let counts = (0..runs)
                .into_par_iter()
                .map(|r| {
                    let mut rng: StreamRng = rng::stream(master_seed, Purpose::Ensemble, i as u32, r as u32);
                    run_outcome(s0, noise, base, dt, stop, &mut rng).1
                })
                .fold(OutcomeCounts::default, OutcomeCounts::record)
                .reduce(OutcomeCounts::default, OutcomeCounts::merge);
            EnsembleEntry { theta0: s0.theta(), phi0: s0.phi(), counts }
        })
        .collect();
    Ok(EnsembleResult {
        entries,
        config: EnsembleConfig {
            noise: *noise,
            base: *base,
            dt,
            stop: *stop,
            runs,
            master_seed,
            biased: noise.is_biased(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowPoint {
    pub theta: f64,
    pub phi: f64,
    pub theta_dot: f64,
    pub phi_dot: f64,
    /// √(θ̇² + sin²θ φ̇²), the speed in the sphere's metric.
    pub speed: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowField {
    pub points: Vec<FlowPoint>,
    /// Grid nodes at a pole, where φ̇ is undefined.
    pub skipped: Vec<(f64, f64)>,
}

pub fn flow_field(g: &Generator, theta_grid: &[f64], phi_grid: &[f64]) -> FlowField {
    let mut field = FlowField { points: Vec::new(), skipped: Vec::new() };
    for &theta in theta_grid {
        for &phi in phi_grid {
            if theta.sin().abs() < POLE_EPS {
                field.skipped.push((theta, phi));
                continue;
            }
            let td = theta_dot(theta, phi, g);
            let (pd, _) = phase_dots(theta, phi, g).expect("off-pole");
            let speed = td.hypot(theta.sin() * pd);
            field.points.push(FlowPoint { theta, phi, theta_dot: td, phi_dot: pd, speed });
        }
    }
    field
}
