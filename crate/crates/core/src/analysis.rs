//! Splitting probabilities, Born weights and ensemble statistics.
//!
//! Under a fluctuating αi − δi the polar flow is θ̇ = −(αi − δi) sin θ, which
//! in the coordinate u = ln cot(θ/2) becomes u̇ = αi − δi: a translation-
//! invariant walk. The chance of reaching θ = δθ (u = L) before π − δθ
//! (u = −L) is then (u₀ + L)/(2L), i.e.
//!
//! ```text
//! P(θ₀ → δθ) = 1/2 + ln cot(θ₀/2) / (2 ln cot(δθ/2))
//! ```

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CollapseError, Result};
use crate::integrator::{EnsembleResult, OutcomeCounts};
use crate::rng::{self, Purpose};

/// ln cot(θ/2), written as asinh(cot θ) so that θ = π/2 maps to exactly 0.
pub fn walk_coordinate(theta: f64) -> f64 {
    // sin(π/2 − θ) is exactly zero at the equator, unlike cos θ
    ((FRAC_PI_2 - theta).sin() / theta.sin()).asinh()
}

fn check_band(theta0: f64, delta_theta: f64) -> Result<()> {
    if !(delta_theta > 0.0 && delta_theta < FRAC_PI_2) {
        return Err(CollapseError::Domain(format!("delta_theta must lie in (0, pi/2), got {delta_theta}")));
    }
    if !(theta0 >= delta_theta && theta0 <= PI - delta_theta) {
        return Err(CollapseError::Domain(format!(
            "theta0 = {theta0} outside the band [{delta_theta}, pi - {delta_theta}]"
        )));
    }
    Ok(())
}

/// Probability of entering the fuzzy band around |0⟩ before the one around |1⟩.
pub fn splitting_probability(theta0: f64, delta_theta: f64) -> Result<f64> {
    check_band(theta0, delta_theta)?;
    let p = 0.5 + 0.5 * walk_coordinate(theta0) / walk_coordinate(delta_theta);
    Ok(p.clamp(0.0, 1.0))
}

/// cos²(θ₀/2)
pub fn born_weight(theta0: f64) -> f64 {
    let c = (theta0 / 2.0).cos();
    c * c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkEstimate {
    pub probability: f64,
    pub stderr: f64,
    pub runs: u64,
}

/// Monte Carlo estimate of the splitting probability from an unbiased walk
/// in u = ln cot(θ/2), with increments uniform on [−step, step] and absorbing
/// edges at u = ±ln cot(δθ/2).
pub fn random_walk_oracle(theta0: f64, delta_theta: f64, step_size: f64, runs: u64, seed: u64) -> Result<WalkEstimate> {
    check_band(theta0, delta_theta)?;
    if !(step_size > 0.0 && step_size.is_finite()) {
        return Err(CollapseError::Domain(format!("step size must be positive, got {step_size}")));
    }
    if runs == 0 || runs > u64::from(u32::MAX) {
        return Err(CollapseError::Domain(format!("runs out of range: {runs}")));
    }
    let edge = walk_coordinate(delta_theta);
    let u0 = walk_coordinate(theta0);
    let hits: u64 = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, Purpose::RandomWalk, 0, r as u32);
            let mut u = u0;
            loop {
                if u >= edge {
                    return 1;
                }
                if u <= -edge {
                    return 0;
                }
                u += step_size * (2.0 * rng.random::<f64>() - 1.0);
            }
        })
        .sum();
    let p = hits as f64 / runs as f64;
    Ok(WalkEstimate { probability: p, stderr: (p * (1.0 - p) / runs as f64).sqrt(), runs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Target {
    Born,
    Splitting { delta_theta: f64 },
}

impl Target {
    pub fn probability(&self, theta0: f64) -> Result<f64> {
        match *self {
            Target::Born => Ok(born_weight(theta0)),
            Target::Splitting { delta_theta } => splitting_probability(theta0, delta_theta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub theta0: f64,
    pub target: f64,
    /// n0 / (n0 + n1)
    pub empirical: f64,
    /// Binomial standard error of `empirical`.
    pub stderr: f64,
    /// (empirical − target) / √(target (1 − target) / resolved)
    pub z: f64,
    pub resolved: u64,
    pub unresolved: u64,
}

/// z-score of an observed frequency against a hypothesised probability.
pub fn binomial_z(successes: u64, trials: u64, p: f64) -> f64 {
    let f = successes as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    if se > 0.0 {
        (f - p) / se
    } else if f == p {
        0.0
    } else {
        (f - p).signum() * f64::INFINITY
    }
}

fn row(theta0: f64, counts: &OutcomeCounts, target: f64) -> Result<ComparisonRow> {
    let n = counts.resolved();
    if n == 0 {
        return Err(CollapseError::InsufficientData(format!("no resolved runs at theta0 = {theta0}")));
    }
    let f = counts.n0 as f64 / n as f64;
    Ok(ComparisonRow {
        theta0,
        target,
        empirical: f,
        stderr: (f * (1.0 - f) / n as f64).sqrt(),
        z: binomial_z(counts.n0, n, target),
        resolved: n,
        unresolved: counts.unresolved,
    })
}

fn summarize(rows: &[ComparisonRow]) -> (f64, f64) {
    let max_abs_z = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    let chi_square = rows.iter().map(|r| r.z * r.z).sum();
    (max_abs_z, chi_square)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BornComparison {
    pub rows: Vec<ComparisonRow>,
    pub max_abs_z: f64,
    /// Σ z² with one bin per initial condition.
    pub chi_square: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplittingCurve {
    pub delta_theta: f64,
    pub rows: Vec<ComparisonRow>,
    pub max_abs_z: f64,
    pub chi_square: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum Comparison {
    Born(BornComparison),
    Splitting(SplittingCurve),
}

impl Comparison {
    pub fn rows(&self) -> &[ComparisonRow] {
        match self {
            Comparison::Born(b) => &b.rows,
            Comparison::Splitting(s) => &s.rows,
        }
    }

    pub fn max_abs_z(&self) -> f64 {
        match self {
            Comparison::Born(b) => b.max_abs_z,
            Comparison::Splitting(s) => s.max_abs_z,
        }
    }
}

/// Compare per-initial-condition outcome counts against a target law.
/// Unresolved runs are reported but never enter the frequencies.
pub fn compare_counts(points: &[(f64, OutcomeCounts)], target: Target) -> Result<Comparison> {
    let rows = points
        .iter()
        .map(|(theta0, counts)| row(*theta0, counts, target.probability(*theta0)?))
        .collect::<Result<Vec<_>>>()?;
    let (max_abs_z, chi_square) = summarize(&rows);
    Ok(match target {
        Target::Born => Comparison::Born(BornComparison { rows, max_abs_z, chi_square }),
        Target::Splitting { delta_theta } => {
            Comparison::Splitting(SplittingCurve { delta_theta, rows, max_abs_z, chi_square })
        }
    })
}

pub fn compare(result: &EnsembleResult, target: Target) -> Result<Comparison> {
    let points: Vec<_> = result.entries.iter().map(|e| (e.theta0, e.counts)).collect();
    compare_counts(&points, target)
}
