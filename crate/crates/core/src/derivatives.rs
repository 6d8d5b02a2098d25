//! Velocities of the Bloch coordinates under `∂ₜψ = −iĜψ`.
//!
//! θ̇ and φ̇ depend on (θ, φ) only; χ and n are gauge and never enter them.
//! φ̇ and χ̇ carry 1/sin θ and are undefined at the poles.

use serde::{Deserialize, Serialize};

use crate::error::{CollapseError, Result};
use crate::generator::Generator;
use crate::state::{BlochState, POLE_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derivatives {
    pub theta_dot: f64,
    /// d(ln n)/dt
    pub log_n_dot: f64,
    theta: f64,
    /// (φ̇, χ̇), absent at the poles.
    phase: Option<(f64, f64)>,
}

impl Derivatives {
    pub fn phi_dot(&self) -> Result<f64> {
        self.phase.map(|p| p.0).ok_or(CollapseError::PoleSingularity { theta: self.theta })
    }

    pub fn chi_dot(&self) -> Result<f64> {
        self.phase.map(|p| p.1).ok_or(CollapseError::PoleSingularity { theta: self.theta })
    }
}

pub fn theta_dot(theta: f64, phi: f64, g: &Generator) -> f64 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    (g.delta_i - g.alpha_i) * st
        + ((g.beta_i + g.gamma_i) * cp - (g.beta_r - g.gamma_r) * sp) * ct
        - ((g.beta_i - g.gamma_i) * cp - (g.beta_r + g.gamma_r) * sp)
}

pub fn log_n_dot(theta: f64, phi: f64, g: &Generator) -> f64 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    0.5 * (g.alpha_i + g.delta_i) - 0.5 * ((g.beta_r - g.gamma_r) * sp - (g.beta_i + g.gamma_i) * cp) * st
        + 0.5 * (g.alpha_i - g.delta_i) * ct
}

/// (φ̇, χ̇), or `None` at a pole.
pub fn phase_dots(theta: f64, phi: f64, g: &Generator) -> Option<(f64, f64)> {
    let (st, ct) = theta.sin_cos();
    if st < POLE_EPS {
        return None;
    }
    let (sp, cp) = phi.sin_cos();
    let (sum_r, diff_r) = (g.beta_r + g.gamma_r, g.beta_r - g.gamma_r);
    let (sum_i, diff_i) = (g.beta_i + g.gamma_i, g.beta_i - g.gamma_i);
    let phi_dot = (g.delta_r - g.alpha_r) - (diff_r * cp + sum_i * sp) / st + (sum_r * cp + diff_i * sp) * ct / st;
    let chi_dot =
        -0.5 * (g.delta_r + g.alpha_r) - 0.5 * (sum_r * cp + diff_i * sp) / st + 0.5 * (diff_r * cp + sum_i * sp) * ct / st;
    Some((phi_dot, chi_dot))
}

/// All four coordinate velocities at `s`.
pub fn derivatives(s: &BlochState, g: &Generator) -> Derivatives {
    let (theta, phi) = (s.theta(), s.phi());
    Derivatives {
        theta_dot: theta_dot(theta, phi, g),
        log_n_dot: log_n_dot(theta, phi, g),
        theta,
        phase: phase_dots(theta, phi, g),
    }
}
