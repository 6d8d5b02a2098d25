//! Named parameter sets reproducing the figure captions.

use bloch_collapse::{Generator, NoiseDistribution, NoiseTarget};
use clap::ValueEnum;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Rabi oscillations under a σ_y Hamiltonian
    Fig1,
    /// Non-Hermitian flow field with a shifted fixed point
    Fig3,
    /// Instability traces, α_i ~ N(0, 20), dt = 0.005
    Fig4,
    /// Fuzzy-collapse statistics, α_i − δ_i ~ U[−1, 1], dt = 0.05, δθ = 0.2
    Fig5,
    /// Minimal nonlinear collapse model, λ ~ U[−1, 1]
    Fig6,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
        }
    }

    /// Reject presets that do not belong to `command`.
    pub fn check(self, command: &str, allowed: &[Preset]) -> CliResult<Self> {
        if allowed.contains(&self) {
            Ok(self)
        } else {
            let names: Vec<_> = allowed.iter().map(|p| p.name()).collect();
            Err(CliError::usage(format!("preset {} does not apply to {command} (use {})", self.name(), names.join(" or "))))
        }
    }
}

/// Nine weights of |0⟩ spanning the interior of the sphere.
pub const WEIGHT_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

pub fn fig1_generator() -> Generator {
    Generator::sigma_y(1.0)
}

/// α_i − δ_i = 1, β_i = 0, γ_i = 0.5, β_r = 0.1, γ_r = 0.
pub fn fig3_generator() -> Generator {
    Generator { alpha_i: 0.5, delta_i: -0.5, gamma_i: 0.5, beta_r: 0.1, ..Default::default() }
}

pub struct StochasticDefaults {
    pub dt: f64,
    pub target: NoiseTarget,
    pub noise: NoiseDistribution,
    pub steps: u64,
    pub delta_theta: Option<f64>,
    pub weights: &'static [f64],
}

pub const FIG4: StochasticDefaults = StochasticDefaults {
    dt: 0.005,
    target: NoiseTarget::AlphaI,
    noise: NoiseDistribution::Gaussian { mean: 0.0, sigma: 20.0 },
    steps: 10_000,
    delta_theta: None,
    weights: &[0.1, 0.3, 0.5, 0.7, 0.9],
};

pub const FIG5: StochasticDefaults = StochasticDefaults {
    dt: 0.05,
    target: NoiseTarget::AlphaMinusDeltaI,
    noise: NoiseDistribution::Flat { lo: -1.0, hi: 1.0 },
    steps: 10_000,
    delta_theta: Some(0.2),
    weights: &WEIGHT_GRID,
};
