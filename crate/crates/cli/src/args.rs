//! Flag groups shared by several subcommands.

use std::str::FromStr;

use bloch_collapse::{BlochState, Generator, LambdaDistribution, NoiseDistribution, NoiseTarget};
use clap::Args;

use crate::error::{CliError, CliResult};

/// Individual generator entries; each one overrides the preset value.
#[derive(Args, Debug, Clone, Default)]
pub struct GeneratorArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_i: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_i: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_i: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_i: Option<f64>,
}

impl GeneratorArgs {
    pub fn overlay(&self, base: Generator) -> CliResult<Generator> {
        let mut p = base.params();
        let given = [
            self.alpha_r, self.alpha_i, self.beta_r, self.beta_i, self.gamma_r, self.gamma_i, self.delta_r, self.delta_i,
        ];
        for (slot, v) in p.iter_mut().zip(given) {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(CliError::usage("generator entries must be finite"));
                }
                *slot = v;
            }
        }
        Ok(Generator::from_params(p))
    }
}

/// Initial conditions, as Bloch angles or as weights of |0⟩.
#[derive(Args, Debug, Clone, Default)]
pub struct InitialArgs {
    /// Initial polar angles in radians, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "weight0")]
    pub theta0: Vec<f64>,
    /// Initial weights cos²(θ₀/2) of |0⟩, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub weight0: Vec<f64>,
    /// Initial azimuth in radians
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
}

pub fn theta_from_weight(w: f64) -> f64 {
    2.0 * w.sqrt().acos()
}

impl InitialArgs {
    /// Polar angles, falling back to `default_weights` when nothing was given.
    pub fn thetas(&self, default_weights: &[f64]) -> CliResult<Vec<f64>> {
        let thetas: Vec<f64> = if !self.theta0.is_empty() {
            self.theta0.clone()
        } else {
            let weights = if self.weight0.is_empty() { default_weights } else { &self.weight0 };
            if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
                return Err(CliError::usage(format!("weight {w} outside [0, 1]")));
            }
            weights.iter().map(|&w| theta_from_weight(w)).collect()
        };
        if let Some(t) = thetas.iter().find(|t| !(0.0..=std::f64::consts::PI).contains(*t)) {
            return Err(CliError::usage(format!("theta0 {t} outside [0, pi]")));
        }
        if thetas.is_empty() {
            return Err(CliError::usage("no initial conditions"));
        }
        Ok(thetas)
    }

    pub fn states(&self, default_weights: &[f64]) -> CliResult<Vec<BlochState>> {
        self.thetas(default_weights)?
            .into_iter()
            .map(|t| BlochState::on_sphere(t, self.phi0).map_err(CliError::from))
            .collect()
    }
}

/// `none`, `flat:LO,HI` or `gaussian:MEAN,SIGMA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    None,
    Law(NoiseDistribution),
}

fn two_numbers(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got '{s}'"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
    Ok((parse(a)?, parse(b)?))
}

impl FromStr for NoiseSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "none" {
            return Ok(NoiseSpec::None);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("unknown noise '{s}'"))?;
        let (a, b) = two_numbers(rest)?;
        let dist = match kind {
            "flat" => NoiseDistribution::Flat { lo: a, hi: b },
            "gaussian" => NoiseDistribution::Gaussian { mean: a, sigma: b },
            _ => return Err(format!("unknown noise kind '{kind}' (expected flat or gaussian)")),
        };
        dist.validate().map_err(|e| e.to_string())?;
        Ok(NoiseSpec::Law(dist))
    }
}

impl NoiseSpec {
    pub fn distribution(&self) -> NoiseDistribution {
        match self {
            NoiseSpec::None => NoiseDistribution::Flat { lo: 0.0, hi: 0.0 },
            NoiseSpec::Law(d) => *d,
        }
    }
}

pub fn parse_target(s: &str) -> Result<NoiseTarget, String> {
    Ok(match s {
        "alpha-r" => NoiseTarget::AlphaR,
        "alpha-i" => NoiseTarget::AlphaI,
        "beta-r" => NoiseTarget::BetaR,
        "beta-i" => NoiseTarget::BetaI,
        "gamma-r" => NoiseTarget::GammaR,
        "gamma-i" => NoiseTarget::GammaI,
        "delta-r" => NoiseTarget::DeltaR,
        "delta-i" => NoiseTarget::DeltaI,
        "alpha-minus-delta-i" => NoiseTarget::AlphaMinusDeltaI,
        _ => return Err(format!("unknown noise target '{s}'")),
    })
}

/// Noise flags for the stochastic commands.
#[derive(Args, Debug, Clone, Default)]
pub struct NoiseArgs {
    /// Noise law: none, flat:LO,HI or gaussian:MEAN,SIGMA
    #[arg(long, allow_hyphen_values = true)]
    pub noise: Option<NoiseSpec>,
    /// Generator entry the noise is added to (alpha-r ... delta-i, alpha-minus-delta-i)
    #[arg(long, value_parser = parse_target)]
    pub noise_target: Option<NoiseTarget>,
}

/// `flat`, `fixed:X` or `tabulated:D0,D1,...` (density at equally spaced nodes on [−1, 1]).
pub fn parse_lambda(s: &str) -> Result<LambdaDistribution, String> {
    let dist = if s == "flat" {
        LambdaDistribution::Flat
    } else if let Some(x) = s.strip_prefix("fixed:") {
        LambdaDistribution::Fixed { lambda: x.trim().parse().map_err(|e| format!("'{x}': {e}"))? }
    } else if let Some(xs) = s.strip_prefix("tabulated:") {
        let density = xs
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        LambdaDistribution::Tabulated { density }
    } else {
        return Err(format!("unknown lambda distribution '{s}'"));
    };
    dist.validate().map_err(|e| e.to_string())?;
    Ok(dist)
}

pub fn positive(name: &str, x: f64) -> CliResult<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::usage(format!("{name} must be positive, got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_specs() {
        assert_eq!("none".parse::<NoiseSpec>().unwrap(), NoiseSpec::None);
        assert_eq!(
            "flat:-1,1".parse::<NoiseSpec>().unwrap(),
            NoiseSpec::Law(NoiseDistribution::Flat { lo: -1.0, hi: 1.0 })
        );
        assert!("gaussian:0,-2".parse::<NoiseSpec>().is_err());
        assert!("flat:1".parse::<NoiseSpec>().is_err());
        assert!("poisson:1,2".parse::<NoiseSpec>().is_err());
    }

    #[test]
    fn lambda_specs() {
        assert_eq!(parse_lambda("fixed:0.25").unwrap(), LambdaDistribution::Fixed { lambda: 0.25 });
        assert!(parse_lambda("fixed:2").is_err());
        assert!(parse_lambda("tabulated:0.5,0.5").is_ok());
        assert!(parse_lambda("tabulated:1,1").is_err());
    }

    #[test]
    fn weights_map_to_angles() {
        let args = InitialArgs { weight0: vec![1.0, 0.5, 0.0], ..Default::default() };
        let t = args.thetas(&[]).unwrap();
        assert_eq!(t[0], 0.0);
        assert!((t[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((t[2] - std::f64::consts::PI).abs() < 1e-15);
        let bad = InitialArgs { weight0: vec![1.5], ..Default::default() };
        assert!(matches!(bad.thetas(&[]), Err(CliError::Usage(_))));
    }
}
