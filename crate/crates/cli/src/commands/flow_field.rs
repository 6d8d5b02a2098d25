use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use bloch_collapse::{classify_fixed_points, flow_field, Character, Generator};
use clap::Args;
use serde::Serialize;

use crate::args::GeneratorArgs;
use crate::error::{CliError, CliResult};
use crate::output::{prepare, Summary, Table};
use crate::presets::{fig1_generator, fig3_generator, Preset};

/// Velocity field (θ̇, φ̇) of a constant generator on a θ × φ grid.
#[derive(Args, Debug, Clone)]
pub struct FlowFieldArgs {
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Parameter preset (fig1 or fig3; default fig3)
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Grid points in θ, at cell centres (never on a pole)
    #[arg(long, default_value_t = 36)]
    pub theta_points: usize,
    /// Grid points in φ over [0, 2π)
    #[arg(long, default_value_t = 72)]
    pub phi_points: usize,
}

#[derive(Serialize)]
struct Parameters {
    generator: Generator,
    theta_points: usize,
    phi_points: usize,
}

#[derive(Serialize)]
struct FixedPointOut {
    theta: f64,
    phi: f64,
    eigenvalue_re: f64,
    eigenvalue_im: f64,
    character: Character,
}

#[derive(Serialize)]
struct SlowestPoint {
    theta: f64,
    phi: f64,
    speed: f64,
}

#[derive(Serialize)]
struct Results {
    points: usize,
    skipped: usize,
    fixed_points: Vec<FixedPointOut>,
    slowest: Option<SlowestPoint>,
    max_speed: f64,
}

pub fn run(args: &FlowFieldArgs) -> CliResult<()> {
    let preset = args.preset.unwrap_or(Preset::Fig3).check("flow-field", &[Preset::Fig1, Preset::Fig3])?;
    let base = if preset == Preset::Fig1 { fig1_generator() } else { fig3_generator() };
    let g = args.generator.overlay(base)?;
    if args.theta_points == 0 || args.phi_points == 0 {
        return Err(CliError::usage("grid sizes must be at least 1"));
    }
    let thetas: Vec<f64> = (0..args.theta_points).map(|k| (k as f64 + 0.5) * PI / args.theta_points as f64).collect();
    let phis: Vec<f64> = (0..args.phi_points).map(|k| k as f64 * TAU / args.phi_points as f64).collect();
    let field = flow_field(&g, &thetas, &phis);

    let mut table = Table::new(&["theta", "phi", "theta_dot", "phi_dot", "speed"]);
    for p in &field.points {
        table.push(&[&p.theta, &p.phi, &p.theta_dot, &p.phi_dot, &p.speed]);
    }
    let csv = prepare(&args.out, "flow_field.csv")?;
    table.write(&csv)?;

    let slowest = field
        .points
        .iter()
        .min_by(|a, b| a.speed.total_cmp(&b.speed))
        .map(|p| SlowestPoint { theta: p.theta, phi: p.phi, speed: p.speed });
    let fixed_points = classify_fixed_points(&g)
        .points
        .iter()
        .map(|p| FixedPointOut {
            theta: p.location.theta(),
            phi: p.location.phi(),
            eigenvalue_re: p.eigenvalue.re,
            eigenvalue_im: p.eigenvalue.im,
            character: p.character,
        })
        .collect();
    let results = Results {
        points: field.points.len(),
        skipped: field.skipped.len(),
        fixed_points,
        slowest,
        max_speed: field.points.iter().map(|p| p.speed).fold(0.0, f64::max),
    };
    let params = Parameters { generator: g, theta_points: args.theta_points, phi_points: args.phi_points };
    let mut summary = Summary::new("flow-field", Some(preset.name()), None, params, results);
    summary.files.push("flow_field.csv".into());
    summary.write(&args.out.join("flow_field.json"))
}
