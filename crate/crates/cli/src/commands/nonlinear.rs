use std::path::PathBuf;

use bloch_collapse::analysis::born_weight;
use bloch_collapse::nonlinear::{nl_derivatives, DEFAULT_DT, DEFAULT_TOL};
use bloch_collapse::{compare_counts, nonlinear_ensemble, LambdaDistribution, Resolution, Target};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::args::{parse_lambda, positive, InitialArgs};
use crate::error::{CliError, CliResult};
use crate::output::{finite, prepare, Summary, Table};
use crate::presets::{Preset, WEIGHT_GRID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Decide each outcome from the basin boundary
    Analytic,
    /// Integrate every draw and cross-check against the basin boundary
    Integrate,
}

/// Outcome statistics of the minimal nonlinear collapse model.
#[derive(Args, Debug, Clone)]
pub struct NonlinearArgs {
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed
    #[arg(long)]
    pub seed: u64,
    /// Parameter preset (fig6, the default)
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub initial: InitialArgs,
    /// Distribution of λ: flat, fixed:X or tabulated:D0,D1,...
    #[arg(long, default_value = "flat", value_parser = parse_lambda, allow_hyphen_values = true)]
    pub lambda: LambdaDistribution,
    /// How each draw is resolved
    #[arg(long, value_enum, default_value_t = Mode::Analytic)]
    pub mode: Mode,
    /// Integration step
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
    /// Distance from a pole at which integration stops
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Integration step limit per draw
    #[arg(long, default_value_t = 10_000_000)]
    pub max_steps: u64,
    /// Draws of λ per initial condition
    #[arg(long, default_value_t = 10_000)]
    pub runs: u64,
    /// λ values in the emitted flow grid
    #[arg(long, default_value_t = 41)]
    pub flow_lambda_points: usize,
    /// θ values in the emitted flow grid
    #[arg(long, default_value_t = 37)]
    pub flow_theta_points: usize,
}

#[derive(Serialize)]
struct Parameters {
    lambda: LambdaDistribution,
    resolution: Resolution,
    runs: u64,
}

#[derive(Serialize)]
struct Row {
    theta0: f64,
    weight0: f64,
    n0: u64,
    n1: u64,
    unresolved: u64,
    frequency: f64,
    stderr: f64,
    born: f64,
    z_born: Option<f64>,
    disagreements: u64,
}

#[derive(Serialize)]
struct Results {
    max_abs_z: Option<f64>,
    chi_square: Option<f64>,
    disagreements: u64,
    rows: Vec<Row>,
}

fn grid(points: usize, lo: f64, hi: f64) -> Vec<f64> {
    match points {
        1 => vec![0.5 * (lo + hi)],
        n => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn run(args: &NonlinearArgs) -> CliResult<()> {
    let preset = args.preset.unwrap_or(Preset::Fig6).check("nonlinear", &[Preset::Fig6])?;
    if args.runs == 0 {
        return Err(CliError::usage("runs must be at least 1"));
    }
    if args.flow_lambda_points == 0 || args.flow_theta_points == 0 {
        return Err(CliError::usage("flow grid sizes must be at least 1"));
    }
    let resolution = match args.mode {
        Mode::Analytic => Resolution::Analytic,
        Mode::Integrate => {
            if args.max_steps == 0 {
                return Err(CliError::usage("max-steps must be at least 1"));
            }
            Resolution::Integrate { dt: positive("dt", args.dt)?, tol: positive("tol", args.tol)?, max_steps: args.max_steps }
        }
    };
    let thetas = args.initial.thetas(&WEIGHT_GRID)?;
    let entries = nonlinear_ensemble(&thetas, &args.lambda, resolution, args.runs, args.seed)?;
    let points: Vec<_> = entries.iter().map(|e| (e.theta0, e.counts)).collect();
    let born = compare_counts(&points, Target::Born)?;

    let mut table = Table::new(&[
        "theta0", "weight0", "n0", "n1", "unresolved", "frequency", "stderr", "born", "z_born", "disagreements",
    ]);
    let mut rows = Vec::new();
    for (e, r) in entries.iter().zip(born.rows()) {
        let w = born_weight(e.theta0);
        let c = e.counts;
        table.push(&[&e.theta0, &w, &c.n0, &c.n1, &c.unresolved, &r.empirical, &r.stderr, &r.target, &r.z, &e.disagreements]);
        rows.push(Row {
            theta0: e.theta0,
            weight0: w,
            n0: c.n0,
            n1: c.n1,
            unresolved: c.unresolved,
            frequency: r.empirical,
            stderr: r.stderr,
            born: r.target,
            z_born: finite(r.z),
            disagreements: e.disagreements,
        });
    }
    table.write(&prepare(&args.out, "nonlinear.csv")?)?;

    // θ̇(θ, λ) on a grid, for drawing flow lines and the separatrix
    let mut flow = Table::new(&["lambda", "theta", "theta_dot", "separatrix"]);
    for lambda in grid(args.flow_lambda_points, -1.0, 1.0) {
        let sep = lambda.acos();
        for theta in grid(args.flow_theta_points, 0.0, std::f64::consts::PI) {
            flow.push(&[&lambda, &theta, &nl_derivatives(theta, lambda).0, &sep]);
        }
    }
    flow.write(&args.out.join("nonlinear_flow.csv"))?;

    let chi = match &born {
        bloch_collapse::Comparison::Born(b) => b.chi_square,
        bloch_collapse::Comparison::Splitting(s) => s.chi_square,
    };
    let results = Results {
        max_abs_z: finite(born.max_abs_z()),
        chi_square: finite(chi),
        disagreements: entries.iter().map(|e| e.disagreements).sum(),
        rows,
    };
    let params = Parameters { lambda: args.lambda.clone(), resolution, runs: args.runs };
    let mut summary = Summary::new("nonlinear", Some(preset.name()), Some(args.seed), params, results);
    summary.files.extend(["nonlinear.csv".to_string(), "nonlinear_flow.csv".to_string()]);
    summary.write(&args.out.join("nonlinear.json"))
}
