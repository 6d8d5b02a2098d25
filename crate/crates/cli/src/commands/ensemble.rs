use std::path::PathBuf;

use bloch_collapse::analysis::born_weight;
use bloch_collapse::integrator::EnsembleConfig;
use bloch_collapse::{compare, ensemble, Comparison, Generator, NoiseLaw, StopRule, Target};
use clap::Args;
use serde::Serialize;

use crate::args::{positive, GeneratorArgs, InitialArgs, NoiseArgs};
use crate::error::{CliError, CliResult};
use crate::output::{finite, prepare, Summary, Table};
use crate::presets::{Preset, FIG5};

/// Fuzzy-collapse outcome statistics compared with Born weights and
/// splitting probabilities.
#[derive(Args, Debug, Clone)]
pub struct EnsembleArgs {
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed
    #[arg(long)]
    pub seed: u64,
    /// Parameter preset (fig5, the default)
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub initial: InitialArgs,
    /// Time step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Collapse is declared within this distance of a pole
    #[arg(long)]
    pub delta_theta: Option<f64>,
    /// Runs still undecided after this many steps count as unresolved
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Runs per initial condition
    #[arg(long, default_value_t = 10_000)]
    pub runs: u64,
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
    splitting: f64,
    z_splitting: Option<f64>,
}

#[derive(Serialize)]
struct TargetSummary {
    max_abs_z: Option<f64>,
    chi_square: Option<f64>,
}

#[derive(Serialize)]
struct Results {
    biased: bool,
    born: TargetSummary,
    splitting: TargetSummary,
    /// Born z-score where |born − splitting| is largest.
    born_z_at_max_gap: Option<f64>,
    theta0_at_max_gap: f64,
    rows: Vec<Row>,
}

fn target_summary(c: &Comparison) -> TargetSummary {
    let chi = match c {
        Comparison::Born(b) => b.chi_square,
        Comparison::Splitting(s) => s.chi_square,
    };
    TargetSummary { max_abs_z: finite(c.max_abs_z()), chi_square: finite(chi) }
}

pub fn run(args: &EnsembleArgs) -> CliResult<()> {
    let preset = args.preset.unwrap_or(Preset::Fig5).check("ensemble", &[Preset::Fig5])?;
    let d = FIG5;
    if args.runs == 0 {
        return Err(CliError::usage("runs must be at least 1"));
    }
    let g = args.generator.overlay(Generator::zero())?;
    let noise = NoiseLaw::new(
        args.noise.noise_target.unwrap_or(d.target),
        args.noise.noise.map_or(d.noise, |n| n.distribution()),
    );
    let dt = positive("dt", args.dt.unwrap_or(d.dt))?;
    let delta_theta = args.delta_theta.or(d.delta_theta).expect("fig5 defines a collapse band");
    let max_steps = args.max_steps.unwrap_or(d.steps);
    if max_steps == 0 {
        return Err(CliError::usage("max-steps must be at least 1"));
    }
    let stop = StopRule::fuzzy(delta_theta).with_max_steps(max_steps);
    stop.validate()?;
    let initial = args.initial.states(d.weights)?;
    // the splitting target is only defined inside the band
    let split_target = Target::Splitting { delta_theta };
    for s in &initial {
        split_target.probability(s.theta())?;
    }

    let result = ensemble(&initial, &noise, &g, dt, &stop, args.runs, args.seed)?;
    let born = compare(&result, Target::Born)?;
    let split = compare(&result, split_target)?;

    let mut table = Table::new(&[
        "theta0", "weight0", "n0", "n1", "unresolved", "frequency", "stderr", "born", "z_born", "splitting", "z_splitting",
    ]);
    let mut rows = Vec::new();
    for ((e, b), s) in result.entries.iter().zip(born.rows()).zip(split.rows()) {
        let w = born_weight(e.theta0);
        table.push(&[
            &e.theta0, &w, &e.counts.n0, &e.counts.n1, &e.counts.unresolved, &b.empirical, &b.stderr, &b.target, &b.z,
            &s.target, &s.z,
        ]);
        rows.push(Row {
            theta0: e.theta0,
            weight0: w,
            n0: e.counts.n0,
            n1: e.counts.n1,
            unresolved: e.counts.unresolved,
            frequency: b.empirical,
            stderr: b.stderr,
            born: b.target,
            z_born: finite(b.z),
            splitting: s.target,
            z_splitting: finite(s.z),
        });
    }
    table.write(&prepare(&args.out, "ensemble.csv")?)?;

    let gap = born
        .rows()
        .iter()
        .zip(split.rows())
        .max_by(|(b1, s1), (b2, s2)| (b1.target - s1.target).abs().total_cmp(&(b2.target - s2.target).abs()))
        .map(|(b, _)| *b)
        .expect("at least one initial condition");
    let results = Results {
        biased: result.config.biased,
        born: target_summary(&born),
        splitting: target_summary(&split),
        born_z_at_max_gap: finite(gap.z),
        theta0_at_max_gap: gap.theta0,
        rows,
    };
    let config: EnsembleConfig = result.config;
    let mut summary = Summary::new("ensemble", Some(preset.name()), Some(args.seed), config, results);
    summary.files.push("ensemble.csv".into());
    summary.write(&args.out.join("ensemble.json"))
}
