use std::path::PathBuf;

use bloch_collapse::integrator::simulate;
use bloch_collapse::rng::{stream, Purpose};
use bloch_collapse::{Generator, NoiseLaw, Outcome, StopRule};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{positive, GeneratorArgs, InitialArgs, NoiseArgs};
use crate::error::{CliError, CliResult};
use crate::output::{prepare, Summary, Table};
use crate::presets::{Preset, FIG4};

/// Weight of |0⟩ above which a trace counts as having reached |0⟩.
pub const REACH_HIGH: f64 = 0.99;
/// Weight below which a trace that reached |0⟩ counts as having left it.
pub const LEAVE_HIGH: f64 = 0.9;
pub const REACH_LOW: f64 = 1.0 - REACH_HIGH;
pub const LEAVE_LOW: f64 = 1.0 - LEAVE_HIGH;

/// Noisy time series of θ, φ and the weight of |0⟩.
#[derive(Args, Debug, Clone)]
pub struct TrajectoryArgs {
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed
    #[arg(long)]
    pub seed: u64,
    /// Parameter preset (fig4, the default)
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
    /// Number of steps per trajectory
    #[arg(long)]
    pub steps: Option<u64>,
    /// Stop early once θ is within this distance of a pole
    #[arg(long)]
    pub delta_theta: Option<f64>,
    /// Record every n-th step
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Serialize)]
struct Parameters {
    generator: Generator,
    noise: NoiseLaw,
    dt: f64,
    stop: StopRule,
    stride: usize,
    biased: bool,
    reach_high: f64,
    leave_high: f64,
}

/// Per-trace summary. A trace "reaches" |0⟩ when its weight exceeds
/// `reach_high` and "leaves" when it later drops below `leave_high`
/// (mirrored thresholds for |1⟩).
#[derive(Serialize)]
struct TraceSummary {
    ic: usize,
    theta0: f64,
    weight0: f64,
    steps: u64,
    outcome: Outcome,
    final_weight0: f64,
    min_weight0: f64,
    max_weight0: f64,
    reached_pointer0: bool,
    left_pointer0: bool,
    reached_pointer1: bool,
    left_pointer1: bool,
}

fn reach_then_leave(weights: &[f64], reached: impl Fn(f64) -> bool, left: impl Fn(f64) -> bool) -> (bool, bool) {
    match weights.iter().position(|&w| reached(w)) {
        Some(k) => (true, weights[k..].iter().any(|&w| left(w))),
        None => (false, false),
    }
}

pub fn run(args: &TrajectoryArgs) -> CliResult<()> {
    let preset = args.preset.unwrap_or(Preset::Fig4).check("trajectory", &[Preset::Fig4])?;
    let d = FIG4;
    let g = args.generator.overlay(Generator::zero())?;
    let noise = NoiseLaw::new(
        args.noise.noise_target.unwrap_or(d.target),
        args.noise.noise.map_or(d.noise, |n| n.distribution()),
    );
    let dt = positive("dt", args.dt.unwrap_or(d.dt))?;
    let steps = args.steps.unwrap_or(d.steps);
    if steps == 0 {
        return Err(CliError::usage("steps must be at least 1"));
    }
    let mut stop = StopRule::max_steps(steps);
    if let Some(dtheta) = args.delta_theta.or(d.delta_theta) {
        stop.fuzzy = Some(dtheta);
    }
    stop.validate()?;
    if args.stride == 0 {
        return Err(CliError::usage("stride must be at least 1"));
    }
    let initial = args.initial.states(d.weights)?;

    let trajectories = initial
        .par_iter()
        .enumerate()
        .map(|(i, s0)| {
            let mut rng = stream(args.seed, Purpose::Trajectory, i as u32, 0);
            simulate(s0, &noise, &g, dt, &stop, args.stride, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&["ic", "t", "theta", "phi", "weight0"]);
    let mut traces = Vec::with_capacity(trajectories.len());
    for (i, traj) in trajectories.iter().enumerate() {
        let weights: Vec<f64> = traj.samples.iter().map(|s| s.weight0()).collect();
        for ((t, s), w) in traj.times.iter().zip(&traj.samples).zip(&weights) {
            table.push(&[&i, t, &s.theta(), &s.phi(), w]);
        }
        let (reached_pointer0, left_pointer0) = reach_then_leave(&weights, |w| w > REACH_HIGH, |w| w < LEAVE_HIGH);
        let (reached_pointer1, left_pointer1) = reach_then_leave(&weights, |w| w < REACH_LOW, |w| w > LEAVE_LOW);
        traces.push(TraceSummary {
            ic: i,
            theta0: traj.samples[0].theta(),
            weight0: weights[0],
            steps: traj.steps,
            outcome: traj.outcome,
            final_weight0: *weights.last().expect("non-empty trajectory"),
            min_weight0: weights.iter().copied().fold(f64::INFINITY, f64::min),
            max_weight0: weights.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            reached_pointer0,
            left_pointer0,
            reached_pointer1,
            left_pointer1,
        });
    }
    table.write(&prepare(&args.out, "trajectory.csv")?)?;

    let params = Parameters {
        generator: g,
        noise,
        dt,
        stop,
        stride: args.stride,
        biased: noise.is_biased(),
        reach_high: REACH_HIGH,
        leave_high: LEAVE_HIGH,
    };
    let mut summary = Summary::new("trajectory", Some(preset.name()), Some(args.seed), params, traces);
    summary.files.push("trajectory.csv".into());
    summary.write(&args.out.join("trajectory.json"))
}
