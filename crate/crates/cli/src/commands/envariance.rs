use std::path::PathBuf;

use bloch_collapse::envariance::{coherence_block_norm, EnvarianceCheck, ENV1, ENV2, SYSTEM};
use bloch_collapse::{
    apply_swap, branch_density, check_envariance, equal_weight_state, extend_with_second_env, pure_density,
    DensityMatrix, Registration, SwapOp,
};
use clap::Args;
use serde::Serialize;

use crate::error::CliResult;
use crate::output::{prepare, Summary};

/// Swap checks and density matrices for the branch state with n branches
/// on |0⟩ and m on |1⟩.
#[derive(Args, Debug, Clone)]
pub struct EnvarianceArgs {
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Branches carrying |0⟩
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Branches carrying |1⟩
    #[arg(long, default_value_t = 1)]
    pub m: usize,
}

#[derive(Serialize)]
struct Parameters {
    n: usize,
    m: usize,
}

#[derive(Serialize)]
struct NamedCheck {
    name: &'static str,
    invariant: bool,
    overlap: f64,
    distance: f64,
}

impl NamedCheck {
    fn new(name: &'static str, c: EnvarianceCheck) -> Self {
        Self { name, invariant: c.invariant, overlap: c.overlap, distance: c.distance }
    }
}

#[derive(Serialize)]
struct Matrix {
    dims: Vec<usize>,
    /// Row-major [re, im] pairs.
    rows: Vec<Vec<[f64; 2]>>,
}

impl From<&DensityMatrix> for Matrix {
    fn from(d: &DensityMatrix) -> Self {
        Self { dims: d.dims().to_vec(), rows: d.to_rows() }
    }
}

#[derive(Serialize)]
struct Results {
    system_weights: Vec<f64>,
    checks: Vec<NamedCheck>,
    /// Every exchange of a |0⟩ branch with a |1⟩ branch on system ⊗ env1,
    /// undone on env2.
    all_joint_swaps_envariant: bool,
    system_registered: Matrix,
    branch_registered: Matrix,
    frobenius_distance: f64,
    expected_distance: f64,
    env1_traced_system_registered: Matrix,
    env1_traced_branch_registered: Matrix,
    env1_traced_max_difference: f64,
}

pub fn run(args: &EnvarianceArgs) -> CliResult<()> {
    let (n, m) = (args.n, args.m);
    let s = equal_weight_state(n, m)?;
    let ext = extend_with_second_env(&s)?;

    let system_swap = SwapOp::local(SYSTEM, 0, 1);
    let pairs: Vec<_> = (0..n.min(m)).map(|i| (i, n + i)).collect();
    let env1_undo = SwapOp::local_many(ENV1, &pairs);
    let swapped = apply_swap(&s, &system_swap)?;
    let alone = s.inner(&swapped).norm() / (s.norm() * swapped.norm());
    let joint = SwapOp::joint(vec![SYSTEM, ENV1], vec![0, n - 1], vec![1, n + m - 1]);
    let env2_undo = SwapOp::local(ENV2, n - 1, n + m - 1);
    let checks = vec![
        NamedCheck { name: "system-swap-alone", invariant: alone >= 1.0 - 1e-12, overlap: alone, distance: (2.0 - 2.0 * alone).max(0.0).sqrt() },
        NamedCheck::new("system-swap-undone-on-env1", check_envariance(&s, (&system_swap, &env1_undo))?),
        NamedCheck::new("joint-swap-undone-on-env2", check_envariance(&ext, (&joint, &env2_undo))?),
    ];
    let mut all_joint = true;
    for i in 0..n {
        for j in n..n + m {
            let op = SwapOp::joint(vec![SYSTEM, ENV1], vec![0, i], vec![1, j]);
            all_joint &= check_envariance(&ext, (&op, &SwapOp::local(ENV2, i, j)))?.invariant;
        }
    }

    let registered = pure_density(&s, &[], Registration::System)?;
    let branches = branch_density(&s)?;
    let traced_a = registered.partial_trace(&[ENV1])?;
    let traced_b = branches.partial_trace(&[ENV1])?;
    let max_diff = (traced_a.matrix() - traced_b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);

    let results = Results {
        system_weights: s.system_weights(),
        checks,
        all_joint_swaps_envariant: all_joint,
        system_registered: (&registered).into(),
        branch_registered: (&branches).into(),
        frobenius_distance: registered.frobenius_distance(&branches)?,
        expected_distance: coherence_block_norm(n, m),
        env1_traced_system_registered: (&traced_a).into(),
        env1_traced_branch_registered: (&traced_b).into(),
        env1_traced_max_difference: max_diff,
    };
    let summary = Summary::new("envariance", None, None, Parameters { n, m }, results);
    summary.write(&prepare(&args.out, "envariance.json")?)
}
