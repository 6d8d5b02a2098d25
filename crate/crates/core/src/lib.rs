//! Qubit state dynamics under non-unitary generators, stochastic collapse
//! ensembles, a deterministic nonlinear collapse model and finite
//! envariance constructions.

pub mod analysis;
pub mod derivatives;
pub mod envariance;
pub mod error;
pub mod evolution;
pub mod fixed_points;
pub mod generator;
pub mod integrator;
pub mod linalg;
pub mod nonlinear;
pub mod rng;
pub mod state;

pub use analysis::{
    compare, compare_counts, random_walk_oracle, splitting_probability, walk_coordinate, Comparison, ComparisonRow,
    Target, WalkEstimate,
};
pub use derivatives::{derivatives, Derivatives};
pub use envariance::{
    apply_swap, branch_density, check_envariance, equal_weight_state, extend_with_second_env, pure_density,
    DensityMatrix, EnvarianceCheck, Registration, SwapOp, TensorState,
};
pub use error::{CollapseError, Result};
pub use evolution::{eigen_decomposition, exact_evolve, expectation, EigenDecomposition};
pub use fixed_points::{classify_fixed_points, Character, FixedPoint, FixedPointReport};
pub use generator::Generator;
pub use integrator::{
    ensemble, flow_field, simulate, step, EnsembleResult, FlowField, NoiseDistribution, NoiseLaw, NoiseTarget,
    Outcome, OutcomeCounts, StopRule, Trajectory,
};
pub use linalg::Mat2;
pub use nonlinear::{nonlinear_ensemble, LambdaDistribution, NonlinearModel, Resolution};
pub use state::{amplitudes_from_bloch, bloch_from_amplitudes, Amplitudes, BlochState};
