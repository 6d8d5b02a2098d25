//! Finite-dimensional envariance constructions.
//!
//! States live on a product of subsystems (system first, then one or two
//! environments). Branch-form states
//!
//! ```text
//! |ψ⟩ = N^{-1/2} [ Σ_{i≤n} |0⟩|i⟩ + Σ_{n<j≤n+m} |1⟩|j⟩ ]      (optionally ⊗ |e_i⟩)
//! ```
//!
//! are envariant under swaps that exchange whole branches, but a swap of the
//! system alone can be undone by the first environment only when n = m. The
//! density matrix after registering the system alone keeps coherences between
//! the env1 states of a branch; the matrix after registering system and env1
//! together does not. Both agree once env1 is traced out.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CollapseError, Result};

/// Largest total dimension of a [`TensorState`].
pub const MAX_STATE_DIM: usize = 1 << 14;
/// Largest dimension of a [`DensityMatrix`].
pub const MAX_DENSITY_DIM: usize = 1 << 12;

pub const SYSTEM: usize = 0;
pub const ENV1: usize = 1;
pub const ENV2: usize = 2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn decode(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut labels = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        labels[k] = idx % dims[k];
        idx /= dims[k];
    }
    labels
}

/// Dense pure state on a product space; subsystem 0 is most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorState {
    dims: Vec<usize>,
    amplitudes: Vec<Complex64>,
}

impl TensorState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(CollapseError::Domain(format!("invalid dimensions {dims:?}")));
        }
        let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match total {
            Some(t) if t <= MAX_STATE_DIM => {
                if amplitudes.len() != t {
                    return Err(CollapseError::Domain(format!(
                        "{} amplitudes for total dimension {t}",
                        amplitudes.len()
                    )));
                }
            }
            _ => return Err(CollapseError::Domain(format!("dimensions {dims:?} exceed {MAX_STATE_DIM}"))),
        }
        let s = Self { dims, amplitudes };
        if s.norm() == 0.0 {
            return Err(CollapseError::InvalidState("zero state".into()));
        }
        Ok(s)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn index(&self, labels: &[usize]) -> usize {
        labels.iter().zip(strides(&self.dims)).map(|(l, s)| l * s).sum()
    }

    pub fn amplitude(&self, labels: &[usize]) -> Complex64 {
        self.amplitudes[self.index(labels)]
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &TensorState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Marginal probabilities of each system label.
    pub fn system_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.dims[SYSTEM]];
        let block = product(&self.dims[1..]);
        for (idx, a) in self.amplitudes.iter().enumerate() {
            w[idx / block] += a.norm_sqr();
        }
        let total: f64 = w.iter().sum();
        w.iter().map(|x| x / total).collect()
    }
}

/// N^{-1/2} [Σ_{i<n} |0⟩|i⟩ + Σ_{n≤j<n+m} |1⟩|j⟩] with env1 of dimension n + m
/// (labels are zero-based).
pub fn equal_weight_state(n: usize, m: usize) -> Result<TensorState> {
    if n == 0 || m == 0 {
        return Err(CollapseError::Domain(format!("n and m must be at least 1 (n = {n}, m = {m})")));
    }
    let total = n + m;
    let amp = Complex64::new(1.0 / (total as f64).sqrt(), 0.0);
    let mut amplitudes = vec![ZERO; 2 * total];
    amplitudes[..n].fill(amp);
    amplitudes[total + n..].fill(amp);
    TensorState::new(vec![2, total], amplitudes)
}

/// Branches of a two-party branch-form state: (system label, env1 label, amplitude).
fn branches(s: &TensorState) -> Result<Vec<(usize, usize, Complex64)>> {
    let malformed = || CollapseError::Domain("state is not in branch form".into());
    match s.dims.as_slice() {
        [2, env] => {
            let mut out = Vec::new();
            for i in 0..*env {
                let (a0, a1) = (s.amplitude(&[0, i]), s.amplitude(&[1, i]));
                match (a0 != ZERO, a1 != ZERO) {
                    (true, true) => return Err(malformed()),
                    (true, false) => out.push((0, i, a0)),
                    (false, true) => out.push((1, i, a1)),
                    (false, false) => {}
                }
            }
            Ok(out)
        }
        [2, env, env2] if env == env2 => {
            let mut out = Vec::new();
            for (idx, a) in s.amplitudes.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                let l = decode(idx, &s.dims);
                if l[1] != l[2] {
                    return Err(malformed());
                }
                out.push((l[0], l[1], *a));
            }
            // each env1 label may carry one system label only
            let mut seen = vec![false; *env];
            for &(_, i, _) in &out {
                if std::mem::replace(&mut seen[i], true) {
                    return Err(malformed());
                }
            }
            Ok(out)
        }
        _ => Err(malformed()),
    }
}

/// Entangle every branch |k⟩|i⟩ with a second environment state |e_i⟩.
pub fn extend_with_second_env(s: &TensorState) -> Result<TensorState> {
    if s.dims.len() != 2 {
        return Err(CollapseError::Domain("expected a system ⊗ env1 state".into()));
    }
    let env = s.dims[ENV1];
    let mut out = vec![ZERO; 2 * env * env];
    for (k, i, a) in branches(s)? {
        out[(k * env + i) * env + i] = a;
    }
    TensorState::new(vec![2, env, env], out)
}

/// A product of disjoint transpositions of joint basis labels on a set of
/// subsystems, acting as the identity on every other label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapOp {
    pub subsystems: Vec<usize>,
    pub pairs: Vec<(Vec<usize>, Vec<usize>)>,
}

impl SwapOp {
    /// |a⟩⟨b| + |b⟩⟨a| on one subsystem.
    pub fn local(subsystem: usize, a: usize, b: usize) -> Self {
        Self { subsystems: vec![subsystem], pairs: vec![(vec![a], vec![b])] }
    }

    /// Several disjoint label swaps on one subsystem.
    pub fn local_many(subsystem: usize, pairs: &[(usize, usize)]) -> Self {
        Self { subsystems: vec![subsystem], pairs: pairs.iter().map(|&(a, b)| (vec![a], vec![b])).collect() }
    }

    /// Exchange joint labels `a` and `b` of several subsystems, e.g.
    /// |0⟩|i⟩ ↔ |1⟩|j⟩ on system ⊗ env1.
    pub fn joint(subsystems: Vec<usize>, a: Vec<usize>, b: Vec<usize>) -> Self {
        Self { subsystems, pairs: vec![(a, b)] }
    }

    fn mapping(&self, dims: &[usize]) -> Result<HashMap<Vec<usize>, Vec<usize>>> {
        let bad = |msg: String| Err(CollapseError::Domain(msg));
        if self.subsystems.is_empty() {
            return bad("swap acts on no subsystem".into());
        }
        for (k, &sub) in self.subsystems.iter().enumerate() {
            if sub >= dims.len() || self.subsystems[..k].contains(&sub) {
                return bad(format!("bad subsystem list {:?}", self.subsystems));
            }
        }
        let mut map = HashMap::new();
        for (a, b) in &self.pairs {
            for labels in [a, b] {
                if labels.len() != self.subsystems.len() {
                    return bad(format!("label {labels:?} does not match subsystems {:?}", self.subsystems));
                }
                for (l, &sub) in labels.iter().zip(&self.subsystems) {
                    if *l >= dims[sub] {
                        return bad(format!("label {l} out of range for subsystem {sub} of dimension {}", dims[sub]));
                    }
                }
            }
            if a == b || map.contains_key(a) || map.contains_key(b) {
                return bad("swap pairs must be distinct and disjoint".into());
            }
            map.insert(a.clone(), b.clone());
            map.insert(b.clone(), a.clone());
        }
        Ok(map)
    }
}

/// Apply a swap. The result is a permutation of the amplitudes, so norms are
/// preserved exactly and applying the same swap twice restores the input.
pub fn apply_swap(s: &TensorState, op: &SwapOp) -> Result<TensorState> {
    let map = op.mapping(&s.dims)?;
    let st = strides(&s.dims);
    let mut out = vec![ZERO; s.amplitudes.len()];
    let mut key = vec![0; op.subsystems.len()];
    for (idx, a) in s.amplitudes.iter().enumerate() {
        let labels = decode(idx, &s.dims);
        for (slot, &sub) in key.iter_mut().zip(&op.subsystems) {
            *slot = labels[sub];
        }
        let target = match map.get(&key) {
            Some(to) => {
                let mut t = idx;
                for (&sub, (&from, &to)) in op.subsystems.iter().zip(key.iter().zip(to)) {
                    t = t + to * st[sub] - from * st[sub];
                }
                t
            }
            None => idx,
        };
        out[target] = *a;
    }
    Ok(TensorState { dims: s.dims.clone(), amplitudes: out })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvarianceCheck {
    pub invariant: bool,
    /// |⟨s|s'⟩| / (‖s‖‖s'‖)
    pub overlap: f64,
    /// min over global phase of ‖s' − e^{iφ}s‖ / ‖s‖
    pub distance: f64,
}

pub const ENVARIANCE_TOL: f64 = 1e-12;

/// Apply `first` then `second` and test whether the state comes back up to a
/// global phase.
pub fn check_envariance(s: &TensorState, ops: (&SwapOp, &SwapOp)) -> Result<EnvarianceCheck> {
    let out = apply_swap(&apply_swap(s, ops.0)?, ops.1)?;
    let norm = s.norm();
    let overlap = (s.inner(&out).norm() / (norm * out.norm())).min(1.0);
    // ‖s' − e^{iφ}s‖² minimised over φ is 2‖s‖² − 2|⟨s|s'⟩| for equal norms
    let ip = s.inner(&out);
    let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { Complex64::new(1.0, 0.0) };
    let distance = out
        .amplitudes
        .iter()
        .zip(&s.amplitudes)
        .map(|(b, a)| (b - a * phase).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / norm;
    Ok(EnvarianceCheck { invariant: distance <= ENVARIANCE_TOL, overlap, distance })
}

/// Dense density matrix on a product space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Hermitian within 1e-12, unit trace within 1e-12, eigenvalues > −1e-10.
    pub fn validate(&self) -> Result<()> {
        if self.hermiticity_error() > 1e-12 {
            return Err(CollapseError::InvalidState("density matrix is not Hermitian".into()));
        }
        if (self.trace() - 1.0).norm() > 1e-12 {
            return Err(CollapseError::InvalidState(format!("trace {} != 1", self.trace())));
        }
        if self.min_eigenvalue() < -1e-10 {
            return Err(CollapseError::InvalidState("density matrix is not positive semidefinite".into()));
        }
        Ok(())
    }

    /// Trace out the listed subsystems (indices into `dims`).
    pub fn partial_trace(&self, traced_out: &[usize]) -> Result<DensityMatrix> {
        check_subsystems(&self.dims, traced_out)?;
        let keep: Vec<usize> = (0..self.dims.len()).filter(|k| !traced_out.contains(k)).collect();
        let kept_dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let kd = product(&kept_dims);
        let mut out = DMatrix::from_element(kd, kd, ZERO);
        let full = self.dim();
        let labels: Vec<Vec<usize>> = (0..full).map(|i| decode(i, &self.dims)).collect();
        let kept_index = |l: &[usize]| keep.iter().fold(0, |acc, &k| acc * self.dims[k] + l[k]);
        for i in 0..full {
            for j in 0..full {
                if traced_out.iter().all(|&t| labels[i][t] == labels[j][t]) {
                    out[(kept_index(&labels[i]), kept_index(&labels[j]))] += self.matrix[(i, j)];
                }
            }
        }
        Ok(DensityMatrix { dims: kept_dims, matrix: out })
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dims != other.dims {
            return Err(CollapseError::Domain(format!("dims {:?} vs {:?}", self.dims, other.dims)));
        }
        Ok((&self.matrix - &other.matrix).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// Row-major (re, im) pairs, for serialization.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim()).map(|i| (0..self.dim()).map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im]).collect()).collect()
    }
}

fn check_subsystems(dims: &[usize], subsystems: &[usize]) -> Result<()> {
    for (k, &t) in subsystems.iter().enumerate() {
        if t >= dims.len() || subsystems[..k].contains(&t) {
            return Err(CollapseError::Domain(format!("invalid subsystem set {subsystems:?} for dims {dims:?}")));
        }
    }
    Ok(())
}

/// Which measurement, if any, has registered before the density matrix is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Registration {
    /// The projector |s⟩⟨s| itself.
    None,
    /// A local measurement of the system alone: coherences between different
    /// system pointer states are gone, everything else stays coherent.
    System,
}

/// Reduced density matrix of `s` after `registration`, with `traced_out`
/// subsystems traced away.
pub fn pure_density(s: &TensorState, traced_out: &[usize], registration: Registration) -> Result<DensityMatrix> {
    check_subsystems(&s.dims, traced_out)?;
    let keep: Vec<usize> = (0..s.dims.len()).filter(|k| !traced_out.contains(k)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| s.dims[k]).collect();
    let kd = product(&kept_dims);
    if kd > MAX_DENSITY_DIM {
        return Err(CollapseError::Domain(format!("reduced dimension {kd} exceeds {MAX_DENSITY_DIM}")));
    }
    let td = s.amplitudes.len() / kd;
    let norm_sqr = s.norm().powi(2);
    let traced_dims: Vec<usize> = traced_out.iter().map(|&k| s.dims[k]).collect();
    let _ = traced_dims;

    // amplitudes regrouped as (kept index, traced index) per system label
    let sys_labels = match registration {
        Registration::None => vec![None],
        Registration::System => (0..s.dims[SYSTEM]).map(Some).collect(),
    };
    let mut rho = DMatrix::from_element(kd, kd, ZERO);
    for sys in sys_labels {
        let mut block = DMatrix::from_element(kd, td, ZERO);
        for (idx, a) in s.amplitudes.iter().enumerate() {
            let l = decode(idx, &s.dims);
            if sys.is_some_and(|k| l[SYSTEM] != k) {
                continue;
            }
            let ki = keep.iter().fold(0, |acc, &k| acc * s.dims[k] + l[k]);
            let ti = traced_out.iter().fold(0, |acc, &k| acc * s.dims[k] + l[k]);
            block[(ki, ti)] = *a;
        }
        rho += &block * block.adjoint();
    }
    rho /= Complex64::new(norm_sqr, 0.0);
    Ok(DensityMatrix { dims: kept_dims, matrix: rho })
}

/// The branch-diagonal matrix on system ⊗ env1 recording which branch
/// |k⟩|i⟩ registered, with probabilities equal to the branch weights.
pub fn branch_density(s: &TensorState) -> Result<DensityMatrix> {
    let b = branches(s)?;
    let env = s.dims[ENV1];
    let norm_sqr = s.norm().powi(2);
    let mut m = DMatrix::from_element(2 * env, 2 * env, ZERO);
    for (k, i, a) in b {
        m[(k * env + i, k * env + i)] = Complex64::new(a.norm_sqr() / norm_sqr, 0.0);
    }
    Ok(DensityMatrix { dims: vec![2, env], matrix: m })
}

/// Frobenius norm of the within-branch coherences that separate the
/// system-registered and branch-registered matrices of
/// [`equal_weight_state`]`(n, m)`: √(n(n−1) + m(m−1)) / (n + m).
pub fn coherence_block_norm(n: usize, m: usize) -> f64 {
    ((n * (n - 1) + m * (m - 1)) as f64).sqrt() / (n + m) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn two_branch_state() {
        let s = equal_weight_state(1, 1).unwrap();
        assert_eq!(s.dims(), &[2, 2]);
        assert!((s.amplitude(&[0, 0]).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitude(&[1, 1]).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(s.amplitude(&[0, 1]), ZERO);
    }

    #[test]
    fn unequal_weights() {
        let s = equal_weight_state(3, 1).unwrap();
        let w = s.system_weights();
        assert!((w[0] - 0.75).abs() < 1e-15 && (w[1] - 0.25).abs() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_branch_count_rejected() {
        assert!(matches!(equal_weight_state(0, 2), Err(CollapseError::Domain(_))));
        assert!(matches!(equal_weight_state(2, 0), Err(CollapseError::Domain(_))));
    }

    #[test]
    fn ghz_extension() {
        let s = extend_with_second_env(&equal_weight_state(1, 1).unwrap()).unwrap();
        assert_eq!(s.dims(), &[2, 2, 2]);
        assert!((s.amplitude(&[0, 0, 0]).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitude(&[1, 1, 1]).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extension_rejects_non_branch_states() {
        let amps = vec![Complex64::new(0.5, 0.0); 4];
        let s = TensorState::new(vec![2, 2], amps).unwrap();
        assert!(matches!(extend_with_second_env(&s), Err(CollapseError::Domain(_))));
        let three = extend_with_second_env(&equal_weight_state(1, 2).unwrap()).unwrap();
        assert!(extend_with_second_env(&three).is_err());
    }

    #[test]
    fn tracing_env2_gives_branch_diagonal() {
        let s = extend_with_second_env(&equal_weight_state(2, 1).unwrap()).unwrap();
        let reduced = pure_density(&s, &[ENV2], Registration::None).unwrap();
        let branch = branch_density(&s).unwrap();
        assert!(reduced.frobenius_distance(&branch).unwrap() < 1e-15);
    }

    #[test]
    fn swap_is_an_involution() {
        let s = equal_weight_state(2, 3).unwrap();
        let op = SwapOp::local(ENV1, 0, 4);
        let twice = apply_swap(&apply_swap(&s, &op).unwrap(), &op).unwrap();
        assert_eq!(twice, s);
    }

    #[test]
    fn swap_label_range_checked() {
        let s = equal_weight_state(1, 1).unwrap();
        assert!(matches!(apply_swap(&s, &SwapOp::local(SYSTEM, 0, 2)), Err(CollapseError::Domain(_))));
        assert!(matches!(apply_swap(&s, &SwapOp::local(3, 0, 1)), Err(CollapseError::Domain(_))));
        let overlapping = SwapOp::local_many(ENV1, &[(0, 1), (1, 0)]);
        assert!(apply_swap(&s, &overlapping).is_err());
    }

    #[test]
    fn equal_state_swaps_undo_each_other() {
        let s = equal_weight_state(1, 1).unwrap();
        let c = check_envariance(&s, (&SwapOp::local(SYSTEM, 0, 1), &SwapOp::local(ENV1, 0, 1))).unwrap();
        assert!(c.invariant);
        assert_eq!(c.distance, 0.0);
    }

    #[test]
    fn unequal_system_swap_is_not_undone() {
        let s = equal_weight_state(2, 1).unwrap();
        let swapped = apply_swap(&s, &SwapOp::local(SYSTEM, 0, 1)).unwrap();
        assert!(s.inner(&swapped).norm() < 1.0);
        for a in 0..3 {
            for b in (a + 1)..3 {
                let c = check_envariance(&s, (&SwapOp::local(SYSTEM, 0, 1), &SwapOp::local(ENV1, a, b))).unwrap();
                assert!(!c.invariant);
                assert!(c.overlap < 1.0);
            }
        }
    }

    #[test]
    fn joint_swap_undone_by_second_environment() {
        let s = extend_with_second_env(&equal_weight_state(2, 1).unwrap()).unwrap();
        let joint = SwapOp::joint(vec![SYSTEM, ENV1], vec![0, 0], vec![1, 2]);
        let env2 = SwapOp::local(ENV2, 0, 2);
        assert!(check_envariance(&s, (&joint, &env2)).unwrap().invariant);
        assert!(!check_envariance(&s, (&joint, &SwapOp::local(ENV2, 0, 1))).unwrap().invariant);
    }

    #[test]
    fn global_phase_is_tolerated() {
        let s = equal_weight_state(1, 1).unwrap();
        let phased = TensorState::new(
            s.dims().to_vec(),
            s.amplitudes().iter().map(|a| a * Complex64::from_polar(1.0, 0.7)).collect(),
        )
        .unwrap();
        // a swap pair that is the identity on this state
        let c = check_envariance(&phased, (&SwapOp::local(SYSTEM, 0, 1), &SwapOp::local(ENV1, 0, 1))).unwrap();
        assert!(c.invariant);
    }

    #[test]
    fn full_trace_is_one() {
        let s = extend_with_second_env(&equal_weight_state(2, 3).unwrap()).unwrap();
        let r = pure_density(&s, &[SYSTEM, ENV1, ENV2], Registration::None).unwrap();
        assert_eq!(r.dim(), 1);
        assert!((r.entry(0, 0) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn system_registration_keeps_within_branch_coherence() {
        let s = equal_weight_state(2, 1).unwrap();
        let rho = pure_density(&s, &[], Registration::System).unwrap();
        assert_eq!(rho.dim(), 6);
        // |0⟩|0⟩⟨1|⟨0| coherence survives
        assert!((rho.entry(0, 1) - 1.0 / 3.0).norm() < 1e-15);
        // |0⟩|0⟩⟨2|⟨1| does not
        assert_eq!(rho.entry(0, 5), ZERO);
        rho.validate().unwrap();
        let plain = pure_density(&s, &[], Registration::None).unwrap();
        assert!((plain.entry(0, 5) - 1.0 / 3.0).norm() < 1e-15);
    }

    #[test]
    fn branch_density_values() {
        let b = branch_density(&equal_weight_state(1, 1).unwrap()).unwrap();
        assert!((b.entry(0, 0).re - 0.5).abs() < 1e-15);
        assert!((b.entry(3, 3).re - 0.5).abs() < 1e-15);
        let b = branch_density(&equal_weight_state(2, 1).unwrap()).unwrap();
        for (i, j) in [(0, 0), (1, 1), (5, 5)] {
            assert!((b.entry(i, j).re - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(b.hermiticity_error() == 0.0);
    }

    #[test]
    fn registration_gap_is_the_coherence_block() {
        let s = equal_weight_state(2, 1).unwrap();
        let p = pure_density(&s, &[], Registration::System).unwrap();
        let b = branch_density(&s).unwrap();
        let d = p.frobenius_distance(&b).unwrap();
        assert!((d - 2f64.sqrt() / 3.0).abs() < 1e-15);
        assert!((coherence_block_norm(2, 1) - 2f64.sqrt() / 3.0).abs() < 1e-16);
    }

    #[test]
    fn random_states_give_valid_densities() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let dims = vec![2, 3, 2];
            let amps = (0..12).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            let s = TensorState::new(dims, amps).unwrap();
            for traced in [vec![], vec![ENV2], vec![ENV1, ENV2], vec![SYSTEM]] {
                for reg in [Registration::None, Registration::System] {
                    pure_density(&s, &traced, reg).unwrap().validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn density_partial_trace_matches_direct_reduction() {
        let s = extend_with_second_env(&equal_weight_state(2, 2).unwrap()).unwrap();
        let full = pure_density(&s, &[], Registration::System).unwrap();
        let direct = pure_density(&s, &[ENV1, ENV2], Registration::System).unwrap();
        let via = full.partial_trace(&[ENV1, ENV2]).unwrap();
        assert!(via.frobenius_distance(&direct).unwrap() < 1e-15);
    }
}
