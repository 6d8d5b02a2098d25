//! The general linear generator Ĝ of two-state evolution, `∂ₜψ = −iĜψ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, Mat2};

/// The 2×2 matrix
///
/// ```text
/// ⎡ αr + iαi   βr + iβi ⎤
/// ⎣ γr + iγi   δr + iδi ⎦
/// ```
///
/// in the pointer basis {|0⟩, |1⟩}. Entries have units of inverse time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub alpha_r: f64,
    pub alpha_i: f64,
    pub beta_r: f64,
    pub beta_i: f64,
    pub gamma_r: f64,
    pub gamma_i: f64,
    pub delta_r: f64,
    pub delta_i: f64,
}

/// Tolerance used by the `is_*` predicates, relative to the largest entry.
pub const STRUCTURE_TOL: f64 = 1e-12;

impl Generator {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Parameters in the order αr, αi, βr, βi, γr, γi, δr, δi.
    pub fn from_params(p: [f64; 8]) -> Self {
        Self {
            alpha_r: p[0],
            alpha_i: p[1],
            beta_r: p[2],
            beta_i: p[3],
            gamma_r: p[4],
            gamma_i: p[5],
            delta_r: p[6],
            delta_i: p[7],
        }
    }

    pub fn params(&self) -> [f64; 8] {
        [
            self.alpha_r,
            self.alpha_i,
            self.beta_r,
            self.beta_i,
            self.gamma_r,
            self.gamma_i,
            self.delta_r,
            self.delta_i,
        ]
    }

    /// Diagonal generator whose anti-Hermitian part pulls towards |0⟩ when
    /// `rate > 0` (αi − δi = rate, split symmetrically).
    pub fn diagonal_damping(rate: f64) -> Self {
        Self { alpha_i: rate / 2.0, delta_i: -rate / 2.0, ..Self::default() }
    }

    /// ω·σ_y, the Rabi-rotation Hamiltonian.
    pub fn sigma_y(omega: f64) -> Self {
        Self { beta_i: -omega, gamma_i: omega, ..Self::default() }
    }

    pub fn from_matrix(m: &Mat2) -> Self {
        Self {
            alpha_r: m[0][0].re,
            alpha_i: m[0][0].im,
            beta_r: m[0][1].re,
            beta_i: m[0][1].im,
            gamma_r: m[1][0].re,
            gamma_i: m[1][0].im,
            delta_r: m[1][1].re,
            delta_i: m[1][1].im,
        }
    }

    pub fn matrix(&self) -> Mat2 {
        [
            [Complex64::new(self.alpha_r, self.alpha_i), Complex64::new(self.beta_r, self.beta_i)],
            [Complex64::new(self.gamma_r, self.gamma_i), Complex64::new(self.delta_r, self.delta_i)],
        ]
    }

    /// (Ĝ + Ĝ†)/2
    pub fn hermitian_part(&self) -> Self {
        Self {
            alpha_r: self.alpha_r,
            alpha_i: 0.0,
            beta_r: 0.5 * (self.beta_r + self.gamma_r),
            beta_i: 0.5 * (self.beta_i - self.gamma_i),
            gamma_r: 0.5 * (self.beta_r + self.gamma_r),
            gamma_i: 0.5 * (self.gamma_i - self.beta_i),
            delta_r: self.delta_r,
            delta_i: 0.0,
        }
    }

    /// (Ĝ − Ĝ†)/2
    pub fn antihermitian_part(&self) -> Self {
        Self {
            alpha_r: 0.0,
            alpha_i: self.alpha_i,
            beta_r: 0.5 * (self.beta_r - self.gamma_r),
            beta_i: 0.5 * (self.beta_i + self.gamma_i),
            gamma_r: 0.5 * (self.gamma_r - self.beta_r),
            gamma_i: 0.5 * (self.gamma_i + self.beta_i),
            delta_r: 0.0,
            delta_i: self.delta_i,
        }
    }

    fn scale(&self) -> f64 {
        self.params().iter().fold(0.0f64, |m, p| m.max(p.abs())).max(1.0)
    }

    pub fn is_hermitian(&self) -> bool {
        let tol = STRUCTURE_TOL * self.scale();
        self.alpha_i.abs() <= tol && self.delta_i.abs() <= tol && self.has_diagonal_antihermitian()
    }

    /// Pointer-basis condition: the anti-Hermitian part is diagonal in {|0⟩, |1⟩}.
    pub fn has_diagonal_antihermitian(&self) -> bool {
        let tol = STRUCTURE_TOL * self.scale();
        (self.beta_r - self.gamma_r).abs() <= tol && (self.beta_i + self.gamma_i).abs() <= tol
    }

    pub fn is_diagonal(&self) -> bool {
        self.beta_r == 0.0 && self.beta_i == 0.0 && self.gamma_r == 0.0 && self.gamma_i == 0.0
    }

    /// Entrywise sum.
    pub fn plus(&self, other: &Generator) -> Self {
        let (a, b) = (self.params(), other.params());
        Self::from_params(std::array::from_fn(|k| a[k] + b[k]))
    }

    pub fn apply(&self, v: &[Complex64; 2]) -> [Complex64; 2] {
        linalg::mat_vec(&self.matrix(), v)
    }
}
