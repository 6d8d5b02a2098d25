//! Exact evolution under a time-independent generator.
//!
//! For a diagonalizable Ĝ with eigenpairs (λₖ, ψₖ),
//! `ψ(t) = Σₖ e^{−iλₖt} Cₖ ψₖ`. When Ĝ is not normal the eigenvectors are not
//! orthogonal, so the coefficients Cₖ are taken from the dual (left
//! eigenvector) basis, i.e. `C = V⁻¹ ψ(0)` with V = [ψ₁ ψ₂]. Defective
//! generators fall back to a series matrix exponential.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CollapseError, Result};
use crate::generator::Generator;
use crate::linalg::{self, Mat2, ZERO};
use crate::state::Amplitudes;

/// Eigenvector matrices with a 2-norm condition number above this are
/// treated as defective.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    /// Unit-norm eigenvectors.
    pub psi1: Amplitudes,
    pub psi2: Amplitudes,
    /// 2-norm condition number of [ψ₁ ψ₂]; infinite when they coincide.
    pub condition: f64,
    pub defective: bool,
}

impl EigenDecomposition {
    /// Dual-basis coefficients C with ψ = C₁ψ₁ + C₂ψ₂. `None` when defective.
    pub fn coefficients(&self, psi: &Amplitudes) -> Option<[Complex64; 2]> {
        if self.defective {
            return None;
        }
        let (v1, v2) = (self.psi1, self.psi2);
        let det = v1.a0 * v2.a1 - v2.a0 * v1.a1;
        Some([(v2.a1 * psi.a0 - v2.a0 * psi.a1) / det, (v1.a0 * psi.a1 - v1.a1 * psi.a0) / det])
    }
}

fn unit(v: [Complex64; 2]) -> Amplitudes {
    let a = Amplitudes::from_array(v);
    let n = a.norm();
    a.scale(Complex64::new(1.0 / n, 0.0))
}

fn eigenvector(m: &Mat2, lambda: Complex64, tiny: f64) -> Option<Amplitudes> {
    let u = [m[0][1], lambda - m[0][0]];
    let w = [lambda - m[1][1], m[1][0]];
    let nu = u[0].norm().hypot(u[1].norm());
    let nw = w[0].norm().hypot(w[1].norm());
    if nu.max(nw) <= tiny {
        None
    } else if nu >= nw {
        Some(unit(u))
    } else {
        Some(unit(w))
    }
}

/// Eigenvalues and right eigenvectors of Ĝ. λ₁ = m + s, λ₂ = m − s with m the
/// half trace and s the principal root of the discriminant.
pub fn eigen_decomposition(g: &Generator) -> EigenDecomposition {
    let m = g.matrix();
    let half_trace = (m[0][0] + m[1][1]) * 0.5;
    let half_diff = (m[0][0] - m[1][1]) * 0.5;
    let disc = (half_diff * half_diff + m[0][1] * m[1][0]).sqrt();
    let (lambda1, lambda2) = (half_trace + disc, half_trace - disc);
    let tiny = 1e-14 * linalg::max_norm(&m).max(f64::MIN_POSITIVE);

    let e0 = Amplitudes::new(linalg::ONE, ZERO);
    let e1 = Amplitudes::new(ZERO, linalg::ONE);
    let (psi1, psi2) = match (eigenvector(&m, lambda1, tiny), eigenvector(&m, lambda2, tiny)) {
        (Some(a), Some(b)) => (a, b),
        // Ĝ is (numerically) a multiple of the identity
        (None, None) => (e0, e1),
        (Some(a), None) => (a, orthogonal_to(&a)),
        (None, Some(b)) => (orthogonal_to(&b), b),
    };

    let det = (psi1.a0 * psi2.a1 - psi2.a0 * psi1.a1).norm();
    let condition = if det == 0.0 { f64::INFINITY } else { (1.0 + (1.0 - det * det).max(0.0).sqrt()) / det };
    EigenDecomposition { lambda1, lambda2, psi1, psi2, condition, defective: condition > DEFECTIVE_CONDITION }
}

fn orthogonal_to(a: &Amplitudes) -> Amplitudes {
    Amplitudes::new(-a.a1.conj(), a.a0.conj())
}

/// ψ(t) for a time-independent generator.
pub fn exact_evolve(g: &Generator, psi0: &Amplitudes, t: f64) -> Amplitudes {
    let minus_i_t = Complex64::new(0.0, -t);
    if g.is_diagonal() {
        let m = g.matrix();
        return Amplitudes::new(psi0.a0 * (minus_i_t * m[0][0]).exp(), psi0.a1 * (minus_i_t * m[1][1]).exp());
    }
    let eig = eigen_decomposition(g);
    match eig.coefficients(psi0) {
        Some([c1, c2]) => {
            let f1 = (minus_i_t * eig.lambda1).exp() * c1;
            let f2 = (minus_i_t * eig.lambda2).exp() * c2;
            Amplitudes::new(f1 * eig.psi1.a0 + f2 * eig.psi2.a0, f1 * eig.psi1.a1 + f2 * eig.psi2.a1)
        }
        None => {
            let u = linalg::expm_series(&linalg::scale(&g.matrix(), minus_i_t));
            Amplitudes::from_array(linalg::mat_vec(&u, &psi0.as_array()))
        }
    }
}

/// ⟨ψ|Ô|ψ⟩ / ⟨ψ|ψ⟩ for a Hermitian observable.
pub fn expectation(observable: &Mat2, psi: &Amplitudes) -> Result<f64> {
    if psi.is_zero() {
        return Err(CollapseError::InvalidState("expectation of the zero vector".into()));
    }
    if !linalg::is_hermitian(observable, 1e-12) {
        return Err(CollapseError::Domain("observable is not Hermitian".into()));
    }
    let o_psi = linalg::mat_vec(observable, &psi.as_array());
    Ok(psi.inner(&Amplitudes::from_array(o_psi)).re / psi.norm_sqr())
}
