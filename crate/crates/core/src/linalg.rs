//! Small dense helpers for 2×2 complex matrices.

use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn mat_vec(m: &Mat2, v: &[Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn scale(m: &Mat2, c: Complex64) -> Mat2 {
    [[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]]
}

pub fn add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn adjoint(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

/// Max-abs-entry norm.
pub fn max_norm(m: &Mat2) -> f64 {
    m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

/// 1-norm (max column sum).
pub fn one_norm(m: &Mat2) -> f64 {
    (0..2).map(|j| m[0][j].norm() + m[1][j].norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &Mat2, tol: f64) -> bool {
    let scale = max_norm(m).max(1.0);
    (m[0][0].im.abs() <= tol * scale)
        && (m[1][1].im.abs() <= tol * scale)
        && ((m[0][1] - m[1][0].conj()).norm() <= tol * scale)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm_series(m: &Mat2) -> Mat2 {
    let norm = one_norm(m);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = scale(m, Complex64::new(0.5f64.powi(squarings as i32), 0.0));
    let mut term = identity();
    let mut sum = identity();
    for k in 1..=24 {
        term = scale(&mat_mul(&term, &scaled), Complex64::new(1.0 / k as f64, 0.0));
        sum = add(&sum, &term);
        if max_norm(&term) < 1e-18 * max_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = mat_mul(&sum, &sum);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_diagonal() {
        let m = [[Complex64::new(0.3, -1.2), ZERO], [ZERO, Complex64::new(-2.0, 0.5)]];
        let e = expm_series(&m);
        assert!((e[0][0] - m[0][0].exp()).norm() < 1e-14);
        assert!((e[1][1] - m[1][1].exp()).norm() < 1e-13);
        assert_eq!(e[0][1], ZERO);
    }

    #[test]
    fn exp_of_nilpotent() {
        // exp([[0, 1], [0, 0]] t) = [[1, t], [0, 1]]
        let t = 3.7;
        let m = [[ZERO, Complex64::new(t, 0.0)], [ZERO, ZERO]];
        let e = expm_series(&m);
        assert!((e[0][1] - t).norm() < 1e-13);
        assert!((e[0][0] - 1.0).norm() < 1e-13);
        assert!((e[1][1] - 1.0).norm() < 1e-13);
    }
}
