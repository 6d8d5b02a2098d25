//! Closed-form 2×2 matrix exponential and coordinate extraction, written
//! independently of the library so it can serve as a reference.

#![allow(dead_code)]

use num_complex::Complex64;

pub type C = Complex64;

/// e^{−iGt} applied to ψ, with G = [[a, b], [c, d]].
///
/// (A − sI)² = q²I for s = tr A / 2, hence e^A = e^s [cosh q · I + sinh q / q · (A − sI)].
pub fn evolve(g: [[C; 2]; 2], psi: [C; 2], t: f64) -> [C; 2] {
    let k = C::new(0.0, -t);
    let a = [[g[0][0] * k, g[0][1] * k], [g[1][0] * k, g[1][1] * k]];
    let s = (a[0][0] + a[1][1]) * 0.5;
    let h = (a[0][0] - a[1][1]) * 0.5;
    let q2 = h * h + a[0][1] * a[1][0];
    let q = q2.sqrt();
    let cosh = q.cosh();
    let sinhc = if q.norm() < 1e-6 { C::new(1.0, 0.0) + q2 / 6.0 + q2 * q2 / 120.0 } else { q.sinh() / q };
    let es = s.exp();
    let m = [
        [es * (cosh + sinhc * h), es * sinhc * a[0][1]],
        [es * sinhc * a[1][0], es * (cosh - sinhc * h)],
    ];
    [m[0][0] * psi[0] + m[0][1] * psi[1], m[1][0] * psi[0] + m[1][1] * psi[1]]
}

/// Amplitudes n e^{iχ}[e^{iφ/2} cos(θ/2), e^{−iφ/2} sin(θ/2)].
pub fn amplitudes(theta: f64, phi: f64, chi: f64, n: f64) -> [C; 2] {
    [
        C::from_polar(n * (theta / 2.0).cos(), chi + phi / 2.0),
        C::from_polar(n * (theta / 2.0).sin(), chi - phi / 2.0),
    ]
}

/// (θ, φ, χ, ln n), with φ and χ not reduced.
pub fn coordinates(psi: [C; 2]) -> (f64, f64, f64, f64) {
    let (r0, r1) = (psi[0].norm(), psi[1].norm());
    let (p0, p1) = (psi[0].arg(), psi[1].arg());
    (2.0 * r1.atan2(r0), p0 - p1, 0.5 * (p0 + p1), 0.5 * (r0 * r0 + r1 * r1).ln())
}

/// Difference of two angles mapped into (−π, π].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let d = (a - b).rem_euclid(tau);
    if d > std::f64::consts::PI {
        d - tau
    } else {
        d
    }
}

/// Finite-difference velocities (θ̇, φ̇, χ̇, d ln n/dt) at (θ, φ, χ, n).
pub fn finite_difference(g: [[C; 2]; 2], theta: f64, phi: f64, chi: f64, n: f64, dt: f64) -> [f64; 4] {
    let psi0 = amplitudes(theta, phi, chi, n);
    let psi1 = evolve(g, psi0, dt);
    let (t0, _, _, l0) = coordinates(psi0);
    let (t1, _, _, l1) = coordinates(psi1);
    // unwrap each amplitude phase separately
    let d0 = angle_diff(psi1[0].arg(), psi0[0].arg());
    let d1 = angle_diff(psi1[1].arg(), psi0[1].arg());
    [(t1 - t0) / dt, (d0 - d1) / dt, 0.5 * (d0 + d1) / dt, (l1 - l0) / dt]
}
