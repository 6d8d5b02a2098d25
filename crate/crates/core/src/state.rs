//! Two-state rays and their Bloch-sphere parameterization.
//!
//! A state is written as
//!
//! ```text
//! |ψ⟩ = n e^{iχ} [ e^{iφ/2} cos(θ/2) |0⟩ + e^{-iφ/2} sin(θ/2) |1⟩ ]
//! ```
//!
//! with θ ∈ [0, π] the polar angle, φ the azimuth, χ a global phase and n the
//! norm. Only (θ, φ) are observable; (χ, n) are gauge.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CollapseError, Result};

/// `sin θ` below this is treated as a pole.
pub const POLE_EPS: f64 = 1e-12;

/// Reduce an angle into `[0, 2π)`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Coefficients of |0⟩ and |1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitudes {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl Amplitudes {
    pub fn new(a0: Complex64, a1: Complex64) -> Self {
        Self { a0, a1 }
    }

    pub fn from_real(a0: f64, a1: f64) -> Self {
        Self::new(Complex64::new(a0, 0.0), Complex64::new(a1, 0.0))
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.a0, self.a1]
    }

    pub fn from_array(v: [Complex64; 2]) -> Self {
        Self::new(v[0], v[1])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.a0.norm().hypot(self.a1.norm())
    }

    pub fn is_zero(&self) -> bool {
        self.a0 == Complex64::new(0.0, 0.0) && self.a1 == Complex64::new(0.0, 0.0)
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Amplitudes) -> Complex64 {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.a0 * c, self.a1 * c)
    }

    /// Largest componentwise distance, relative to the larger of the two norms.
    pub fn relative_distance(&self, other: &Amplitudes) -> f64 {
        let d = (self.a0 - other.a0).norm().max((self.a1 - other.a1).norm());
        let scale = self.norm().max(other.norm());
        if scale == 0.0 {
            d
        } else {
            d / scale
        }
    }

    /// 1 − |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩): zero iff both describe the same ray.
    pub fn ray_infidelity(&self, other: &Amplitudes) -> f64 {
        let ov = self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr());
        (1.0 - ov).max(0.0)
    }
}

/// Bloch-sphere coordinates of a (not necessarily normalized) two-state ray.
///
/// Constructed values are canonical: θ ∈ [0, π], φ and χ in `[0, 2π)`, and
/// φ = 0 at the poles with the dropped azimuth absorbed into χ.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BlochState {
    theta: f64,
    phi: f64,
    chi: f64,
    n: f64,
}

impl BlochState {
    /// Build a canonical state. θ outside `[0, π]` is reflected back onto the
    /// sphere (θ → −θ or 2π − θ, φ → φ + π) with χ adjusted so the
    /// amplitudes are unchanged.
    pub fn new(theta: f64, phi: f64, chi: f64, n: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite() && chi.is_finite() && n.is_finite()) {
            return Err(CollapseError::InvalidState(format!(
                "non-finite coordinates ({theta}, {phi}, {chi}, {n})"
            )));
        }
        if n <= 0.0 {
            return Err(CollapseError::InvalidState(format!("norm must be positive, got {n}")));
        }
        // θ → θ − 2πk multiplies both amplitudes by (−1)^k
        let turns = (theta / TAU).floor();
        let (mut theta, mut phi, mut chi) = (theta - turns * TAU, phi, chi + turns * PI);
        if theta > PI {
            theta = TAU - theta;
            phi += PI;
            chi += FRAC_PI_2;
        }
        Ok(Self::canonical(theta, phi, chi, n))
    }

    /// Unit-norm, zero-phase state at (θ, φ).
    pub fn on_sphere(theta: f64, phi: f64) -> Result<Self> {
        Self::new(theta, phi, 0.0, 1.0)
    }

    fn canonical(theta: f64, phi: f64, chi: f64, n: f64) -> Self {
        let theta = theta.clamp(0.0, PI);
        let (phi, chi) = if theta == 0.0 {
            (0.0, chi + phi / 2.0)
        } else if theta == PI {
            (0.0, chi - phi / 2.0)
        } else {
            (phi, chi)
        };
        // φ → φ − 2πk flips the sign of both amplitudes when k is odd
        let wraps = (phi / TAU).floor();
        let (phi, chi) = (reduce_angle(phi - wraps * TAU), chi + wraps * PI);
        Self { theta, phi, chi: reduce_angle(chi), n }
    }

    pub fn north() -> Self {
        Self { theta: 0.0, phi: 0.0, chi: 0.0, n: 1.0 }
    }

    pub fn south() -> Self {
        Self { theta: PI, phi: 0.0, chi: 0.0, n: 1.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn is_pole(&self) -> bool {
        self.theta.sin() < POLE_EPS
    }

    /// Weight of |0⟩, cos²(θ/2).
    pub fn weight0(&self) -> f64 {
        let c = (self.theta / 2.0).cos();
        c * c
    }

    /// Same ray with the gauge fixed to n = 1, χ = 0.
    pub fn renormalized(&self) -> Self {
        Self { theta: self.theta, phi: self.phi, chi: 0.0, n: 1.0 }
    }

    pub fn with_gauge(&self, chi: f64, n: f64) -> Result<Self> {
        Self::new(self.theta, self.phi, chi, n)
    }

    /// Great-circle angle between the two Bloch vectors.
    pub fn bloch_angle_to(&self, other: &BlochState) -> f64 {
        let (a, b) = (self.unit_vector(), other.unit_vector());
        let dot = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
        dot.acos()
    }

    /// Bloch vector (⟨σx⟩, ⟨σy⟩, ⟨σz⟩) of the normalized ray.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, -st * sp, ct]
    }

    /// Coordinate comparison with tolerance; φ is ignored when both states
    /// sit within `tol` of the same pole.
    pub fn approx_eq(&self, other: &BlochState, tol: f64) -> bool {
        let dang = |a: f64, b: f64| {
            let d = reduce_angle(a - b);
            d.min(TAU - d)
        };
        let near_pole = |t: f64| t < tol || PI - t < tol;
        if (self.theta - other.theta).abs() > tol || dang(self.chi, other.chi) > tol {
            return false;
        }
        if (self.n - other.n).abs() > tol * self.n.max(other.n) {
            return false;
        }
        if near_pole(self.theta) && near_pole(other.theta) {
            return true;
        }
        dang(self.phi, other.phi) <= tol
    }
}

impl PartialEq for BlochState {
    fn eq(&self, other: &Self) -> bool {
        let pole = self.theta == 0.0 || self.theta == PI;
        self.theta == other.theta
            && self.chi == other.chi
            && self.n == other.n
            && (pole || self.phi == other.phi)
    }
}

/// Invert the Bloch parameterization.
pub fn bloch_from_amplitudes(a: &Amplitudes) -> Result<BlochState> {
    if a.is_zero() {
        return Err(CollapseError::InvalidState("both amplitudes are zero".into()));
    }
    if !(a.a0.is_finite() && a.a1.is_finite()) {
        return Err(CollapseError::InvalidState("non-finite amplitudes".into()));
    }
    let (m0, m1) = (a.a0.norm(), a.a1.norm());
    let n = m0.hypot(m1);
    let theta = 2.0 * m1.atan2(m0);
    if m1 == 0.0 {
        return Ok(BlochState { theta: 0.0, phi: 0.0, chi: reduce_angle(a.a0.arg()), n });
    }
    if m0 == 0.0 {
        return Ok(BlochState { theta: PI, phi: 0.0, chi: reduce_angle(a.a1.arg()), n });
    }
    let (p0, p1) = (a.a0.arg(), a.a1.arg());
    let phi_raw = p0 - p1;
    let chi_raw = 0.5 * (p0 + p1);
    // shifting φ by 2π flips e^{iφ/2}; compensate with χ → χ − π
    let wraps = (phi_raw / TAU).floor();
    let phi = phi_raw - wraps * TAU;
    let chi = chi_raw + wraps * PI;
    Ok(BlochState::canonical(theta, phi, chi, n))
}

/// Rebuild the amplitudes of a Bloch state.
pub fn amplitudes_from_bloch(s: &BlochState) -> Amplitudes {
    let half_s = (s.theta / 2.0).sin();
    // exact zero at the south pole
    let half_c = (FRAC_PI_2 - s.theta / 2.0).sin();
    let a0 = Complex64::from_polar(s.n * half_c, s.chi + s.phi / 2.0);
    let a1 = Complex64::from_polar(s.n * half_s, s.chi - s.phi / 2.0);
    Amplitudes { a0, a1 }
}

impl TryFrom<Amplitudes> for BlochState {
    type Error = CollapseError;

    fn try_from(a: Amplitudes) -> Result<Self> {
        bloch_from_amplitudes(&a)
    }
}

impl From<BlochState> for Amplitudes {
    fn from(s: BlochState) -> Self {
        amplitudes_from_bloch(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn north_pole_from_amplitudes() {
        let s = bloch_from_amplitudes(&Amplitudes::from_real(1.0, 0.0)).unwrap();
        assert_eq!(s.theta(), 0.0);
        assert_eq!(s.n(), 1.0);
        assert_eq!(s.chi(), 0.0);
    }

    #[test]
    fn equator_from_amplitudes() {
        let s = bloch_from_amplitudes(&Amplitudes::from_real(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).unwrap();
        assert_abs_diff_eq!(s.theta(), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.phi(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.n(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn phases_split_into_phi_and_chi() {
        let a = Amplitudes::new(
            Complex64::from_polar(0.3_f64.cos(), 0.1),
            Complex64::from_polar(0.3_f64.sin(), -0.1),
        );
        let s = bloch_from_amplitudes(&a).unwrap();
        assert_abs_diff_eq!(s.theta(), 0.6, epsilon = 1e-14);
        assert_abs_diff_eq!(s.phi(), 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(s.chi(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.n(), 1.0, epsilon = 1e-14);
        let back = amplitudes_from_bloch(&s);
        assert!(back.relative_distance(&a) < 1e-12);
    }

    #[test]
    fn zero_amplitudes_rejected() {
        let err = bloch_from_amplitudes(&Amplitudes::from_real(0.0, 0.0)).unwrap_err();
        assert!(matches!(err, CollapseError::InvalidState(_)));
    }

    #[test]
    fn south_pole_keeps_phase_in_chi() {
        let (chi, phi, n) = (0.7, 1.9, 1.5);
        let s = BlochState::new(PI, phi, chi, n).unwrap();
        assert_eq!(s.phi(), 0.0);
        let a = amplitudes_from_bloch(&s);
        assert_eq!(a.a0.norm(), 0.0);
        let expect = Complex64::from_polar(n, chi - phi / 2.0);
        assert!((a.a1 - expect).norm() < 1e-14);
    }

    #[test]
    fn equator_to_amplitudes() {
        let a = amplitudes_from_bloch(&BlochState::on_sphere(PI / 2.0, 0.0).unwrap());
        assert!((a.a0 - FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((a.a1 - FRAC_1_SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn general_state_round_trips() {
        let s = BlochState::new(0.6, 0.2, 0.5, 2.0).unwrap();
        let back = bloch_from_amplitudes(&amplitudes_from_bloch(&s)).unwrap();
        assert!(back.approx_eq(&s, 1e-12), "{back:?} vs {s:?}");
    }

    #[test]
    fn pole_equality_ignores_phi() {
        let a = BlochState { theta: 0.0, phi: 1.0, chi: 0.2, n: 1.0 };
        let b = BlochState { theta: 0.0, phi: 2.5, chi: 0.2, n: 1.0 };
        assert_eq!(a, b);
        let c = BlochState { theta: 0.3, phi: 1.0, chi: 0.2, n: 1.0 };
        let d = BlochState { theta: 0.3, phi: 2.5, chi: 0.2, n: 1.0 };
        assert_ne!(c, d);
    }

    #[test]
    fn reflection_preserves_amplitudes() {
        for (theta, phi, chi) in [(-0.4, 0.3, 1.1), (PI + 0.4, 0.3, 1.1), (3.0 * PI + 0.2, 5.0, -2.0)] {
            let s = BlochState::new(theta, phi, chi, 1.3).unwrap();
            assert!((0.0..=PI).contains(&s.theta()));
            let direct = {
                let (hs, hc) = (theta / 2.0).sin_cos();
                Amplitudes::new(
                    Complex64::from_polar(1.3, chi + phi / 2.0) * hc,
                    Complex64::from_polar(1.3, chi - phi / 2.0) * hs,
                )
            };
            assert!(amplitudes_from_bloch(&s).relative_distance(&direct) < 1e-12, "theta={theta}");
        }
    }

    #[test]
    fn reduce_angle_never_returns_tau() {
        assert_eq!(reduce_angle(-1e-18), 0.0);
        assert!(reduce_angle(-1e-3) < TAU);
        assert_abs_diff_eq!(reduce_angle(7.0), 7.0 - TAU, epsilon = 1e-15);
    }

    fn complex() -> impl Strategy<Value = Complex64> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(r, i)| Complex64::new(r, i))
    }

    proptest! {
        #[test]
        fn amplitudes_round_trip(a0 in complex(), a1 in complex()) {
            let a = Amplitudes::new(a0, a1);
            prop_assume!(a.norm() > 1e-6);
            let s = bloch_from_amplitudes(&a).unwrap();
            prop_assert!((0.0..=PI).contains(&s.theta()));
            prop_assert!((0.0..TAU).contains(&s.phi()));
            prop_assert!((0.0..TAU).contains(&s.chi()));
            let back = amplitudes_from_bloch(&s);
            prop_assert!(back.relative_distance(&a) < 1e-12);
        }

        #[test]
        fn bloch_round_trip(theta in 1e-3..(PI - 1e-3), phi in 0.0..TAU, chi in 0.0..TAU, n in 0.1..10.0f64) {
            let s = BlochState::new(theta, phi, chi, n).unwrap();
            let back = bloch_from_amplitudes(&amplitudes_from_bloch(&s)).unwrap();
            prop_assert!(back.approx_eq(&s, 1e-12), "{:?} vs {:?}", back, s);
        }
    }
}
