//! Fixed points of the projective flow generated by a constant Ĝ.
//!
//! Each eigenvector of Ĝ is a fixed ray. Its weight grows like e^{Im λ t}, so
//! the eigenvector with the larger Im λ attracts and the other repels. Equal
//! imaginary parts give two centres; a defective Ĝ has a single fixed point
//! that every flow line eventually reaches.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::evolution::eigen_decomposition;
use crate::generator::Generator;
use crate::state::{bloch_from_amplitudes, BlochState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Character {
    Attractive,
    Repulsive,
    Center,
    HalfAttractive,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FixedPoint {
    pub location: BlochState,
    pub eigenvalue: Complex64,
    pub character: Character,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub points: Vec<FixedPoint>,
}

impl FixedPointReport {
    pub fn attractive(&self) -> Option<&FixedPoint> {
        self.points.iter().find(|p| p.character == Character::Attractive)
    }

    pub fn repulsive(&self) -> Option<&FixedPoint> {
        self.points.iter().find(|p| p.character == Character::Repulsive)
    }
}

/// Relative tolerance on Im λ₁ − Im λ₂ below which both points are centres.
pub const CENTER_TOL: f64 = 1e-10;

pub fn classify_fixed_points(g: &Generator) -> FixedPointReport {
    let eig = eigen_decomposition(g);
    // unit eigenvectors are never zero
    let loc = |v| bloch_from_amplitudes(&v).expect("unit eigenvector").renormalized();
    if eig.defective {
        return FixedPointReport {
            points: vec![FixedPoint {
                location: loc(eig.psi1),
                eigenvalue: eig.lambda1,
                character: Character::HalfAttractive,
            }],
        };
    }
    let scale = eig.lambda1.norm().max(eig.lambda2.norm()).max(1.0);
    let gap = eig.lambda1.im - eig.lambda2.im;
    let (c1, c2) = if gap.abs() <= CENTER_TOL * scale {
        (Character::Center, Character::Center)
    } else if gap > 0.0 {
        (Character::Attractive, Character::Repulsive)
    } else {
        (Character::Repulsive, Character::Attractive)
    };
    FixedPointReport {
        points: vec![
            FixedPoint { location: loc(eig.psi1), eigenvalue: eig.lambda1, character: c1 },
            FixedPoint { location: loc(eig.psi2), eigenvalue: eig.lambda2, character: c2 },
        ],
    }
}
