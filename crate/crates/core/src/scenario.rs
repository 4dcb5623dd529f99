//! Physical states of the interferometer protocol.
//!
//! An ancilla enters a Mach-Zehnder interferometer. On arm 1 it shifts
//! subsystem 1 from `|A⟩` to `|B₁⟩ = cos θ₁ |A⟩ + sin θ₁ |A⊥⟩`, on arm 2 it
//! shifts subsystem 2 likewise. An optional environment qubit records
//! which-path information with overlap `γ = ⟨E₁|E₂⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use crate::error::{Error, Result};
use crate::numerics::{c64, LabeledBasis, StateVector, Tensor, C64, ONE, ZERO};

pub const SUB1: &str = "sub1";
pub const SUB2: &str = "sub2";
pub const PATH: &str = "path";
pub const ENV: &str = "env";

/// Slack allowed on the `[0, π/2]` range before an angle is rejected.
const ANGLE_SLACK: f64 = 1e-12;

/// Interaction strength θ ∈ [0, π/2]; π/2 is a projective (strong)
/// interaction, 0 means no interaction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CouplingAngle(f64);

impl CouplingAngle {
    pub const STRONG: CouplingAngle = CouplingAngle(FRAC_PI_2);
    pub const NONE: CouplingAngle = CouplingAngle(0.0);

    pub fn new(theta: f64) -> Result<Self> {
        if !(-ANGLE_SLACK..=FRAC_PI_2 + ANGLE_SLACK).contains(&theta) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: theta,
                range: "[0, pi/2]",
            });
        }
        Ok(Self(theta.clamp(0.0, FRAC_PI_2)))
    }

    /// Inverse of [`CouplingAngle::coupling`]: θ = arccos(1 − x), x ∈ [0, 1].
    pub fn from_coupling(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange {
                name: "x",
                value: x,
                range: "[0, 1]",
            });
        }
        Ok(Self((1.0 - x).acos()))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Dimensionless coupling x = 1 − cos θ.
    pub fn coupling(self) -> f64 {
        1.0 - self.0.cos()
    }
}

/// Environment overlap γ = ⟨E₁|E₂⟩, |γ| ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvOverlap(C64);

impl EnvOverlap {
    /// No decoherence: both arms leave the environment in the same state.
    pub const COHERENT: EnvOverlap = EnvOverlap(ONE);
    /// Perfect which-path record.
    pub const WHICH_PATH: EnvOverlap = EnvOverlap(ZERO);

    pub fn new(gamma: C64) -> Result<Self> {
        let m = gamma.norm();
        if !m.is_finite() || m > 1.0 + 1e-12 {
            return Err(Error::OutOfRange {
                name: "|gamma|",
                value: m,
                range: "[0, 1]",
            });
        }
        Ok(Self(if m > 1.0 { gamma / m } else { gamma }))
    }

    pub fn real(gamma: f64) -> Result<Self> {
        Self::new(c64(gamma, 0.0))
    }

    pub fn value(self) -> C64 {
        self.0
    }
}

impl Default for EnvOverlap {
    fn default() -> Self {
        Self::COHERENT
    }
}

/// One experiment: the two coupling angles and the environment overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub theta1: CouplingAngle,
    pub theta2: CouplingAngle,
    pub gamma: EnvOverlap,
}

impl Scenario {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        Ok(Self {
            theta1: CouplingAngle::new(theta1)?,
            theta2: CouplingAngle::new(theta2)?,
            gamma: EnvOverlap::COHERENT,
        })
    }

    pub fn symmetric(theta: f64) -> Result<Self> {
        Self::new(theta, theta)
    }

    pub fn with_gamma(mut self, gamma: EnvOverlap) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn is_symmetric(&self) -> bool {
        self.theta1 == self.theta2
    }

    /// Same experiment with subsystems and arms exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            theta1: self.theta2,
            theta2: self.theta1,
            gamma: self.gamma,
        }
    }
}

fn qubit(name: &str, amps: [C64; 2]) -> StateVector {
    StateVector::new(LabeledBasis::qubit(name), amps.to_vec()).expect("qubit has dimension 2")
}

/// `|A⟩` for the named subsystem.
pub fn a_state(name: &str) -> StateVector {
    qubit(name, [ONE, ZERO])
}

/// `|B⟩ = cos θ |A⟩ + sin θ |A⊥⟩` on a single factor named `sub`.
pub fn b_state(theta: CouplingAngle) -> StateVector {
    b_state_on("sub", theta)
}

pub fn b_state_on(name: &str, theta: CouplingAngle) -> StateVector {
    let (s, c) = theta.radians().sin_cos();
    qubit(name, [c64(c, 0.0), c64(s, 0.0)])
}

/// `|1⟩` (index 0) or `|2⟩` (index 1) of the path factor.
fn path_state(arm: usize) -> StateVector {
    StateVector::basis_state(LabeledBasis::qubit(PATH), arm).expect("arm is 0 or 1")
}

/// Environment states `|E₁⟩ = (1, 0)`, `|E₂⟩ = (γ, √(1 − |γ|²))`.
pub fn env_states(gamma: EnvOverlap) -> (StateVector, StateVector) {
    let g = gamma.value();
    let rest = (1.0 - g.norm_sqr()).max(0.0).sqrt();
    (qubit(ENV, [ONE, ZERO]), qubit(ENV, [g, c64(rest, 0.0)]))
}

/// Branch of the system state conditioned on the ancilla taking `arm`:
/// `|B₁, A₂⟩` for arm 1 (index 0), `|A₁, B₂⟩` for arm 2 (index 1).
pub fn arm_system_state(s: &Scenario, arm: usize) -> StateVector {
    let (first, second) = if arm == 0 {
        (b_state_on(SUB1, s.theta1), a_state(SUB2))
    } else {
        (a_state(SUB1), b_state_on(SUB2, s.theta2))
    };
    first.tensor(&second).expect("distinct factor names")
}

fn sum(a: &StateVector, b: &StateVector) -> StateVector {
    let amps = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x + y) * FRAC_1_SQRT_2)
        .collect();
    StateVector::new(a.basis().clone(), amps).expect("same basis")
}

/// `(1/√2)[|B₁, A₂⟩|1⟩ + |A₁, B₂⟩|2⟩]` over `sub1 ⊗ sub2 ⊗ path`.
pub fn total_state(s: &Scenario) -> StateVector {
    let arm1 = arm_system_state(s, 0)
        .tensor(&path_state(0))
        .expect("distinct factor names");
    let arm2 = arm_system_state(s, 1)
        .tensor(&path_state(1))
        .expect("distinct factor names");
    sum(&arm1, &arm2)
}

/// `(1/√2)[|B₁, A₂⟩|1⟩|E₁⟩ + |A₁, B₂⟩|2⟩|E₂⟩]` over `sub1 ⊗ sub2 ⊗ path ⊗ env`.
pub fn total_state_env(s: &Scenario) -> StateVector {
    let (e1, e2) = env_states(s.gamma);
    let arm1 = arm_system_state(s, 0)
        .tensor(&path_state(0))
        .and_then(|v| v.tensor(&e1))
        .expect("distinct factor names");
    let arm2 = arm_system_state(s, 1)
        .tensor(&path_state(1))
        .and_then(|v| v.tensor(&e2))
        .expect("distinct factor names");
    sum(&arm1, &arm2)
}
