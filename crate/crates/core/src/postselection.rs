//! Detector-port post-selection.
//!
//! The second beam splitter maps the ancilla path onto the detector ports
//! `R ∝ |1⟩ − |2⟩` and `U ∝ |1⟩ + |2⟩`. Conditional states are kept
//! unnormalized: their squared norm (or trace) is the probability that the
//! corresponding counter clicks.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::error::Result;
use crate::numerics::{c64, ComplexMatrix, DensityMatrix, LabeledBasis, StateVector, C64};
use crate::scenario::{arm_system_state, total_state, total_state_env, Scenario, PATH, SUB1, SUB2};

/// Conditional states with a squared norm below this are reported as dark.
pub const DARK_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    /// Right counter, `(|1⟩ − |2⟩)/√2`.
    R,
    /// Upper counter, `(|1⟩ + |2⟩)/√2`.
    U,
}

impl Port {
    pub const ALL: [Port; 2] = [Port::R, Port::U];

    /// Path ket contracted against the total state.
    ///
    /// For `R` this is `(|2⟩ − |1⟩)/√2`, the same ray as `(|1⟩ − |2⟩)/√2`.
    /// The overall sign fixes the orientation of the conditional state to
    /// `|A₁B₂⟩ − |B₁A₂⟩`; projectors and probabilities are unaffected.
    pub fn path_ket(self) -> [C64; 2] {
        let h = FRAC_1_SQRT_2;
        match self {
            Port::R => [c64(-h, 0.0), c64(h, 0.0)],
            Port::U => [c64(h, 0.0), c64(h, 0.0)],
        }
    }

    /// `|port⟩⟨port|` on the path factor.
    pub fn projector(self) -> ComplexMatrix {
        let k = self.path_ket();
        ComplexMatrix::outer(&k, &k)
    }

    /// −1 for R, +1 for U: the relative sign between the two arms.
    pub fn sign(self) -> f64 {
        match self {
            Port::R => -1.0,
            Port::U => 1.0,
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Port::R => "R",
            Port::U => "U",
        })
    }
}

/// Unnormalized state of `sub1 ⊗ sub2` after a click at `port`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalState {
    pub amplitudes: StateVector,
    pub port: Port,
}

impl ConditionalState {
    pub fn probability(&self) -> f64 {
        self.amplitudes.norm_sqr()
    }

    pub fn is_dark(&self) -> bool {
        self.probability() <= DARK_THRESHOLD
    }

    pub fn normalized(&self) -> Result<StateVector> {
        self.amplitudes.normalized()
    }

    pub fn projector(&self) -> DensityMatrix {
        self.amplitudes.projector()
    }
}

pub fn system_basis() -> LabeledBasis {
    LabeledBasis::new([(SUB1, 2), (SUB2, 2)]).expect("distinct names")
}

/// Closed form of the conditional state (environment ignored):
/// `½[(cos θ₂ ∓ cos θ₁)|A₁A₂⟩ + sin θ₂|A₁A₂⊥⟩ ∓ sin θ₁|A₁⊥A₂⟩]`,
/// upper signs for `R`.
pub fn postselect_pure(s: &Scenario, port: Port) -> ConditionalState {
    let (s1, c1) = s.theta1.radians().sin_cos();
    let (s2, c2) = s.theta2.radians().sin_cos();
    let sg = port.sign();
    let amps = [0.5 * (c2 + sg * c1), 0.5 * s2, 0.5 * sg * s1, 0.0];
    ConditionalState {
        amplitudes: StateVector::from_real(system_basis(), &amps).expect("4 amplitudes"),
        port,
    }
}

/// Conditional state obtained by contracting the path factor of
/// [`total_state`] with the port ket.
pub fn postselect_pure_numeric(s: &Scenario, port: Port) -> ConditionalState {
    let amplitudes = total_state(s)
        .contract(PATH, &port.path_ket())
        .expect("total state has a path factor");
    ConditionalState { amplitudes, port }
}

/// `|ψ|²`, the probability of a click at the state's port.
pub fn success_probability(c: &ConditionalState) -> f64 {
    c.probability()
}

/// Environment-averaged conditional state, unnormalized (trace = click
/// probability):
/// `¼[|A₁B₂⟩⟨A₁B₂| + |B₁A₂⟩⟨B₁A₂| ∓ γ|A₁B₂⟩⟨B₁A₂| ∓ γ*|B₁A₂⟩⟨A₁B₂|]`.
///
/// Holds for unequal couplings as well; the formula is what projecting and
/// tracing the environment-coupled state produces for any θ₁, θ₂.
pub fn postselect_mixed(s: &Scenario, port: Port) -> DensityMatrix {
    let x = arm_system_state(s, 0);
    let y = arm_system_state(s, 1);
    let (x, y) = (x.amplitudes(), y.amplitudes());
    let g = s.gamma.value() * port.sign();

    let mut m = &ComplexMatrix::outer(y, y) + &ComplexMatrix::outer(x, x);
    let cross = ComplexMatrix::outer(y, x).scale(g);
    m = &m + &cross;
    m = &m + &cross.adjoint();
    DensityMatrix::new(system_basis(), m.scale(c64(0.25, 0.0))).expect("Hermitian by construction")
}

/// Numeric route for [`postselect_mixed`]: contract the path of
/// [`total_state_env`] with the port ket and trace out the environment.
pub fn postselect_mixed_numeric(s: &Scenario, port: Port) -> DensityMatrix {
    total_state_env(s)
        .contract(PATH, &port.path_ket())
        .expect("total state has a path factor")
        .projector()
        .partial_trace(&[SUB1, SUB2])
        .expect("known factors")
}

/// Conditional state when the environment is read out instead of traced:
/// both the port and the environment outcome `|e_k⟩` are post-selected.
/// Squared norm is the joint probability.
pub fn postselect_with_env_outcome(
    s: &Scenario,
    port: Port,
    env_outcome: usize,
) -> Result<ConditionalState> {
    let mut ket = [c64(0.0, 0.0); 2];
    if env_outcome > 1 {
        return Err(crate::Error::OutOfRange {
            name: "env outcome",
            value: env_outcome as f64,
            range: "{0, 1}",
        });
    }
    ket[env_outcome] = c64(1.0, 0.0);
    let amplitudes = total_state_env(s)
        .contract(PATH, &port.path_ket())?
        .contract(crate::scenario::ENV, &ket)?;
    Ok(ConditionalState { amplitudes, port })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::EnvOverlap;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn amps_close(c: &ConditionalState, want: &[f64], tol: f64) {
        let got = c.amplitudes.amplitudes();
        for (g, w) in got.iter().zip(want) {
            assert!((g - c64(*w, 0.0)).norm() <= tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn equal_coupling_r_click_is_singlet_like() {
        for theta in [0.1, 0.7, 1.2, FRAC_PI_2] {
            let s = Scenario::symmetric(theta).unwrap();
            let c = postselect_pure(&s, Port::R);
            let h = theta.sin() / 2.0;
            amps_close(&c, &[0.0, h, -h, 0.0], 1e-15);
        }
    }

    #[test]
    fn strong_u_click_is_triplet_like() {
        let s = Scenario::symmetric(FRAC_PI_2).unwrap();
        amps_close(&postselect_pure(&s, Port::U), &[0.0, 0.5, 0.5, 0.0], 1e-15);
    }

    #[test]
    fn no_interaction_r_port_is_dark() {
        let s = Scenario::symmetric(0.0).unwrap();
        let c = postselect_pure(&s, Port::R);
        amps_close(&c, &[0.0; 4], 0.0);
        assert!(c.is_dark());
        assert!(c.normalized().is_err());
    }

    #[test]
    fn closed_form_matches_projection() {
        for (t1, t2) in [(0.0, 0.0), (0.3, 1.1), (FRAC_PI_2, 0.2), (0.9, 0.9)] {
            let s = Scenario::new(t1, t2).unwrap();
            for port in Port::ALL {
                let a = postselect_pure(&s, port);
                let b = postselect_pure_numeric(&s, port);
                assert!(a.amplitudes.max_abs_diff(&b.amplitudes) <= 1e-12);
            }
        }
    }

    #[test]
    fn probabilities() {
        let cases = [
            (FRAC_PI_2, 0.5, 0.5),
            (0.0, 0.0, 1.0),
            (FRAC_PI_4, 0.25, 0.75),
        ];
        for (theta, pr, pu) in cases {
            let s = Scenario::symmetric(theta).unwrap();
            assert!((success_probability(&postselect_pure(&s, Port::R)) - pr).abs() < 1e-15);
            assert!((success_probability(&postselect_pure(&s, Port::U)) - pu).abs() < 1e-15);
        }
    }

    #[test]
    fn coherent_mixed_state_is_pure_projector() {
        let s = Scenario::new(0.4, 1.3).unwrap();
        for port in Port::ALL {
            let rho = postselect_mixed(&s, port);
            let pure = postselect_pure(&s, port).projector();
            assert!(rho.max_abs_diff(&pure) <= 1e-12);
        }
    }

    #[test]
    fn which_path_environment_removes_coherence() {
        let s = Scenario::symmetric(FRAC_PI_2)
            .unwrap()
            .with_gamma(EnvOverlap::WHICH_PATH);
        let want = ComplexMatrix::from_real_diag(&[0.0, 0.25, 0.25, 0.0]);
        for port in Port::ALL {
            assert!(postselect_mixed(&s, port).matrix().max_abs_diff(&want) <= 1e-15);
        }
    }

    #[test]
    fn ports_are_complete() {
        let s = Scenario::symmetric(0.7)
            .unwrap()
            .with_gamma(EnvOverlap::new(c64(0.5, 0.2)).unwrap());
        let total = postselect_mixed(&s, Port::R).trace() + postselect_mixed(&s, Port::U).trace();
        assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn closed_form_matches_numeric_trace() {
        let s = Scenario::new(0.25, 1.4)
            .unwrap()
            .with_gamma(EnvOverlap::new(c64(-0.3, 0.6)).unwrap());
        for port in Port::ALL {
            let a = postselect_mixed(&s, port);
            let b = postselect_mixed_numeric(&s, port);
            assert!(a.max_abs_diff(&b) <= 1e-12);
            let eig = a.eigen().unwrap();
            assert!(*eig.values.last().unwrap() >= -1e-10);
        }
    }

    #[test]
    fn observed_environment_outcomes_split_the_click() {
        // γ = 0 at strong coupling: reading env = e₀ selects arm 1 only
        let s = Scenario::symmetric(FRAC_PI_2)
            .unwrap()
            .with_gamma(EnvOverlap::WHICH_PATH);
        let c0 = postselect_with_env_outcome(&s, Port::R, 0).unwrap();
        let c1 = postselect_with_env_outcome(&s, Port::R, 1).unwrap();
        assert!((c0.probability() + c1.probability() - 0.5).abs() < 1e-15);
        assert!(postselect_with_env_outcome(&s, Port::R, 2).is_err());
    }
}
