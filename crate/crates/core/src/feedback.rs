//! Local unitaries on one subsystem, and the correction that turns a
//! strong-coupling U click into the R-click state.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, DensityMatrix, StateVector, C64};
use crate::postselection::ConditionalState;

/// Tolerance on `U†U = I`.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    One,
    Two,
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subsystem::One => "1",
            Subsystem::Two => "2",
        })
    }
}

/// A 2×2 unitary in the `{|A⟩, |A⊥⟩}` basis of one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    target: Subsystem,
    matrix: ComplexMatrix,
}

impl LocalUnitary {
    pub fn new(target: Subsystem, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "local unitary must be 2x2, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let err = matrix
            .adjoint()
            .matmul(&matrix)?
            .max_abs_diff(&ComplexMatrix::identity(2));
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self { target, matrix })
    }

    pub fn identity(target: Subsystem) -> Self {
        Self {
            target,
            matrix: ComplexMatrix::identity(2),
        }
    }

    /// `diag(1, −1)`: flips the sign of the `|A⊥⟩` component.
    pub fn phase_flip(target: Subsystem) -> Self {
        Self {
            target,
            matrix: ComplexMatrix::from_real_diag(&[1.0, -1.0]),
        }
    }

    /// `Rz(α) Ry(β) Rz(γ)` with `Rz(φ) = diag(e^{−iφ/2}, e^{iφ/2})` and
    /// `Ry(β) = [[cos β/2, −sin β/2], [sin β/2, cos β/2]]`. Every element of
    /// U(2) equals one of these up to a global phase.
    pub fn from_zyz(target: Subsystem, alpha: f64, beta: f64, gamma: f64) -> Self {
        let (sb, cb) = (beta / 2.0).sin_cos();
        let e = |phi: f64| C64::from_polar(1.0, phi / 2.0);
        let sum = alpha + gamma;
        let diff = alpha - gamma;
        let matrix = ComplexMatrix::from_rows(&[
            [e(-sum) * cb, -e(-diff) * sb],
            [e(diff) * sb, e(sum) * cb],
        ])
        .expect("2x2");
        Self { target, matrix }
    }

    pub fn target(&self) -> Subsystem {
        self.target
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Same operation multiplied by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        Self {
            target: self.target,
            matrix: self.matrix.scale(C64::from_polar(1.0, phi)),
        }
    }

    /// The 4×4 action on `sub1 ⊗ sub2`: `U ⊗ I` or `I ⊗ U`.
    pub fn lifted(&self) -> ComplexMatrix {
        let id = ComplexMatrix::identity(2);
        match self.target {
            Subsystem::One => self.matrix.kron(&id),
            Subsystem::Two => id.kron(&self.matrix),
        }
        .expect("4x4")
    }

    /// `|Tr(U†V)| / 2`, one exactly when the two agree up to a global phase.
    pub fn phase_fidelity(&self, other: &LocalUnitary) -> f64 {
        if self.target != other.target {
            return 0.0;
        }
        let t: C64 = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| self.matrix[(i, j)].conj() * other.matrix[(i, j)])
            .sum();
        t.norm() / 2.0
    }
}

/// Phase flip on subsystem 2; maps `½(|A₁A₂⊥⟩ + |A₁⊥A₂⟩)` to
/// `−½(|A₁A₂⊥⟩ − |A₁⊥A₂⟩)`.
pub fn strong_correction() -> LocalUnitary {
    LocalUnitary::phase_flip(Subsystem::Two)
}

/// Anything a local unitary can act on.
pub trait LocalTarget: Sized {
    fn apply_local(&self, u: &LocalUnitary) -> Result<Self>;
}

fn check_dim(dim: usize) -> Result<()> {
    if dim != 4 {
        return Err(Error::DimensionMismatch(format!(
            "local unitaries act on sub1 ⊗ sub2 (dimension 4), got dimension {dim}"
        )));
    }
    Ok(())
}

impl LocalTarget for StateVector {
    fn apply_local(&self, u: &LocalUnitary) -> Result<Self> {
        check_dim(self.dim())?;
        let amps = u.lifted().apply(self.amplitudes())?;
        StateVector::new(self.basis().clone(), amps)
    }
}

impl LocalTarget for DensityMatrix {
    fn apply_local(&self, u: &LocalUnitary) -> Result<Self> {
        check_dim(self.dim())?;
        self.conjugate_by(&u.lifted())
    }
}

impl LocalTarget for ConditionalState {
    fn apply_local(&self, u: &LocalUnitary) -> Result<Self> {
        Ok(ConditionalState {
            amplitudes: self.amplitudes.apply_local(u)?,
            port: self.port,
        })
    }
}

pub fn apply_local<T: LocalTarget>(u: &LocalUnitary, state: &T) -> Result<T> {
    state.apply_local(u)
}

/// `|⟨a|b⟩|` after normalizing both vectors.
pub fn fidelity_up_to_phase(a: &StateVector, b: &StateVector) -> Result<f64> {
    let a = a.normalized()?;
    let b = b.normalized()?;
    Ok(a.inner(&b)?.norm().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c64;
    use crate::postselection::{postselect_pure, system_basis, Port};
    use crate::scenario::Scenario;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_state(rng: &mut ChaCha8Rng) -> StateVector {
        let amps = (0..4)
            .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        StateVector::new(system_basis(), amps).unwrap()
    }

    fn random_unitary(rng: &mut ChaCha8Rng, target: Subsystem) -> LocalUnitary {
        LocalUnitary::from_zyz(
            target,
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.0..PI),
            rng.gen_range(0.0..2.0 * PI),
        )
        .with_global_phase(rng.gen_range(0.0..2.0 * PI))
    }

    #[test]
    fn strong_correction_maps_u_click_onto_r_click() {
        let s = Scenario::symmetric(FRAC_PI_2).unwrap();
        let u = postselect_pure(&s, Port::U);
        let r = postselect_pure(&s, Port::R);
        let corrected = apply_local(&strong_correction(), &u.amplitudes).unwrap();
        let want = StateVector::from_real(system_basis(), &[0.0, -0.5, 0.5, 0.0]).unwrap();
        assert!(corrected.max_abs_diff(&want) < 1e-15);
        let f = fidelity_up_to_phase(&corrected, &r.amplitudes).unwrap();
        assert!((f - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn strong_correction_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random_state(&mut rng);
        let c = strong_correction();
        let twice = apply_local(&c, &apply_local(&c, &psi).unwrap()).unwrap();
        assert!(twice.max_abs_diff(&psi) < 1e-15);
    }

    #[test]
    fn strong_correction_leaves_a_components() {
        let aa = StateVector::from_real(system_basis(), &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = apply_local(&strong_correction(), &aa).unwrap();
        assert!(out.max_abs_diff(&aa) < 1e-15);
        assert!((fidelity_up_to_phase(&out, &aa).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_is_a_no_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = random_state(&mut rng);
        for t in [Subsystem::One, Subsystem::Two] {
            assert_eq!(apply_local(&LocalUnitary::identity(t), &psi).unwrap(), psi);
        }
    }

    #[test]
    fn norm_and_trace_are_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let psi = random_state(&mut rng);
            let t = if rng.gen_bool(0.5) {
                Subsystem::One
            } else {
                Subsystem::Two
            };
            let u = random_unitary(&mut rng, t);
            let out = apply_local(&u, &psi).unwrap();
            assert!((out.norm() - psi.norm()).abs() <= 1e-12);

            let rho = psi.projector();
            let lifted_rho = apply_local(&u, &rho).unwrap();
            assert!((lifted_rho.trace() - rho.trace()).abs() <= 1e-12);
            assert!(lifted_rho.max_abs_diff(&out.projector()) <= 1e-12);
        }
    }

    #[test]
    fn either_subsystem_can_be_corrected() {
        let s = Scenario::symmetric(FRAC_PI_2).unwrap();
        let u = postselect_pure(&s, Port::U);
        let r = postselect_pure(&s, Port::R);
        let fixed = apply_local(&LocalUnitary::phase_flip(Subsystem::One), &u.amplitudes).unwrap();
        assert!((fidelity_up_to_phase(&fixed, &r.amplitudes).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rejects_bad_unitaries_and_shapes() {
        let m = ComplexMatrix::from_real_diag(&[1.0, 0.5]);
        assert!(matches!(
            LocalUnitary::new(Subsystem::One, m),
            Err(Error::NotUnitary(_))
        ));
        assert!(LocalUnitary::new(Subsystem::One, ComplexMatrix::identity(3)).is_err());
        let q =
            StateVector::from_real(crate::numerics::LabeledBasis::qubit("a"), &[1.0, 0.0]).unwrap();
        assert!(apply_local(&strong_correction(), &q).is_err());
    }

    #[test]
    fn zyz_covers_the_phase_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let u = random_unitary(&mut rng, Subsystem::Two);
            assert!(LocalUnitary::new(Subsystem::Two, u.matrix().clone()).is_ok());
        }
        let flip = LocalUnitary::from_zyz(Subsystem::Two, PI, 0.0, 0.0);
        assert!((flip.phase_fidelity(&strong_correction()) - 1.0).abs() < 1e-15);
        let flip = LocalUnitary::from_zyz(Subsystem::Two, 0.0, 0.0, PI);
        assert!((flip.phase_fidelity(&strong_correction()) - 1.0).abs() < 1e-15);
        assert!(
            LocalUnitary::identity(Subsystem::Two).phase_fidelity(&strong_correction()) < 1e-15
        );
    }

    #[test]
    fn fidelity_cases() {
        let a = StateVector::from_real(system_basis(), &[0.6, 0.0, 0.8, 0.0]).unwrap();
        let b = StateVector::from_real(system_basis(), &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((fidelity_up_to_phase(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity_up_to_phase(&a, &b).unwrap(), 0.0);
        let neg = a.scale(c64(-1.0, 0.0));
        assert!((fidelity_up_to_phase(&a, &neg).unwrap() - 1.0).abs() < 1e-15);
        let zero = StateVector::from_real(system_basis(), &[0.0; 4]).unwrap();
        assert_eq!(
            fidelity_up_to_phase(&a, &zero).unwrap_err(),
            Error::ZeroVector
        );
    }
}
