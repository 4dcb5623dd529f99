//! Two-qubit entanglement measures, all normalized so that a Bell state
//! scores 1. Logarithms are base 2 and `0·log 0 = 0`.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{
    entropy_bits, hermitian_eigen, psd_sqrt, ComplexMatrix, DensityMatrix, StateVector, ONE,
};

/// Slack on the `[0, 1]` range of a measure value.
pub const VALUE_SLACK: f64 = 1e-9;

/// Most negative eigenvalue accepted for a (normalized) mixed-state input.
pub const PSD_TOL: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Entropy,
    Negativity,
    Concurrence,
    Formation,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Entropy => "entropy",
            Measure::Negativity => "negativity",
            Measure::Concurrence => "concurrence",
            Measure::Formation => "formation",
        })
    }
}

/// Measures defined on mixed two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MixedMeasure {
    Negativity,
    Concurrence,
    #[default]
    Formation,
}

impl MixedMeasure {
    pub fn evaluate(self, rho: &DensityMatrix) -> Result<EntanglementValue> {
        match self {
            MixedMeasure::Negativity => negativity(rho),
            MixedMeasure::Concurrence => concurrence(rho),
            MixedMeasure::Formation => entanglement_of_formation(rho),
        }
    }
}

impl From<MixedMeasure> for Measure {
    fn from(m: MixedMeasure) -> Measure {
        match m {
            MixedMeasure::Negativity => Measure::Negativity,
            MixedMeasure::Concurrence => Measure::Concurrence,
            MixedMeasure::Formation => Measure::Formation,
        }
    }
}

impl std::str::FromStr for MixedMeasure {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "negativity" => Ok(MixedMeasure::Negativity),
            "concurrence" => Ok(MixedMeasure::Concurrence),
            "formation" | "eof" => Ok(MixedMeasure::Formation),
            other => Err(format!("unknown entanglement measure `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementValue {
    pub value: f64,
    pub measure: Measure,
}

impl EntanglementValue {
    fn new(value: f64, measure: Measure) -> Self {
        let value = value.max(0.0);
        debug_assert!(value <= 1.0 + VALUE_SLACK, "{measure} = {value}");
        Self { value, measure }
    }
}

fn check_two_qubit_state(psi: &StateVector) -> Result<()> {
    let f = psi.basis().factors();
    if f.len() != 2 || f[0].dim != 2 || f[1].dim != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got basis {}",
            psi.basis()
        )));
    }
    Ok(())
}

/// Entropy of the reduced state of the factor named `keep`.
pub fn reduced_entropy(psi: &StateVector, keep: &str) -> Result<f64> {
    check_two_qubit_state(psi)?;
    let rho = psi.normalized()?.projector().partial_trace(&[keep])?;
    Ok(entropy_bits(&rho.eigen()?.values))
}

/// Von Neumann entropy (bits) of either reduced state of a pure two-qubit
/// state. The input is normalized first; the zero vector is rejected.
pub fn entropy_of_entanglement(psi: &StateVector) -> Result<EntanglementValue> {
    check_two_qubit_state(psi)?;
    let first = psi.basis().factors()[0].name.clone();
    Ok(EntanglementValue::new(
        reduced_entropy(psi, &first)?,
        Measure::Entropy,
    ))
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// Weights `(p₁, p₂)` of the Schmidt decomposition of the R-click state as
/// functions of the couplings `x_j = 1 − cos θ_j`.
pub fn analytic_weights(x1: f64, x2: f64) -> Result<(f64, f64)> {
    for (name, x) in [("x1", x1), ("x2", x2)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange {
                name,
                value: x,
                range: "[0, 1]",
            });
        }
    }
    if x1 == 0.0 && x2 == 0.0 {
        return Err(Error::OutOfRange {
            name: "x1 + x2",
            value: 0.0,
            range: "(0, 2] (the R port is dark at zero coupling)",
        });
    }
    let n1 = x1 * (1.0 - x2 / 2.0);
    let n2 = x2 * (1.0 - x1 / 2.0);
    // n1 + n2 = x1 + x2 − x1·x2; summing the numerators keeps p₁ = p₂ = ½
    // bit-exact on the diagonal
    let d = n1 + n2;
    Ok((n1 / d, n2 / d))
}

/// Closed-form entropy of entanglement of the R-click state,
/// `S = −p₁ log₂ p₁ − p₂ log₂ p₂`.
pub fn analytic_entropy(x1: f64, x2: f64) -> Result<EntanglementValue> {
    let (p1, p2) = analytic_weights(x1, x2)?;
    Ok(EntanglementValue::new(
        entropy_bits(&[p1, p2]),
        Measure::Entropy,
    ))
}

/// Validates a two-qubit mixed state and returns its unit-trace copy.
fn prepare_mixed(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let f = rho.basis().factors();
    if f.len() != 2 || f[0].dim != 2 || f[1].dim != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit density matrix, got basis {}",
            rho.basis()
        )));
    }
    let rho = rho.normalized()?;
    let min = *rho.eigen()?.values.last().expect("4 eigenvalues");
    if min < PSD_TOL {
        return Err(Error::NotPositive(min));
    }
    Ok(rho)
}

/// `2 |Σ negative eigenvalues of ρ^{T₂}|`, the partial transpose taken on the
/// second factor.
pub fn negativity(rho: &DensityMatrix) -> Result<EntanglementValue> {
    let rho = prepare_mixed(rho)?;
    let second = rho.basis().factors()[1].name.clone();
    let pt = rho.partial_transpose(&second)?;
    let neg: f64 = pt.eigen()?.values.iter().filter(|&&l| l < 0.0).sum();
    Ok(EntanglementValue::new(-2.0 * neg, Measure::Negativity))
}

/// `σ_y ⊗ σ_y` in the computational basis.
fn spin_flip() -> ComplexMatrix {
    let mut y = ComplexMatrix::zeros(4, 4);
    y[(0, 3)] = -ONE;
    y[(1, 2)] = ONE;
    y[(2, 1)] = ONE;
    y[(3, 0)] = -ONE;
    y
}

/// Singular values of a square matrix, descending, from the Hermitian
/// dilation `[[0, A], [A†, 0]]` whose spectrum is `±σᵢ`.
fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = a.rows();
    let mut h = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            h[(i, n + j)] = a[(i, j)];
            h[(n + j, i)] = a[(i, j)].conj();
        }
    }
    let vals = hermitian_eigen(&h)?.values;
    Ok(vals[..n].iter().map(|v| v.max(0.0)).collect())
}

/// Wootters concurrence `max(0, μ₁ − μ₂ − μ₃ − μ₄)`.
///
/// The `μᵢ` are the square roots of the eigenvalues of `√ρ ρ̃ √ρ` with
/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`. Since `√ρ ρ̃ √ρ = A A†` for
/// `A = √ρ (σ_y⊗σ_y) √ρ*`, they are taken directly as the singular values of
/// `A`; this avoids square roots of rounding-level eigenvalues.
pub fn concurrence(rho: &DensityMatrix) -> Result<EntanglementValue> {
    let rho = prepare_mixed(rho)?;
    let sq = psd_sqrt(rho.matrix())?;
    let a = sq.matmul(&spin_flip())?.matmul(&sq.conj())?;
    let mu = singular_values(&a)?;
    let c = mu[0] - mu[1] - mu[2] - mu[3];
    Ok(EntanglementValue::new(c, Measure::Concurrence))
}

/// Entanglement of formation from the concurrence,
/// `h((1 + √(1 − C²)) / 2)`.
pub fn formation_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<EntanglementValue> {
    let c = concurrence(rho)?.value;
    Ok(EntanglementValue::new(
        formation_from_concurrence(c),
        Measure::Formation,
    ))
}

/// Closed-form concurrence of an X state (nonzero entries only on the
/// diagonal and anti-diagonal): `2·max(0, |ρ₁₂| − √(ρ₀₀ρ₃₃), |ρ₀₃| − √(ρ₁₁ρ₂₂))`.
pub fn x_state_concurrence(rho: &DensityMatrix) -> Result<f64> {
    let rho = rho.normalized()?;
    let m = rho.matrix();
    let c1 = m[(1, 2)].norm() - (m[(0, 0)].re * m[(3, 3)].re).max(0.0).sqrt();
    let c2 = m[(0, 3)].norm() - (m[(1, 1)].re * m[(2, 2)].re).max(0.0).sqrt();
    Ok(2.0 * c1.max(c2).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::LabeledBasis;
    use crate::postselection::{postselect_mixed, postselect_pure, system_basis, Port};
    use crate::scenario::{EnvOverlap, Scenario};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_6};

    fn state(amps: &[f64]) -> StateVector {
        StateVector::from_real(system_basis(), amps).unwrap()
    }

    fn bell() -> StateVector {
        state(&[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0])
    }

    /// Reduced-state spectrum of the θ₁ = π/2, θ₂ = π/6 R-click state,
    /// from the 2×2 characteristic polynomial of [[1/2, −√3/4], [−√3/4, 1/2]].
    fn asymmetric_oracle() -> f64 {
        let l1 = 0.5 + 3f64.sqrt() / 4.0;
        let l2 = 0.5 - 3f64.sqrt() / 4.0;
        -l1 * l1.log2() - l2 * l2.log2()
    }

    #[test]
    fn entropy_of_bell_and_product() {
        assert!((entropy_of_entanglement(&bell()).unwrap().value - 1.0).abs() < 1e-12);
        assert_eq!(
            entropy_of_entanglement(&state(&[1.0, 0.0, 0.0, 0.0]))
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn entropy_rejects_zero_and_wrong_shape() {
        assert_eq!(
            entropy_of_entanglement(&state(&[0.0; 4])).unwrap_err(),
            Error::ZeroVector
        );
        let three = StateVector::from_real(
            LabeledBasis::new([("q", 4)]).unwrap(),
            &[1.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        assert!(entropy_of_entanglement(&three).is_err());
    }

    #[test]
    fn entropy_of_asymmetric_r_click() {
        let s = Scenario::new(FRAC_PI_2, FRAC_PI_6).unwrap();
        let c = postselect_pure(&s, Port::R);
        let got = entropy_of_entanglement(&c.amplitudes).unwrap().value;
        let want = asymmetric_oracle();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        assert!((want - 0.3546).abs() < 5e-5);
        let other = reduced_entropy(&c.amplitudes, "sub2").unwrap();
        assert!((got - other).abs() <= 1e-10);
    }

    #[test]
    fn analytic_entropy_diagonal_is_exactly_one() {
        for k in 1..=100 {
            let x = k as f64 / 100.0;
            assert_eq!(analytic_entropy(x, x).unwrap().value, 1.0, "x = {x}");
        }
        assert_eq!(analytic_entropy(1e-300, 1e-300).unwrap().value, 1.0);
    }

    #[test]
    fn analytic_entropy_limits_and_errors() {
        assert_eq!(analytic_entropy(0.0, 0.5).unwrap().value, 0.0);
        assert!(analytic_entropy(1e-9, 0.5).unwrap().value < 1e-6);
        assert!(analytic_entropy(0.0, 0.0).is_err());
        assert!(analytic_entropy(-0.1, 0.5).is_err());
        assert!(analytic_entropy(0.5, 1.1).is_err());
    }

    #[test]
    fn analytic_weights_at_asymmetric_point() {
        let (p1, p2) = analytic_weights(1.0, 1.0 - 3f64.sqrt() / 2.0).unwrap();
        assert!((p1 - 0.93301).abs() < 1e-5 && (p2 - 0.06699).abs() < 1e-5);
        assert!((p1 + p2 - 1.0).abs() < 1e-12);
        let s = analytic_entropy(1.0, 1.0 - 3f64.sqrt() / 2.0)
            .unwrap()
            .value;
        assert!((s - asymmetric_oracle()).abs() < 1e-12);
    }

    #[test]
    fn mixed_measures_on_bell_and_product() {
        let b = bell().projector();
        assert!((negativity(&b).unwrap().value - 1.0).abs() < 1e-12);
        assert!((concurrence(&b).unwrap().value - 1.0).abs() < 1e-12);
        assert!((entanglement_of_formation(&b).unwrap().value - 1.0).abs() < 1e-12);

        let p = state(&[0.6, 0.8, 0.0, 0.0]).projector();
        assert!(negativity(&p).unwrap().value < 1e-12);
        assert!(concurrence(&p).unwrap().value < 1e-12);
        assert!(entanglement_of_formation(&p).unwrap().value < 1e-12);
    }

    #[test]
    fn which_path_state_is_separable() {
        let s = Scenario::symmetric(FRAC_PI_2)
            .unwrap()
            .with_gamma(EnvOverlap::WHICH_PATH);
        for port in Port::ALL {
            let rho = postselect_mixed(&s, port);
            assert_eq!(negativity(&rho).unwrap().value, 0.0);
            assert_eq!(concurrence(&rho).unwrap().value, 0.0);
        }
    }

    #[test]
    fn strong_coupling_measures_equal_gamma() {
        for g in [0.1, 0.3, 0.5, 0.9] {
            let s = Scenario::symmetric(FRAC_PI_2)
                .unwrap()
                .with_gamma(EnvOverlap::real(g).unwrap());
            for port in Port::ALL {
                let rho = postselect_mixed(&s, port);
                // oracle: ρ^{T₂} of ½[[·]] has the block [[0, ±γ/2], [±γ/2, 0]]
                // on |00⟩, |11⟩, so its only negative eigenvalue is −γ/2
                assert!((negativity(&rho).unwrap().value - g).abs() < 1e-9);
                let c = concurrence(&rho).unwrap().value;
                assert!((c - x_state_concurrence(&rho).unwrap()).abs() < 1e-9);
                assert!((c - g).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn formation_endpoints() {
        assert_eq!(formation_from_concurrence(1.0), 1.0);
        assert_eq!(formation_from_concurrence(0.0), 0.0);
    }

    #[test]
    fn formation_equals_entropy_on_pure_asymmetric_state() {
        let s = Scenario::new(FRAC_PI_2, FRAC_PI_6).unwrap();
        let c = postselect_pure(&s, Port::R);
        let eof = entanglement_of_formation(&c.projector()).unwrap().value;
        assert!((eof - asymmetric_oracle()).abs() < 1e-9);
    }

    #[test]
    fn mixed_measures_reject_bad_input() {
        let rho = DensityMatrix::new(
            system_basis(),
            ComplexMatrix::from_real_diag(&[1.0, -0.1, 0.0, 0.1]),
        )
        .unwrap();
        assert!(matches!(negativity(&rho), Err(Error::NotPositive(_))));
        assert!(matches!(concurrence(&rho), Err(Error::NotPositive(_))));
        let zero = DensityMatrix::new(system_basis(), ComplexMatrix::zeros(4, 4)).unwrap();
        assert_eq!(negativity(&zero).unwrap_err(), Error::ZeroTrace);
        let one = StateVector::from_real(LabeledBasis::qubit("a"), &[1.0, 0.0]).unwrap();
        assert!(concurrence(&one.projector()).is_err());
    }

    #[test]
    fn measure_names_parse() {
        assert_eq!(
            "EoF".parse::<MixedMeasure>().unwrap(),
            MixedMeasure::Formation
        );
        assert_eq!(
            "negativity".parse::<MixedMeasure>().unwrap(),
            MixedMeasure::Negativity
        );
        assert!("bogus".parse::<MixedMeasure>().is_err());
    }
}
