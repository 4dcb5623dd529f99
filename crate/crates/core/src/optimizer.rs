//! Net gain of keeping some U-click pairs.
//!
//! Every R click yields a maximally entangled pair. A U click yields a less
//! entangled pair unless the coupling is strong. Retaining a fraction `w` of
//! the U-click pairs, after a local unitary `𝒰` on subsystem 2, trades the
//! discard loss `L` against the entanglement gain `G` of the pooled
//! ensemble:
//!
//! `N = G (P_R + w P_U) E₁[ρ(w, 𝒰)] − L (1 − w) P_U`
//!
//! with `ρ(w, 𝒰) ∝ ρ_R + w 𝒰 ρ_U 𝒰†`. For γ = 1 and θ₁ = θ₂ = θ,
//! `P_R = sin²θ / 2` and `P_U = (1 + cos²θ) / 2`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::entanglement::{EntanglementValue, MixedMeasure};
use crate::error::{Error, Result};
use crate::feedback::{apply_local, LocalUnitary, Subsystem};
use crate::numerics::DensityMatrix;
use crate::postselection::{postselect_mixed, Port};
use crate::scenario::Scenario;

/// Probes within this of the best value count as ties.
pub const TIE_TOL: f64 = 1e-12;

/// Golden-section evaluations per coordinate and refinement pass.
const GOLDEN_EVALS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct GainConfig {
    /// Utility per unit of entanglement, `G > 0`.
    pub gain: f64,
    /// Cost per discarded pair, `L ≥ 0`.
    pub loss: f64,
    /// Samples of the retain fraction on `[0, 1]`.
    pub w_grid: usize,
    /// Samples per Euler angle of the local unitary.
    pub su2_grid: usize,
    /// Coordinate-wise golden-section passes after the grid.
    pub refine_iters: usize,
    /// The measure playing the role of `E₁`.
    pub measure: MixedMeasure,
}

impl GainConfig {
    pub fn new(gain: f64, loss: f64) -> Result<Self> {
        let g = Self {
            gain,
            loss,
            ..Self::default()
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(Error::OutOfRange {
                name: "gain",
                value: self.gain,
                range: "(0, inf)",
            });
        }
        if !(self.loss >= 0.0 && self.loss.is_finite()) {
            return Err(Error::OutOfRange {
                name: "loss",
                value: self.loss,
                range: "[0, inf)",
            });
        }
        for (name, n) in [("w grid", self.w_grid), ("su2 grid", self.su2_grid)] {
            if n < 2 {
                return Err(Error::OutOfRange {
                    name,
                    value: n as f64,
                    range: "[2, inf)",
                });
            }
        }
        Ok(())
    }
}

impl Default for GainConfig {
    fn default() -> Self {
        Self {
            gain: 1.0,
            loss: 1.0,
            w_grid: 21,
            su2_grid: 12,
            refine_iters: 3,
            measure: MixedMeasure::Formation,
        }
    }
}

/// ZYZ Euler angles of a local unitary on subsystem 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub const ZERO: EulerAngles = EulerAngles {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };

    pub fn unitary(&self) -> LocalUnitary {
        LocalUnitary::from_zyz(Subsystem::Two, self.alpha, self.beta, self.gamma)
    }

    fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    fn from_array(a: [f64; 3]) -> Self {
        Self {
            alpha: a[0],
            beta: a[1],
            gamma: a[2],
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub w_star: f64,
    pub angles: EulerAngles,
    pub u_star: LocalUnitary,
    pub n_star: f64,
    pub e1_at_opt: EntanglementValue,
    pub probe_count: usize,
    /// `(w, max N over the unitary grid)` for every grid value of `w`.
    pub w_profile: Vec<(f64, f64)>,
}

fn check_w(w: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::OutOfRange {
            name: "w",
            value: w,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// Unit-trace state of the retained ensemble: all R clicks plus a fraction
/// `w` of the U clicks, the latter corrected by `u`.
///
/// Works for unequal couplings too; only [`net_gain`] needs θ₁ = θ₂.
pub fn retained_state(s: &Scenario, w: f64, u: &LocalUnitary) -> Result<DensityMatrix> {
    check_w(w)?;
    let r = postselect_mixed(s, Port::R);
    let up = postselect_mixed(s, Port::U);
    let kept = r.trace() + w * up.trace();
    if kept <= 1e-15 {
        return Err(Error::NothingRetained(kept));
    }
    let corrected = apply_local(u, &up)?;
    r.add(&corrected.scale(w))?.normalized()
}

fn click_probabilities(s: &Scenario) -> (f64, f64) {
    (
        postselect_mixed(s, Port::R).trace(),
        postselect_mixed(s, Port::U).trace(),
    )
}

fn require_symmetric(s: &Scenario) -> Result<()> {
    if !s.is_symmetric() {
        return Err(Error::AsymmetricCoupling(
            s.theta1.radians(),
            s.theta2.radians(),
        ));
    }
    Ok(())
}

/// Net gain and the entanglement of the retained ensemble.
pub fn net_gain_detail(
    s: &Scenario,
    w: f64,
    u: &LocalUnitary,
    g: &GainConfig,
) -> Result<(f64, EntanglementValue)> {
    require_symmetric(s)?;
    let rho = retained_state(s, w, u)?;
    let e1 = g.measure.evaluate(&rho)?;
    let (pr, pu) = click_probabilities(s);
    let n = g.gain * (pr + w * pu) * e1.value - g.loss * (1.0 - w) * pu;
    Ok((n, e1))
}

pub fn net_gain(s: &Scenario, w: f64, u: &LocalUnitary, g: &GainConfig) -> Result<f64> {
    net_gain_detail(s, w, u, g).map(|(n, _)| n)
}

/// Objective seen by the search; an empty ensemble earns nothing and still
/// pays for the discards.
fn objective(s: &Scenario, w: f64, angles: &EulerAngles, g: &GainConfig) -> Result<f64> {
    match net_gain(s, w, &angles.unitary(), g) {
        Err(Error::NothingRetained(_)) => {
            let (_, pu) = click_probabilities(s);
            Ok(-g.loss * (1.0 - w) * pu)
        }
        other => other,
    }
}

fn w_value(i: usize, n: usize) -> f64 {
    i as f64 / (n - 1) as f64
}

fn periodic_value(i: usize, n: usize) -> f64 {
    TAU * i as f64 / n as f64
}

fn polar_value(i: usize, n: usize) -> f64 {
    PI * i as f64 / (n - 1) as f64
}

/// Golden-section maximization of `f` on `[lo, hi]`.
fn golden_max(
    f: &mut impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    evals: usize,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 2..evals {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Grid search over `w × (α, β, γ)` followed by coordinate-wise
/// golden-section refinement around the best grid point.
///
/// Grid: `w` uniform on `[0, 1]`, `α, γ` uniform on `[0, 2π)`, `β` uniform on
/// `[0, π]`. Among grid points within [`TIE_TOL`] of the grid maximum the
/// first in `(w, α, β, γ)` lexicographic order wins. Refinement only moves
/// to strictly better points (by more than [`TIE_TOL`]).
pub fn optimize(s: &Scenario, g: &GainConfig) -> Result<OptimizationResult> {
    g.validate()?;
    require_symmetric(s)?;
    let nw = g.w_grid;
    let na = g.su2_grid;
    let per_w = na * na * na;

    // at w = 0 the unitary never acts; one probe stands for the whole slice
    let mut indices: Vec<usize> = vec![0];
    indices.extend(per_w..nw * per_w);
    let angles_of = |k: usize| EulerAngles {
        alpha: periodic_value(k / (na * na), na),
        beta: polar_value((k / na) % na, na),
        gamma: periodic_value(k % na, na),
    };
    let values: Vec<f64> = indices
        .par_iter()
        .map(|&idx| objective(s, w_value(idx / per_w, nw), &angles_of(idx % per_w), g))
        .collect::<Result<_>>()?;
    let mut probe_count = values.len();

    let w_profile: Vec<(f64, f64)> = std::iter::once((0.0, values[0]))
        .chain(values[1..].chunks(per_w).enumerate().map(|(i, chunk)| {
            let best = chunk.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (w_value(i + 1, nw), best)
        }))
        .collect();

    let grid_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pick = values
        .iter()
        .position(|&v| v >= grid_max - TIE_TOL)
        .expect("non-empty grid");
    let idx = indices[pick];
    let mut w = w_value(idx / per_w, nw);
    let mut angles = angles_of(idx % per_w);
    let mut best = values[pick];

    let w_step = 1.0 / (nw - 1) as f64;
    let steps = [TAU / na as f64, PI / (na - 1) as f64, TAU / na as f64];
    for _ in 0..g.refine_iters {
        // retain fraction
        let a = angles;
        let mut f = |x: f64| {
            probe_count += 1;
            objective(s, x, &a, g)
        };
        let (x, v) = golden_max(
            &mut f,
            (w - w_step).max(0.0),
            (w + w_step).min(1.0),
            GOLDEN_EVALS,
        )?;
        if v > best + TIE_TOL {
            w = x;
            best = v;
        }
        // Euler angles
        for k in 0..3 {
            let base = angles.as_array();
            let (lo, hi) = if k == 1 {
                ((base[1] - steps[1]).max(0.0), (base[1] + steps[1]).min(PI))
            } else {
                (base[k] - steps[k], base[k] + steps[k])
            };
            let mut f = |x: f64| {
                probe_count += 1;
                let mut trial = base;
                trial[k] = x;
                objective(s, w, &EulerAngles::from_array(trial), g)
            };
            let (x, v) = golden_max(&mut f, lo, hi, GOLDEN_EVALS)?;
            if v > best + TIE_TOL {
                let mut next = base;
                next[k] = if k == 1 { x } else { x.rem_euclid(TAU) };
                angles = EulerAngles::from_array(next);
                best = v;
            }
        }
    }

    let u_star = angles.unitary();
    let e1_at_opt = match net_gain_detail(s, w, &u_star, g) {
        Ok((_, e)) => e,
        Err(Error::NothingRetained(_)) => EntanglementValue {
            value: 0.0,
            measure: g.measure.into(),
        },
        Err(e) => return Err(e),
    };
    Ok(OptimizationResult {
        w_star: w,
        angles,
        u_star,
        n_star: best,
        e1_at_opt,
        probe_count,
        w_profile,
    })
}
