//! Simulator for entangling two qubits that never interact, by sending an
//! ancilla through a Mach-Zehnder interferometer whose arms couple to one
//! qubit each and post-selecting on the detector that clicks.
//!
//! Module map:
//! - [`numerics`]: small dense complex linear algebra over labeled bases
//! - [`scenario`]: coupling angles, environment overlap, total states
//! - [`postselection`]: R/U conditional states and click probabilities
//! - [`entanglement`]: entropy of entanglement, negativity, concurrence,
//!   entanglement of formation
//! - [`feedback`]: local unitaries and the strong-coupling correction
//! - [`optimizer`]: net gain of retaining U-click pairs, and its maximizer
//! - [`cli`]: the `mzent` command-line front end

pub mod cli;
pub mod entanglement;
pub mod error;
pub mod feedback;
pub mod numerics;
pub mod optimizer;
pub mod postselection;
pub mod scenario;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, DensityMatrix, LabeledBasis, StateVector, C64};
pub use postselection::{ConditionalState, Port};
pub use scenario::{CouplingAngle, EnvOverlap, Scenario};
