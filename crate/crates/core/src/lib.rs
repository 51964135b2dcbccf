//! Numerical kernels for two-sheet resonance models.
//!
//! Everything here is `no_std` (with `alloc`): analytic S-matrix models and
//! Hardy-class wave functions, adaptive complex quadrature, Paley-Wiener and
//! Titchmarsh checks, Gamow functionals with semigroup evolution, the
//! pole-plus-background expansion and the exact golden rule.
//!
//! Units: energies and times with `hbar = 1`.

#![no_std]
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod contour;
pub mod error;
pub mod expansion;
pub mod gamow;
pub mod golden_rule;
pub mod hardy;
pub mod quad;
pub mod smatrix;
pub mod wavefunction;

pub use num_complex::Complex64;

pub use contour::{ContourPath, Orientation, PathSegment, Segment};
pub use error::{Error, Result};
pub use expansion::{ExpansionMode, ExpansionReport, ModelTier, PoleContribution};
pub use gamow::{GamowFunctional, GamowVariant};
pub use golden_rule::{Coupling, DecayScenario, LorentzDamping};
pub use hardy::{HardyClassReport, TimeGrid, TimeSignal};
pub use quad::{QuadratureResult, Tolerance};
pub use smatrix::{ComplexEnergy, ModelKind, ResonancePole, SMatrixModel, Sheet};
pub use wavefunction::{EnergyWaveFunction, GaussianDamping, HardyClass, PoleTerm};

/// Relative distance below which a point counts as sitting on a pole.
pub const POLE_COLLISION_TOL: f64 = 1e-12;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn near(z: Complex64, pole: Complex64) -> bool {
    let scale = if pole.norm() > 1.0 { pole.norm() } else { 1.0 };
    (z - pole).norm() <= POLE_COLLISION_TOL * scale
}
