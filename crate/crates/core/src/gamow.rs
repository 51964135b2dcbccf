//! Gamow functionals: the decaying vector `|z_R^->` acting on test functions
//! of the class from below, the growing vector `|z_R*^+>` acting on the class
//! from above, their generalized eigenvalue relations and their one-sided
//! semigroup time evolution.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::contour::{integrate_contour, ContourPath};
use crate::error::{Error, Result};
use crate::hardy::titchmarsh_value_with;
use crate::quad::{try_integrate_interval, Hints, Tolerance};
use crate::smatrix::{ResonancePole, Sheet};
use crate::wavefunction::{EnergyWaveFunction, HardyClass};
use crate::I;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GamowVariant {
    /// `|z_R^->`, defined on the class from below, evolves for `t >= 0`.
    Decaying,
    /// `|z_R*^+>`, defined on the class from above, evolves for `t <= 0`.
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamowFunctional {
    pub pole: ResonancePole,
    pub variant: GamowVariant,
}

impl GamowFunctional {
    pub fn decaying(pole: ResonancePole) -> Self {
        GamowFunctional {
            pole,
            variant: GamowVariant::Decaying,
        }
    }

    pub fn growing(pole: ResonancePole) -> Self {
        GamowFunctional {
            pole,
            variant: GamowVariant::Growing,
        }
    }

    /// `z_R` for the decaying vector, `z_R*` for the growing one.
    pub fn eigenvalue(&self) -> Complex64 {
        match self.variant {
            GamowVariant::Decaying => self.pole.position(),
            GamowVariant::Growing => self.pole.conjugate_position(),
        }
    }

    /// Class of the test functions this functional is defined on.
    pub fn test_class(&self) -> HardyClass {
        match self.variant {
            GamowVariant::Decaying => HardyClass::Lower,
            GamowVariant::Growing => HardyClass::Upper,
        }
    }

    fn check(&self, test: &EnergyWaveFunction) -> Result<()> {
        let expected = self.test_class();
        if test.class() != expected {
            return Err(Error::ClassMismatch {
                expected,
                found: test.class(),
            });
        }
        Ok(())
    }

    /// Whether the semigroup is defined at `t`.
    pub fn allows(&self, t: f64) -> bool {
        match self.variant {
            GamowVariant::Decaying => t >= 0.0,
            GamowVariant::Growing => t <= 0.0,
        }
    }
}

fn pairing_tolerance() -> Tolerance {
    Tolerance::new(1e-14, 1e-12)
}

/// `<test | G>` through its defining integral:
/// `-(1/2 pi i) int test(E) / (E - z_R) dE` (decaying) or
/// `+(1/2 pi i) int test(E) / (E - z_R*) dE` (growing).
pub fn gamow_pairing(g: &GamowFunctional, test: &EnergyWaveFunction) -> Result<Complex64> {
    g.check(test)?;
    titchmarsh_value_with(test, g.eigenvalue(), pairing_tolerance())
}

/// Relative defect of `<H test | G> = z <test | G>`, with `H` acting as
/// multiplication by `E`.
pub fn eigenvalue_defect(g: &GamowFunctional, test: &EnergyWaveFunction) -> Result<f64> {
    g.check(test)?;
    let order = test.decay_order();
    if order < 2 {
        return Err(Error::DecayTooSlow { order, required: 2 });
    }
    let h_test = test.multiplied_by_energy()?;
    let lhs = gamow_pairing(g, &h_test)?;
    let rhs = g.eigenvalue() * gamow_pairing(g, test)?;
    Ok((lhs - rhs).norm() / rhs.norm())
}

/// `e^{-i E_R t} e^{-Gamma t / 2}` (decaying, `t >= 0`) or
/// `e^{-i E_R t} e^{+Gamma t / 2}` (growing, `t <= 0`).
///
/// Both are `e^{-i z t}` with `z` the functional's eigenvalue.
pub fn semigroup_factor(g: &GamowFunctional, t: f64) -> Result<Complex64> {
    if !t.is_finite() || !g.allows(t) {
        return Err(Error::TimeDirectionViolation { t });
    }
    let half_width = 0.5 * g.pole.width();
    let envelope = match g.variant {
        GamowVariant::Decaying => -half_width * t,
        GamowVariant::Growing => half_width * t,
    };
    Ok(Complex64::from_polar(libm::exp(envelope), -g.pole.energy() * t))
}

/// Both sides of the Breit-Wigner pole-term identity
///
/// `<psi|z_R^-> <+z_R|phi> 2 pi Gamma = int psi(E) phi(E) i Gamma / (E - z_R) dE`.
///
/// `psi` stands for `<psi^-|E^->` and `phi` for `<+E|phi^+>`; both must be
/// in the class from below. Returns `(lhs, rhs)`.
pub fn breit_wigner_pole_term(
    psi: &EnergyWaveFunction,
    phi: &EnergyWaveFunction,
    pole: &ResonancePole,
) -> Result<(Complex64, Complex64)> {
    let g = GamowFunctional::decaying(*pole);
    g.check(psi)?;
    g.check(phi)?;
    let order = psi.decay_order().saturating_add(phi.decay_order());
    if order < 2 {
        return Err(Error::DecayTooSlow { order, required: 2 });
    }
    let lhs = gamow_pairing(&g, psi)? * gamow_pairing(&g, phi)? * (2.0 * PI * pole.width());

    let zr = pole.position();
    let residue = pole.residue();
    let mut sing = psi.poles();
    sing.extend(phi.poles());
    sing.push(zr);
    let hints = Hints::from_singularities(&sing);
    let rhs = try_integrate_interval(
        |e| {
            let z = Complex64::new(e, 0.0);
            Ok(psi.at_real(e) * phi.at_real(e) * residue / (z - zr))
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
        &hints,
        pairing_tolerance(),
    )?
    .value;
    Ok((lhs, rhs))
}

/// Default cutoffs for [`semigroup_divergence_scan`].
pub const DEFAULT_CUTOFFS: [f64; 3] = [1e2, 1e3, 1e4];

/// Largest exponent `|t| * excursion` reached at the biggest cutoff.
const MAX_GROWTH_EXPONENT: f64 = 500.0;

/// Magnitudes of the evolved pairing integral
/// `int test(E) e^{-iEt} / (E - z) dE` truncated at each cutoff, taken along
/// a V-shaped contour `E_R + s - i alpha |s|` that dips into the half-plane
/// where the functional lives.
///
/// Inside the semigroup domain the truncations converge (to the real-line
/// value, since the dip crosses no singularity). Outside it the integrand
/// grows like `e^{|t| alpha s}` and the sequence diverges. The tilt `alpha`
/// is capped so the largest cutoff stays inside `f64` range.
pub fn semigroup_divergence_scan(
    g: &GamowFunctional,
    test: &EnergyWaveFunction,
    t: f64,
    cutoffs: &[f64],
) -> Result<Vec<f64>> {
    g.check(test)?;
    if !t.is_finite() {
        return Err(Error::invalid("scan time must be finite"));
    }
    let max_cutoff = cutoffs.iter().copied().fold(0.0, f64::max);
    if !(max_cutoff > 0.0) {
        return Err(Error::invalid("cutoffs must be positive"));
    }
    let alpha = if t == 0.0 {
        1.0
    } else {
        (MAX_GROWTH_EXPONENT / (t.abs() * max_cutoff)).min(1.0)
    };
    // Decaying functional: dip below the axis; growing: above.
    let dip = match g.variant {
        GamowVariant::Decaying => Complex64::new(1.0, -alpha),
        GamowVariant::Growing => Complex64::new(1.0, alpha),
    };
    let vertex = Complex64::new(g.pole.energy(), 0.0);
    let z = g.eigenvalue();
    let integrand = |e: Complex64, _sheet: Sheet| -> Result<Complex64> {
        Ok(test.evaluate(e)? * (-I * e * t).exp() / (e - z))
    };

    let mut out = Vec::with_capacity(cutoffs.len());
    for &cutoff in cutoffs {
        if !(cutoff > 0.0) {
            return Err(Error::invalid("cutoffs must be positive"));
        }
        // left arm from vertex - cutoff * conj-dip to the vertex, then right arm
        let left_end = vertex - Complex64::new(dip.re, -dip.im) * cutoff;
        let right_end = vertex + dip * cutoff;
        let path = ContourPath::builder(left_end, Sheet::Second)
            .line_to(vertex)
            .line_to(right_end)
            .build()?;
        let periods = (cutoff * t.abs() / PI).ceil() as usize;
        let tol = Tolerance::new(1e-12, 1e-8).with_max_intervals(4000 + 16 * periods);
        let value = integrate_scan(&integrand, &path, tol, periods)?;
        out.push(value.norm());
    }
    Ok(out)
}

fn integrate_scan<F>(f: &F, path: &ContourPath, tol: Tolerance, periods: usize) -> Result<Complex64>
where
    F: Fn(Complex64, Sheet) -> Result<Complex64>,
{
    if periods <= 1 {
        return Ok(integrate_contour(f, path, tol)?.value);
    }
    // Split long oscillatory arms into pieces of about one period each.
    let mut total = Complex64::new(0.0, 0.0);
    for seg in path.segments() {
        let (from, to) = match seg.segment {
            crate::contour::Segment::Line { from, to } => (from, to),
            _ => unreachable!("scan paths are polygonal"),
        };
        let pieces = periods.max(1);
        let mut prev = from;
        for k in 1..=pieces {
            let next = from + (to - from) * ((k as f64) / (pieces as f64));
            let piece = ContourPath::builder(prev, seg.sheet).line_to(next).build()?;
            total += integrate_contour(f, &piece, tol.with_max_intervals(4000))?.value;
            prev = next;
        }
    }
    Ok(total)
}
