//! Resonance expansion of an S-matrix element: the real-line integral
//! `int psi(E) S(E) phi(E) dE` split into resonance pole terms plus a
//! background integral along a contour pushed into the second sheet.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::contour::{integrate_contour, ContourPath};
use crate::error::{Error, Result};
use crate::gamow::{gamow_pairing, GamowFunctional};
use crate::hardy::{energy_norm, fourier_transform_signal, TimeGrid};
use crate::quad::{try_integrate_interval, Hints, QuadratureResult, Tolerance};
use crate::smatrix::{unitarity_defect, ComplexEnergy, ModelKind, ResonancePole, SMatrixModel, Sheet};
use crate::wavefunction::{EnergyWaveFunction, HardyClass};
use crate::{I, POLE_COLLISION_TOL};

/// Largest unitarity defect accepted for the model.
pub const UNITARITY_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpansionMode {
    /// Integrate the whole real line (rational families are defined there).
    FullLine,
    /// Integrate the spectrum `[branch_point, inf)` only.
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelTier {
    /// Flat models: the identity is checkable to near machine precision.
    Oracle,
    /// Uniformized models with a genuine second sheet.
    Demonstration,
}

impl ModelTier {
    pub fn of(model: &SMatrixModel) -> ModelTier {
        match model.kind() {
            ModelKind::FlatRationalE => ModelTier::Oracle,
            ModelKind::UniformizedRationalK => ModelTier::Demonstration,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleContribution {
    pub index: usize,
    pub pole: ResonancePole,
    /// Winding number of (original line - path) about the pole.
    pub winding: i32,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub direct: Complex64,
    pub poles: Vec<PoleContribution>,
    pub background: Complex64,
    /// `|direct - (sum poles + background)| / |direct|`, absolute when
    /// `direct` vanishes to quadrature accuracy.
    pub residual: f64,
    pub tier: ModelTier,
    pub mode: ExpansionMode,
    /// `int_{-inf}^{branch} psi S phi dE`, present in physical mode when the
    /// background path runs under the whole axis instead of starting at the
    /// branch point.
    pub negative_axis_tail: Option<Complex64>,
}

impl ExpansionReport {
    pub fn pole_sum(&self) -> Complex64 {
        self.poles.iter().map(|p| p.value).sum()
    }
}

fn tolerance() -> Tolerance {
    Tolerance::new(1e-12, 1e-11).with_max_intervals(8000)
}

fn kernel(
    psi: &EnergyWaveFunction,
    phi: &EnergyWaveFunction,
    model: &SMatrixModel,
    z: Complex64,
    sheet: Sheet,
) -> Result<Complex64> {
    Ok(psi.evaluate(z)? * model.evaluate(ComplexEnergy::new(z, sheet))? * phi.evaluate(z)?)
}

fn singularities(psi: &EnergyWaveFunction, phi: &EnergyWaveFunction, model: &SMatrixModel) -> Vec<Complex64> {
    let mut sing = psi.poles();
    sing.extend(phi.poles());
    sing.extend(model.poles().iter().map(|p| p.position()));
    sing.push(Complex64::new(model.branch_point(), 0.0));
    sing
}

fn check_inputs(psi: &EnergyWaveFunction, phi: &EnergyWaveFunction, model: &SMatrixModel) -> Result<()> {
    let order = psi.decay_order().saturating_add(phi.decay_order());
    if order < 2 {
        return Err(Error::DecayTooSlow { order, required: 2 });
    }
    let b = model.branch_point();
    let mut grid: Vec<f64> = [0.1, 0.5, 1.0, 2.0, 5.0, 20.0].iter().map(|x| b + x).collect();
    grid.extend(model.poles().iter().map(|p| p.energy()));
    let defect = unitarity_defect(model, &grid);
    if !(defect < UNITARITY_LIMIT) {
        return Err(Error::invalid("S-matrix model is not unitary on the cut"));
    }
    Ok(())
}

/// `int psi(E) S(E + i0) phi(E) dE` over the spectrum (physical mode) or the
/// whole real line (full-line mode). Below the branch point the integrand is
/// taken on the second sheet, which continues the upper-rim values.
pub fn direct_smatrix_element(
    psi: &EnergyWaveFunction,
    phi: &EnergyWaveFunction,
    model: &SMatrixModel,
    mode: ExpansionMode,
) -> Result<QuadratureResult> {
    check_inputs(psi, phi, model)?;
    let from = match mode {
        ExpansionMode::FullLine => f64::NEG_INFINITY,
        ExpansionMode::Physical => model.branch_point(),
    };
    real_axis_integral(psi, phi, model, from, f64::INFINITY)
}

fn real_axis_integral(
    psi: &EnergyWaveFunction,
    phi: &EnergyWaveFunction,
    model: &SMatrixModel,
    from: f64,
    to: f64,
) -> Result<QuadratureResult> {
    let hints = Hints::from_singularities(&singularities(psi, phi, model));
    try_integrate_interval(
        |e| kernel(psi, phi, model, Complex64::new(e, 0.0), Sheet::Second),
        from,
        to,
        &hints,
        tolerance(),
    )
}

/// Default deformed path for each mode: the horizontal line
/// `Im z = -(max Gamma + 0.5)` for the full line, the second-sheet negative
/// real axis from the branch point for the physical spectrum.
pub fn default_path(model: &SMatrixModel, mode: ExpansionMode) -> Result<ContourPath> {
    match mode {
        ExpansionMode::FullLine => {
            let widest = model.poles().iter().map(|p| p.width()).fold(0.0, f64::max);
            ContourPath::horizontal_line(-(widest + 0.5), Sheet::Second)
        }
        ExpansionMode::Physical => ContourPath::negative_real_axis(model.branch_point(), Sheet::Second),
    }
}

/// Direction angle at infinity, in `[-pi, 0]`.
fn lower_angle(direction: Complex64) -> Result<f64> {
    let a = direction.arg();
    if a == PI {
        Ok(-PI)
    } else if a <= 0.0 {
        Ok(a)
    } else {
        Err(Error::invalid("deformed path must reach infinity in the lower half-plane"))
    }
}

/// How the original integration contour is closed against the path.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Closure {
    /// Whole real line against a path with both ends at infinity.
    Line,
    /// `[b, inf)` against a path from `b` out to infinity.
    HalfLine(f64),
}

fn closure(path: &ContourPath, model: &SMatrixModel, mode: ExpansionMode) -> Result<Closure> {
    let (start, end) = path.endpoints();
    let end_dir = path.asymptotes().1;
    if end.is_some() || end_dir.is_none() {
        return Err(Error::invalid("deformed path must end at infinity"));
    }
    match (mode, start) {
        (_, None) => Ok(Closure::Line),
        (ExpansionMode::Physical, Some(s)) if s == Complex64::new(model.branch_point(), 0.0) => {
            Ok(Closure::HalfLine(model.branch_point()))
        }
        _ => Err(Error::invalid(
            "deformed path must start at infinity (or at the branch point in physical mode)",
        )),
    }
}

/// Winding number about `p` of the closed curve formed by the original
/// contour, an arc at infinity through the lower half-plane, and the
/// reversed deformed path.
fn enclosed_winding(path: &ContourPath, closing: Closure, p: Complex64) -> Result<i32> {
    let (start_dir, end_dir) = path.asymptotes();
    let theta_end = lower_angle(end_dir.ok_or_else(|| Error::invalid("deformed path must end at infinity"))?)?;
    let total = match closing {
        Closure::Line => {
            if p.im == 0.0 {
                return Err(Error::PoleOnPath { pole: p });
            }
            let line = if p.im < 0.0 { -PI } else { PI };
            let theta_start = lower_angle(start_dir.ok_or_else(|| Error::invalid("deformed path must start at infinity"))?)?;
            line + theta_end - path.arg_change(p) + (-PI - theta_start)
        }
        Closure::HalfLine(b) => {
            let origin = Complex64::new(b, 0.0);
            if p.im == 0.0 && p.re >= b {
                return Err(Error::PoleOnPath { pole: p });
            }
            let ray = (Complex64::new(1.0, 0.0) / (origin - p)).arg();
            ray + theta_end - path.arg_change(p)
        }
    };
    Ok(libm::round(total / (2.0 * PI)) as i32)
}

fn check_path(path: &ContourPath, model: &SMatrixModel) -> Result<()> {
    if model.kind() == ModelKind::UniformizedRationalK && path.segments().iter().any(|s| s.sheet != Sheet::Second) {
        return Err(Error::invalid("background path must run on the second sheet"));
    }
    for p in model.poles() {
        let z = p.position();
        if path.distance_to(z) < POLE_COLLISION_TOL * z.norm().max(1.0) {
            return Err(Error::PoleOnPath { pole: z });
        }
    }
    Ok(())
}

/// `int_path psi S phi dz` with per-segment sheets.
pub fn background_term(
    psi: &EnergyWaveFunction,
    phi: &EnergyWaveFunction,
    model: &SMatrixModel,
    path: &ContourPath,
) -> Result<QuadratureResult> {
    check_path(path, model)?;
    integrate_contour(|z, sheet| kernel(psi, phi, model, z, sheet), path, tolerance())
}

/// The negative-axis background `int_b^{-inf}` on the second sheet computed
/// through `E = b - s^2`, `s in [0, inf)`; for uniformized models the
/// S-matrix is evaluated directly at the momentum `k = -i s`.
pub fn background_term_momentum(
    psi: &EnergyWaveFunction,
    phi: &EnergyWaveFunction,
    model: &SMatrixModel,
) -> Result<QuadratureResult> {
    let b = model.branch_point();
    let scale = singularities(psi, phi, model)
        .iter()
        .map(|z| (*z - b).norm())
        .fold(1.0, f64::max);
    let hints = Hints {
        points: Vec::new(),
        center: 0.0,
        scale: scale.sqrt(),
    };
    try_integrate_interval(
        |s| {
            let e = Complex64::new(b - s * s, 0.0);
            let smat = match model.kind() {
                ModelKind::FlatRationalE => model.evaluate(ComplexEnergy::second(e))?,
                ModelKind::UniformizedRationalK => model.evaluate_momentum(Complex64::new(0.0, -s))?,
            };
            Ok(psi.evaluate(e)? * smat * phi.evaluate(e)? * (-2.0 * s))
        },
        0.0,
        f64::INFINITY,
        &hints,
        tolerance(),
    )
}

/// Contribution of pole `index` computed from the Gamow pairings:
/// `2 pi i w r <psi|z^-> <+z|phi>` with `r` the S-matrix residue and `w` the
/// winding of the deformation about the pole. For the single-pole model with
/// residue `i Gamma` and `w = -1` this is `2 pi Gamma <psi|z^-> <+z|phi>`.
fn pole_term(
    psi: &EnergyWaveFunction,
    phi: &EnergyWaveFunction,
    model: &SMatrixModel,
    index: usize,
    winding: i32,
) -> Result<Complex64> {
    let g = GamowFunctional::decaying(model.poles()[index]);
    let residue = model.residue(index)?;
    let pairing = gamow_pairing(&g, psi)? * gamow_pairing(&g, phi)?;
    Ok(2.0 * PI * I * (winding as f64) * residue * pairing)
}

/// The same pole contribution from a clockwise loop integral of the kernel
/// around the pole, radius `radius`.
pub fn pole_term_by_loop(
    psi: &EnergyWaveFunction,
    phi: &EnergyWaveFunction,
    model: &SMatrixModel,
    index: usize,
    radius: f64,
) -> Result<Complex64> {
    let pole = model
        .poles()
        .get(index)
        .ok_or_else(|| Error::invalid("pole index out of range"))?;
    let circle = ContourPath::circle(pole.position(), radius, Sheet::Second)?;
    let ccw = integrate_contour(|z, sheet| kernel(psi, phi, model, z, sheet), &circle, tolerance())?;
    Ok(-ccw.value)
}

/// Split the S-matrix element into pole terms and a background along `path`
/// and compare with the direct integral.
pub fn decompose(
    psi: &EnergyWaveFunction,
    phi: &EnergyWaveFunction,
    model: &SMatrixModel,
    path: &ContourPath,
    mode: ExpansionMode,
) -> Result<ExpansionReport> {
    check_inputs(psi, phi, model)?;
    check_path(path, model)?;
    let closing = closure(path, model, mode)?;

    for z in psi.poles().into_iter().chain(phi.poles()) {
        if enclosed_winding(path, closing, z)? != 0 {
            return Err(Error::invalid("deformation crosses a pole of the test functions"));
        }
    }

    let mut poles = Vec::new();
    for (index, pole) in model.poles().iter().enumerate() {
        let winding = enclosed_winding(path, closing, pole.position())?;
        if winding == 0 {
            continue;
        }
        for wf in [psi, phi] {
            if wf.class() != HardyClass::Lower {
                return Err(Error::ClassMismatch {
                    expected: HardyClass::Lower,
                    found: wf.class(),
                });
            }
        }
        poles.push(PoleContribution {
            index,
            pole: *pole,
            winding,
            value: pole_term(psi, phi, model, index, winding)?,
        });
    }

    let background = background_term(psi, phi, model, path)?.value;
    let direct_result = direct_smatrix_element(psi, phi, model, mode)?;
    let direct = direct_result.value;
    let negative_axis_tail = match (mode, closing) {
        (ExpansionMode::Physical, Closure::Line) => {
            Some(real_axis_integral(psi, phi, model, f64::NEG_INFINITY, model.branch_point())?.value)
        }
        _ => None,
    };

    let sum: Complex64 = poles.iter().map(|p: &PoleContribution| p.value).sum::<Complex64>() + background;
    let gap = (direct - sum).norm();
    // A direct value inside its own error bar counts as zero.
    let residual = if direct.norm() > 10.0 * direct_result.error_estimate {
        gap / direct.norm()
    } else {
        gap
    };
    Ok(ExpansionReport {
        direct,
        poles,
        background,
        residual,
        tier: ModelTier::of(model),
        mode,
        negative_axis_tail,
    })
}

/// `decompose` along the default path of the mode.
pub fn decompose_default(
    psi: &EnergyWaveFunction,
    phi: &EnergyWaveFunction,
    model: &SMatrixModel,
    mode: ExpansionMode,
) -> Result<ExpansionReport> {
    decompose(psi, phi, model, &default_path(model, mode)?, mode)
}

/// `| int |wf|^2 dE - (1/2 pi) int |F(t)|^2 dt | / int |wf|^2 dE`.
pub fn continuum_completeness_defect(wf: &EnergyWaveFunction) -> Result<f64> {
    continuum_completeness_defect_on(wf, TimeGrid::for_wavefunction(wf))
}

pub fn continuum_completeness_defect_on(wf: &EnergyWaveFunction, grid: TimeGrid) -> Result<f64> {
    if wf.decay_order() < 1 {
        return Err(Error::DecayTooSlow {
            order: wf.decay_order(),
            required: 1,
        });
    }
    let norm = energy_norm(wf)?;
    let signal = fourier_transform_signal(wf, grid)?;
    Ok((norm - signal.energy() / (2.0 * PI)).abs() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn wf(pole: Complex64) -> EnergyWaveFunction {
        EnergyWaveFunction::simple_pole(pole).unwrap()
    }

    fn one_pole() -> SMatrixModel {
        SMatrixModel::flat(vec![ResonancePole::new(1.0, 0.1).unwrap()], c(-1.0, 0.0)).unwrap()
    }

    #[test]
    fn direct_examples() {
        let id = SMatrixModel::identity();
        let psi = wf(c(0.0, 1.0));
        let v = direct_smatrix_element(&psi, &psi, &id, ExpansionMode::FullLine).unwrap();
        assert!(v.value.norm() < 1e-10);
        let v = direct_smatrix_element(&psi, &wf(c(0.0, 2.0)), &id, ExpansionMode::FullLine).unwrap();
        assert!(v.value.norm() < 1e-10);
        let v = direct_smatrix_element(&psi, &wf(c(0.0, 2.0)), &one_pole(), ExpansionMode::FullLine).unwrap();
        assert!(v.value.norm() > 1e-3);
    }

    #[test]
    fn one_pole_decomposition_below_the_pole() {
        let model = one_pole();
        let path = ContourPath::horizontal_line(-1.0, Sheet::Second).unwrap();
        let r = decompose(&wf(c(0.0, 1.0)), &wf(c(0.5, 2.0)), &model, &path, ExpansionMode::FullLine).unwrap();
        assert_eq!(r.poles.len(), 1);
        assert_eq!(r.poles[0].winding, -1);
        assert!(r.residual < 1e-6, "{r:?}");
        assert_eq!(r.tier, ModelTier::Oracle);

        // 2 pi Gamma psi(z_R) phi(z_R) for the unit-residue model
        let zr = model.poles()[0].position();
        let expected = 2.0 * PI * 0.1 / ((zr - c(0.0, 1.0)) * (zr - c(0.5, 2.0)));
        assert!((r.poles[0].value - expected).norm() < 1e-9);

        let by_loop = pole_term_by_loop(&wf(c(0.0, 1.0)), &wf(c(0.5, 2.0)), &model, 0, 0.03).unwrap();
        assert!((by_loop - r.poles[0].value).norm() < 1e-8 * by_loop.norm());
    }

    #[test]
    fn path_above_the_pole_crosses_nothing() {
        let path = ContourPath::horizontal_line(-0.01, Sheet::Second).unwrap();
        let r = decompose(&wf(c(0.0, 1.0)), &wf(c(0.0, 2.0)), &one_pole(), &path, ExpansionMode::FullLine).unwrap();
        assert!(r.poles.is_empty());
        assert!(r.residual < 1e-8);
    }

    #[test]
    fn no_pole_model() {
        let r = decompose_default(&wf(c(0.0, 1.0)), &wf(c(1.0, 1.0)), &SMatrixModel::identity(), ExpansionMode::FullLine)
            .unwrap();
        assert!(r.poles.is_empty());
        assert!(r.residual < 1e-10);
        let r = decompose_default(&wf(c(0.0, 1.0)), &wf(c(1.0, 1.0)), &SMatrixModel::identity(), ExpansionMode::Physical)
            .unwrap();
        assert!(r.poles.is_empty());
        assert!(r.direct.norm() > 0.1);
        assert!(r.residual < 1e-10, "{r:?}");
    }

    #[test]
    fn two_pole_model() {
        let model = SMatrixModel::flat(
            vec![ResonancePole::new(1.0, 0.1).unwrap(), ResonancePole::new(2.5, 0.3).unwrap()],
            c(1.0, 0.0),
        )
        .unwrap();
        let r = decompose_default(&wf(c(0.3, 1.0)), &wf(c(-0.2, 0.7)), &model, ExpansionMode::FullLine).unwrap();
        assert_eq!(r.poles.len(), 2);
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn path_independence() {
        // In full-line mode the background of a flat model vanishes; the
        // negative-axis background of the physical mode does not.
        let model = one_pole();
        let (psi, phi) = (wf(c(0.0, 1.0)), wf(c(0.5, 2.0)));
        let axis = default_path(&model, ExpansionMode::Physical).unwrap();
        let a = background_term(&psi, &phi, &model, &axis).unwrap();
        let bent = ContourPath::builder(c(0.0, 0.0), Sheet::Second)
            .line_to(c(-1.0, -1.0))
            .line_to(c(-2.0, -1.2))
            .ray(c(-1.0, -0.5))
            .build()
            .unwrap();
        let b = background_term(&psi, &phi, &model, &bent).unwrap();
        assert!(a.value.norm() > 1e-3);
        assert!((a.value - b.value).norm() < 1e-8 * a.value.norm(), "{a:?} {b:?}");
        let r = decompose(&psi, &phi, &model, &bent, ExpansionMode::Physical).unwrap();
        assert!(r.residual < 1e-6);

        let low = ContourPath::horizontal_line(-0.6, Sheet::Second).unwrap();
        let r = decompose(&psi, &phi, &model, &low, ExpansionMode::FullLine).unwrap();
        assert!(r.background.norm() < 1e-12);
    }

    #[test]
    fn pole_on_path_is_rejected() {
        let path = ContourPath::horizontal_line(-0.05, Sheet::Second).unwrap();
        assert!(matches!(
            decompose(&wf(c(0.0, 1.0)), &wf(c(0.0, 2.0)), &one_pole(), &path, ExpansionMode::FullLine),
            Err(Error::PoleOnPath { .. })
        ));
    }

    #[test]
    fn physical_mode_along_negative_axis() {
        let model = one_pole();
        let (psi, phi) = (wf(c(0.0, 1.0)), wf(c(0.5, 2.0)));
        let r = decompose_default(&psi, &phi, &model, ExpansionMode::Physical).unwrap();
        assert_eq!(r.poles.len(), 1);
        assert!(r.residual < 1e-6, "{r:?}");
        assert!(r.negative_axis_tail.is_none());

        let via_s = background_term_momentum(&psi, &phi, &model).unwrap();
        assert!((via_s.value - r.background).norm() < 1e-8 * r.background.norm());

        let hl = ContourPath::horizontal_line(-1.0, Sheet::Second).unwrap();
        let r2 = decompose(&psi, &phi, &model, &hl, ExpansionMode::Physical).unwrap();
        let tail = r2.negative_axis_tail.unwrap();
        assert!((r2.residual * r2.direct.norm() - tail.norm()).abs() < 1e-8);
    }

    #[test]
    fn identity_background_is_the_negative_axis_integral() {
        let id = SMatrixModel::identity();
        let (psi, phi) = (wf(c(0.0, 1.0)), wf(c(0.5, 2.0)));
        let path = ContourPath::negative_real_axis(0.0, Sheet::Second).unwrap();
        let bg = background_term(&psi, &phi, &id, &path).unwrap().value;
        let hints = Hints::from_singularities(&[c(0.0, 1.0), c(0.5, 2.0)]);
        let direct = try_integrate_interval(
            |e| Ok(psi.at_real(e) * phi.at_real(e)),
            0.0,
            f64::NEG_INFINITY,
            &hints,
            tolerance(),
        )
        .unwrap()
        .value;
        assert!((bg - direct).norm() < 1e-10);
    }

    #[test]
    fn background_is_small_for_a_narrow_resonance() {
        let model = SMatrixModel::flat(vec![ResonancePole::new(10.0, 0.01).unwrap()], c(-1.0, 0.0)).unwrap();
        let psi = wf(c(10.0, 0.05));
        let phi = wf(c(10.2, 0.08));
        let r = decompose_default(&psi, &phi, &model, ExpansionMode::Physical).unwrap();
        assert!(r.background.norm() / r.poles[0].value.norm() < 0.05, "{r:?}");
    }

    #[test]
    fn uniformized_negative_axis_background() {
        let model = SMatrixModel::uniformized(vec![ResonancePole::new(2.0, 0.3).unwrap()], c(1.0, 0.0)).unwrap();
        let (psi, phi) = (wf(c(0.0, 1.0)), wf(c(1.0, 1.5)));
        let path = default_path(&model, ExpansionMode::Physical).unwrap();
        let a = background_term(&psi, &phi, &model, &path).unwrap().value;
        let b = background_term_momentum(&psi, &phi, &model).unwrap().value;
        assert!((a - b).norm() < 1e-8 * a.norm());
        let r = decompose(&psi, &phi, &model, &path, ExpansionMode::Physical).unwrap();
        assert_eq!(r.tier, ModelTier::Demonstration);
        assert_eq!(r.poles.len(), 1);
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn completeness_examples() {
        let small = |w: &EnergyWaveFunction| TimeGrid::new(TimeGrid::for_wavefunction(w).half_width, 1 << 11).unwrap();
        let a = wf(c(0.0, 1.0));
        assert!((energy_norm(&a).unwrap() - PI).abs() < 1e-10);
        assert!(continuum_completeness_defect_on(&a, small(&a)).unwrap() < 1e-6);
        let a3 = a.scaled(c(3.0, 0.0));
        assert!(continuum_completeness_defect_on(&a3, small(&a3)).unwrap() < 1e-6);
        let prod = a.product(&wf(c(0.0, 2.0))).unwrap();
        assert!(continuum_completeness_defect_on(&prod, small(&prod)).unwrap() < 1e-6);
    }
}
