//! Resonance poles and analytic two-sheet S-matrix models.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{near, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sheet {
    First,
    Second,
}

/// A point of the energy Riemann surface.
///
/// The sheet tag only matters for uniformized models; flat models are
/// single-valued.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEnergy {
    pub value: Complex64,
    pub sheet: Sheet,
}

impl ComplexEnergy {
    pub fn new(value: Complex64, sheet: Sheet) -> Self {
        ComplexEnergy { value, sheet }
    }

    pub fn first(value: Complex64) -> Self {
        ComplexEnergy::new(value, Sheet::First)
    }

    pub fn second(value: Complex64) -> Self {
        ComplexEnergy::new(value, Sheet::Second)
    }
}

/// Second-sheet resonance pole at `E_R - i Gamma/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePole {
    energy: f64,
    width: f64,
    residue: Complex64,
}

impl ResonancePole {
    /// `energy` is `E_R`, `width` is `Gamma`; both must be positive. The
    /// residue defaults to `i Gamma`.
    pub fn new(energy: f64, width: f64) -> Result<Self> {
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::invalid("E_R must be > 0"));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid("Gamma must be > 0"));
        }
        Ok(ResonancePole {
            energy,
            width,
            residue: I * width,
        })
    }

    pub fn with_residue(mut self, residue: Complex64) -> Self {
        self.residue = residue;
        self
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn residue(&self) -> Complex64 {
        self.residue
    }

    /// `z_R = E_R - i Gamma/2`.
    pub fn position(&self) -> Complex64 {
        Complex64::new(self.energy, -0.5 * self.width)
    }

    /// `z_R* = E_R + i Gamma/2`.
    pub fn conjugate_position(&self) -> Complex64 {
        self.position().conj()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Rational in `E`; both sheets coincide.
    FlatRationalE,
    /// Rational in `k` with `E - branch_point = k^2`.
    UniformizedRationalK,
}

/// Unitary S-matrix with one zero/pole pair per resonance.
///
/// * flat: `S(z) = b * prod_i (z - z_i*) / (z - z_i)`
/// * uniformized: `S(k) = b * prod_i (k + k_i)(k - k_i*) / ((k - k_i)(k + k_i*))`
///   where `k_i` is the fourth-quadrant root of `z_i - branch_point`.
///
/// The constant `b` must be unimodular for `|S| = 1` on the cut.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrixModel {
    kind: ModelKind,
    poles: Vec<ResonancePole>,
    background: Complex64,
    branch_point: f64,
}

impl SMatrixModel {
    pub fn new(kind: ModelKind, poles: Vec<ResonancePole>, background: Complex64, branch_point: f64) -> Result<Self> {
        if !(background.re.is_finite() && background.im.is_finite()) || background == Complex64::new(0.0, 0.0) {
            return Err(Error::invalid("background must be finite and nonzero"));
        }
        if !branch_point.is_finite() {
            return Err(Error::invalid("branch point must be finite"));
        }
        for (i, p) in poles.iter().enumerate() {
            if poles[..i].iter().any(|q| near(q.position(), p.position())) {
                return Err(Error::invalid("resonance poles must be distinct"));
            }
            if kind == ModelKind::UniformizedRationalK && p.energy() <= branch_point {
                return Err(Error::invalid("E_R must lie above the branch point"));
            }
        }
        Ok(SMatrixModel {
            kind,
            poles,
            background,
            branch_point,
        })
    }

    pub fn flat(poles: Vec<ResonancePole>, background: Complex64) -> Result<Self> {
        Self::new(ModelKind::FlatRationalE, poles, background, 0.0)
    }

    pub fn uniformized(poles: Vec<ResonancePole>, background: Complex64) -> Result<Self> {
        Self::new(ModelKind::UniformizedRationalK, poles, background, 0.0)
    }

    /// `S == 1`.
    pub fn identity() -> Self {
        SMatrixModel {
            kind: ModelKind::FlatRationalE,
            poles: Vec::new(),
            background: Complex64::new(1.0, 0.0),
            branch_point: 0.0,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn poles(&self) -> &[ResonancePole] {
        &self.poles
    }

    pub fn background(&self) -> Complex64 {
        self.background
    }

    pub fn branch_point(&self) -> f64 {
        self.branch_point
    }

    /// Fourth-quadrant momentum root of each pole.
    fn pole_momenta(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.poles
            .iter()
            .map(move |p| (p.position() - self.branch_point).sqrt())
    }

    /// Momentum of `z` on the requested sheet: `Im k >= 0` on the first,
    /// `Im k < 0` on the second. Exactly on the cut both sheets give the
    /// common boundary value `+sqrt(E)` (`S_I(E + i0) = S_II(E - i0)`).
    pub fn momentum(&self, z: ComplexEnergy) -> Result<Complex64> {
        let shifted = z.value - self.branch_point;
        if near(z.value, Complex64::new(self.branch_point, 0.0)) {
            return Err(Error::BranchPointHit { at: z.value });
        }
        let w = shifted.sqrt();
        if shifted.im == 0.0 && shifted.re > 0.0 {
            return Ok(w);
        }
        let k = match z.sheet {
            Sheet::First if w.im >= 0.0 => w,
            Sheet::First => -w,
            Sheet::Second if w.im < 0.0 => w,
            Sheet::Second => -w,
        };
        Ok(k)
    }

    /// `S` evaluated at a point of the Riemann surface.
    pub fn evaluate(&self, z: ComplexEnergy) -> Result<Complex64> {
        match self.kind {
            ModelKind::FlatRationalE => {
                let mut s = self.background;
                for p in &self.poles {
                    let zr = p.position();
                    if near(z.value, zr) {
                        return Err(Error::PoleHit { at: z.value, pole: zr });
                    }
                    s *= (z.value - zr.conj()) / (z.value - zr);
                }
                Ok(s)
            }
            ModelKind::UniformizedRationalK => {
                let k = self.momentum(z)?;
                self.evaluate_momentum(k).map_err(|e| match e {
                    Error::PoleHit { pole, .. } => Error::PoleHit {
                        at: z.value,
                        pole: pole * pole + self.branch_point,
                    },
                    other => other,
                })
            }
        }
    }

    /// Uniformized model as a function of momentum.
    pub fn evaluate_momentum(&self, k: Complex64) -> Result<Complex64> {
        let mut s = self.background;
        for kr in self.pole_momenta() {
            for pole in [kr, -kr.conj()] {
                if near(k, pole) {
                    return Err(Error::PoleHit { at: k, pole });
                }
            }
            s *= (k + kr) * (k - kr.conj()) / ((k - kr) * (k + kr.conj()));
        }
        Ok(s)
    }

    /// Exact residue in `E` of the second-sheet S-matrix at `z_i`.
    pub fn residue(&self, index: usize) -> Result<Complex64> {
        let pole = self
            .poles
            .get(index)
            .ok_or_else(|| Error::invalid("pole index out of range"))?;
        match self.kind {
            ModelKind::FlatRationalE => {
                let zr = pole.position();
                let mut r = self.background * (zr - zr.conj());
                for (j, q) in self.poles.iter().enumerate() {
                    if j != index {
                        let zq = q.position();
                        r *= (zr - zq.conj()) / (zr - zq);
                    }
                }
                Ok(r)
            }
            ModelKind::UniformizedRationalK => {
                let momenta: Vec<Complex64> = self.pole_momenta().collect();
                let kr = momenta[index];
                // Res_E = 2 k_R Res_k
                let mut r = self.background * (kr + kr) * (kr - kr.conj()) / (kr + kr.conj());
                for (j, &kq) in momenta.iter().enumerate() {
                    if j != index {
                        r *= (kr + kq) * (kr - kq.conj()) / ((kr - kq) * (kr + kq.conj()));
                    }
                }
                Ok(r * 2.0 * kr)
            }
        }
    }

    /// Boundary value `S_I(E + i0)` on the physical cut.
    pub fn on_cut(&self, e: f64) -> Result<Complex64> {
        self.evaluate(ComplexEnergy::first(Complex64::new(e, 0.0)))
    }
}

/// `max | |S(E + i0)| - 1 |` over the grid.
pub fn unitarity_defect(model: &SMatrixModel, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&e| match model.on_cut(e) {
            Ok(s) => (s.norm() - 1.0).abs(),
            Err(_) => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}
