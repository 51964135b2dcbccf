//! Hardy-class certification: Fourier transforms of energy wave functions,
//! the Paley-Wiener half-line support test and the Titchmarsh
//! representation of boundary values.
//!
//! A function analytic in the lower half-plane (class `Lower`) has a Fourier
//! transform `F(t) = int f(E) e^{-iEt} dE` supported on `t <= 0`; a class
//! `Upper` function has support on `t >= 0`. Classification measures how
//! much of `|F|^2` falls on the forbidden half-line.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{try_integrate_interval, Hints, QuadratureResult, Tolerance};
use crate::wavefunction::{EnergyWaveFunction, HardyClass};
use crate::I;

/// Forbidden-mass fraction below which a half-line counts as empty.
pub const CLASSIFICATION_THRESHOLD: f64 = 1e-4;

/// Default half-width in units of `1 / E_scale`.
pub const DEFAULT_SPAN: f64 = 50.0;

/// Default number of intervals on each side of `t = 0` (`2^14 + 1` points).
pub const DEFAULT_POINTS_PER_SIDE: usize = 1 << 13;

/// Uniform time grid `t_j = j * half_width / per_side`, `j = -per_side ..= per_side`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub half_width: f64,
    pub per_side: usize,
}

impl TimeGrid {
    pub fn new(half_width: f64, per_side: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::invalid("time grid half-width must be > 0"));
        }
        if per_side < 2 || !per_side.is_multiple_of(2) {
            return Err(Error::invalid("points per side must be even and >= 2"));
        }
        Ok(TimeGrid { half_width, per_side })
    }

    /// `[-50 / E_scale, 50 / E_scale]` with `E_scale` the smallest distance of
    /// a pole to the real axis (or the damping width, if smaller).
    pub fn for_wavefunction(wf: &EnergyWaveFunction) -> Self {
        let mut scale = f64::INFINITY;
        for p in wf.poles() {
            if p.im != 0.0 {
                scale = scale.min(p.im.abs());
            }
        }
        if let Some(d) = wf.damping() {
            scale = scale.min(d.width);
        }
        if !scale.is_finite() {
            scale = 1.0;
        }
        TimeGrid {
            half_width: DEFAULT_SPAN / scale,
            per_side: DEFAULT_POINTS_PER_SIDE,
        }
    }

    /// Same span with `factor` times as many points.
    pub fn refined(&self, factor: usize) -> Self {
        TimeGrid {
            half_width: self.half_width,
            per_side: self.per_side * factor.max(1),
        }
    }

    pub fn spacing(&self) -> f64 {
        self.half_width / self.per_side as f64
    }

    pub fn len(&self) -> usize {
        2 * self.per_side + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, index: usize) -> f64 {
        (index as f64 - self.per_side as f64) * self.spacing()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourierMethod {
    /// Real-axis quadrature on `[-L, L]` plus tails rotated into the
    /// half-plane where `e^{-iEt}` decays.
    RotatedTailQuadrature,
    /// Truncated real-axis quadrature (Gaussian-damped families).
    TruncatedQuadrature,
}

/// Samples of `F(t)` on a symmetric uniform grid.
///
/// `F` may jump at `t = 0` when the wave function decays only like `1/E`;
/// the one-sided limits are kept next to the principal value stored in
/// `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
    pub limit_from_below: Complex64,
    pub limit_from_above: Complex64,
    pub method: FourierMethod,
}

impl TimeSignal {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.grid.time(i))
    }

    fn half_line_energy(&self, positive: bool) -> f64 {
        let n = self.grid.per_side;
        let mid = n;
        let h = self.grid.spacing();
        // composite Simpson from t = 0 outwards
        let sample = |k: usize| -> f64 {
            if k == 0 {
                if positive {
                    self.limit_from_above.norm_sqr()
                } else {
                    self.limit_from_below.norm_sqr()
                }
            } else if positive {
                self.values[mid + k].norm_sqr()
            } else {
                self.values[mid - k].norm_sqr()
            }
        };
        let mut sum = sample(0) + sample(n);
        for k in 1..n {
            sum += if k % 2 == 1 { 4.0 } else { 2.0 } * sample(k);
        }
        sum * h / 3.0
    }

    /// `int_{t > 0} |F|^2 dt`.
    pub fn energy_positive(&self) -> f64 {
        self.half_line_energy(true)
    }

    /// `int_{t < 0} |F|^2 dt`.
    pub fn energy_negative(&self) -> f64 {
        self.half_line_energy(false)
    }

    pub fn energy(&self) -> f64 {
        self.energy_positive() + self.energy_negative()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyClassReport {
    pub inferred: HardyClass,
    /// Mass on the forbidden half-line of the inferred class; for `Neither`
    /// the smaller of the two half-line fractions.
    pub forbidden_mass_fraction: f64,
    pub positive_fraction: f64,
    pub negative_fraction: f64,
    pub threshold: f64,
    pub grid: TimeGrid,
}

fn fourier_tolerance(wf: &EnergyWaveFunction) -> Tolerance {
    let scale: f64 = wf
        .terms()
        .iter()
        .map(|t| t.coefficient.norm() / t.pole.im.abs().max(1e-3).powi(t.multiplicity as i32 - 1))
        .sum::<f64>()
        .max(1e-300);
    Tolerance::new(1e-12 * scale, 1e-10)
}

/// `F(t) = int f(E) e^{-iEt} dE` at a single time.
pub fn fourier_value(wf: &EnergyWaveFunction, t: f64) -> Result<QuadratureResult> {
    let tol = fourier_tolerance(wf);
    let poles = wf.poles();
    let f = |e: f64| wf.at_real(e);

    if let Some(d) = wf.damping() {
        let reach = poles.iter().map(|p| p.re.abs()).fold(d.center.abs(), f64::max);
        let l = reach + 12.0 * d.width + 1.0;
        return oscillatory_segment(&f, -l, l, t, &poles, tol);
    }

    let l = poles.iter().map(|p| p.norm()).fold(0.0, f64::max) + 1.0;
    let core = oscillatory_segment(&f, -l, l, t, &poles, tol)?;

    if t == 0.0 {
        // Principal value: the 1/E parts of the two tails cancel pairwise.
        let tail = try_integrate_interval(
            |e| Ok(f(e) + f(-e)),
            l,
            f64::INFINITY,
            &Hints {
                points: Vec::new(),
                center: l,
                scale: l,
            },
            tol,
        )?;
        return Ok(core.combine(tail));
    }

    // Rotate each tail into the half-plane where e^{-iEt} decays. No pole
    // has |Re| > L, so nothing is crossed.
    let sigma = if t > 0.0 { -1.0 } else { 1.0 };
    let decay = 1.0 / t.abs();
    let hints = Hints {
        points: Vec::new(),
        center: 0.0,
        scale: decay,
    };
    let tail = |edge: f64| {
        try_integrate_interval(
            |s| {
                let z = Complex64::new(edge, sigma * s);
                let v = wf.evaluate(z)?;
                Ok(v * (-I * z * t).exp() * I * sigma)
            },
            0.0,
            f64::INFINITY,
            &hints,
            tol,
        )
    };
    // int_L^inf = ray from L; int_{-inf}^{-L} = minus the ray from -L.
    let right = tail(l)?;
    let left = tail(-l)?.scale(Complex64::new(-1.0, 0.0));
    Ok(core.combine(right).combine(left))
}

fn oscillatory_segment<F>(f: &F, a: f64, b: f64, t: f64, poles: &[Complex64], tol: Tolerance) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    let mut hints = Hints::from_singularities(poles);
    let periods = ((b - a) * t.abs() / (2.0 * PI)).ceil() as usize;
    for k in 1..periods {
        hints.points.push(a + (b - a) * (k as f64) / (periods as f64));
    }
    let tol = tol.with_max_intervals(tol.max_intervals.max(8 * (periods + hints.points.len())));
    try_integrate_interval(|e| Ok(f(e) * Complex64::from_polar(1.0, -e * t)), a, b, &hints, tol)
}

/// Samples `F(t)` on `grid`.
pub fn fourier_transform_signal(wf: &EnergyWaveFunction, grid: TimeGrid) -> Result<TimeSignal> {
    let order = wf.decay_order();
    if order < 1 {
        return Err(Error::DecayTooSlow { order, required: 1 });
    }
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        values.push(fourier_value(wf, grid.time(i))?.value);
    }
    // F(0 -+) = PV -+ i pi mu_1, mu_1 the 1/E coefficient.
    let jump = I * PI * wf.leading_inverse_coefficient();
    let pv = values[grid.per_side];
    let method = if wf.damping().is_some() {
        FourierMethod::TruncatedQuadrature
    } else {
        FourierMethod::RotatedTailQuadrature
    };
    Ok(TimeSignal {
        grid,
        values,
        limit_from_below: pv + jump,
        limit_from_above: pv - jump,
        method,
    })
}

/// Paley-Wiener classification with the given forbidden-mass threshold.
pub fn paley_wiener_classify_with(signal: &TimeSignal, threshold: f64) -> Result<HardyClassReport> {
    let pos = signal.energy_positive();
    let neg = signal.energy_negative();
    let total = pos + neg;
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::invalid("signal has no energy"));
    }
    let (pf, nf) = (pos / total, neg / total);
    let (inferred, forbidden) = if pf < threshold {
        (HardyClass::Lower, pf)
    } else if nf < threshold {
        (HardyClass::Upper, nf)
    } else {
        (HardyClass::Neither, pf.min(nf))
    };
    Ok(HardyClassReport {
        inferred,
        forbidden_mass_fraction: forbidden,
        positive_fraction: pf,
        negative_fraction: nf,
        threshold,
        grid: signal.grid,
    })
}

pub fn paley_wiener_classify(signal: &TimeSignal) -> Result<HardyClassReport> {
    paley_wiener_classify_with(signal, CLASSIFICATION_THRESHOLD)
}

/// Transform on the default grid and classify.
pub fn classify_wavefunction(wf: &EnergyWaveFunction) -> Result<(TimeSignal, HardyClassReport)> {
    let signal = fourier_transform_signal(wf, TimeGrid::for_wavefunction(wf))?;
    let report = paley_wiener_classify(&signal)?;
    Ok((signal, report))
}

fn cauchy_integral(wf: &EnergyWaveFunction, z: Complex64, tol: Tolerance) -> Result<QuadratureResult> {
    let mut sing = wf.poles();
    sing.push(z);
    let hints = Hints::from_singularities(&sing);
    try_integrate_interval(
        |e| Ok(wf.at_real(e) / (Complex64::new(e, 0.0) - z)),
        f64::NEG_INFINITY,
        f64::INFINITY,
        &hints,
        tol,
    )
}

/// `G(z) = +-(1 / 2 pi i) int G(E) / (E - z) dE` over the whole real line,
/// `+` for the class from above (`Im z > 0`), `-` for the class from below
/// (`Im z < 0`).
pub fn titchmarsh_value(wf: &EnergyWaveFunction, z: Complex64) -> Result<Complex64> {
    titchmarsh_value_with(wf, z, Tolerance::new(1e-13, 1e-11))
}

pub fn titchmarsh_value_with(wf: &EnergyWaveFunction, z: Complex64, tol: Tolerance) -> Result<Complex64> {
    let class = wf.class();
    if !class.contains(z) {
        return Err(Error::WrongHalfPlane { at: z, class });
    }
    let sign = if class == HardyClass::Upper { 1.0 } else { -1.0 };
    let integral = cauchy_integral(wf, z, tol)?;
    Ok(integral.value * sign / (2.0 * PI * I))
}

/// `| int G(E) / (E - z*) dE |` for `z*` in the half-plane opposite to the
/// analyticity domain (where the Titchmarsh theorem says it vanishes).
pub fn titchmarsh_conjugate_defect(wf: &EnergyWaveFunction, z_conj: Complex64) -> Result<f64> {
    let class = wf.class();
    if class == HardyClass::Neither || !class.contains(z_conj.conj()) {
        return Err(Error::WrongHalfPlane { at: z_conj, class });
    }
    Ok(cauchy_integral(wf, z_conj, Tolerance::new(1e-13, 1e-11))?.value.norm())
}

/// `int |f(E)|^2 dE`.
pub fn energy_norm(wf: &EnergyWaveFunction) -> Result<f64> {
    let hints = Hints::from_singularities(&wf.poles());
    let r = try_integrate_interval(
        |e| Ok(Complex64::new(wf.at_real(e).norm_sqr(), 0.0)),
        f64::NEG_INFINITY,
        f64::INFINITY,
        &hints,
        Tolerance::new(1e-14, 1e-12),
    )?;
    Ok(r.value.re)
}
