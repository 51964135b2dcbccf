//! Exact golden rule for the decay of a Gamow state into a continuum of
//! channels, and its Born (delta-function) limit.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{try_integrate_interval, Hints, QuadratureResult, Tolerance};
use crate::smatrix::ResonancePole;

/// Lorentzian envelope `w^2 / ((E - center)^2 + w^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzDamping {
    pub center: f64,
    pub width: f64,
}

impl LorentzDamping {
    fn at(&self, e: f64) -> f64 {
        let w2 = self.width * self.width;
        let d = e - self.center;
        w2 / (d * d + w2)
    }
}

/// A channel's squared coupling `|v_b(E)|^2` as a function of energy.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    Constant(f64),
    /// `sum_n a_n E^n`, optionally times a Lorentzian envelope.
    Polynomial {
        coefficients: Vec<f64>,
        damping: Option<LorentzDamping>,
    },
    /// Piecewise linear through the table, constant beyond its ends.
    Tabulated { energies: Vec<f64>, values: Vec<f64> },
}

impl Coupling {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        match self {
            Coupling::Constant(c) => {
                if !nonneg(*c) {
                    return Err(Error::invalid("coupling strength must be finite and >= 0"));
                }
            }
            Coupling::Polynomial { coefficients, damping } => {
                if coefficients.is_empty() || !coefficients.iter().all(|&a| nonneg(a)) {
                    return Err(Error::invalid("polynomial coupling needs finite coefficients >= 0"));
                }
                let degree = coefficients.iter().rposition(|&a| a != 0.0).unwrap_or(0);
                let allowed = if let Some(d) = damping {
                    if !(d.width > 0.0 && d.width.is_finite() && d.center.is_finite()) {
                        return Err(Error::invalid("damping width must be > 0"));
                    }
                    2
                } else {
                    0
                };
                if degree > allowed {
                    return Err(Error::invalid("polynomial coupling grows too fast for the decay integral"));
                }
            }
            Coupling::Tabulated { energies, values } => {
                if energies.len() < 2 || energies.len() != values.len() {
                    return Err(Error::invalid("tabulated coupling needs matching tables of >= 2 points"));
                }
                if !energies.windows(2).all(|w| w[0] < w[1]) || !energies.iter().all(|e| e.is_finite()) {
                    return Err(Error::invalid("tabulated energies must be strictly increasing"));
                }
                if !values.iter().all(|&v| nonneg(v)) {
                    return Err(Error::invalid("tabulated coupling values must be >= 0"));
                }
            }
        }
        Ok(())
    }

    /// `|v(E)|^2`.
    pub fn squared(&self, e: f64) -> f64 {
        match self {
            Coupling::Constant(c) => *c,
            Coupling::Polynomial { coefficients, damping } => {
                let p = coefficients.iter().rev().fold(0.0, |acc, &a| acc * e + a);
                match damping {
                    Some(d) => p * d.at(e),
                    None => p,
                }
            }
            Coupling::Tabulated { energies, values } => {
                let n = energies.len();
                if e <= energies[0] {
                    return values[0];
                }
                if e >= energies[n - 1] {
                    return values[n - 1];
                }
                let i = energies.partition_point(|&x| x <= e) - 1;
                let s = (e - energies[i]) / (energies[i + 1] - energies[i]);
                values[i] + s * (values[i + 1] - values[i])
            }
        }
    }

    fn hint_points(&self) -> Vec<f64> {
        match self {
            Coupling::Tabulated { energies, .. } => energies.clone(),
            Coupling::Polynomial { damping: Some(d), .. } => alloc::vec![d.center],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayScenario {
    pub pole: ResonancePole,
    pub channels: Vec<Coupling>,
    /// Common factor applied to every `|v_b|^2`.
    pub normalization: f64,
    /// Energy `E_d` at which the Born rate samples the couplings; `E_R` when
    /// absent.
    pub born_energy: Option<f64>,
}

fn tolerance() -> Tolerance {
    Tolerance::new(1e-15, 1e-13).with_max_intervals(8000)
}

impl DecayScenario {
    pub fn new(pole: ResonancePole, channels: Vec<Coupling>) -> Result<Self> {
        for c in &channels {
            c.validate()?;
        }
        Ok(DecayScenario {
            pole,
            channels,
            normalization: 1.0,
            born_energy: None,
        })
    }

    pub fn with_born_energy(mut self, e: f64) -> Self {
        self.born_energy = Some(e);
        self
    }

    /// `normalization * sum_b |v_b(E)|^2`.
    pub fn strength(&self, e: f64) -> f64 {
        self.normalization * self.channels.iter().map(|c| c.squared(e)).sum::<f64>()
    }

    fn lorentzian(&self, e: f64) -> f64 {
        let d = e - self.pole.energy();
        let h = 0.5 * self.pole.width();
        1.0 / (d * d + h * h)
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<QuadratureResult> {
        let zr = self.pole.position();
        let mut points: Vec<f64> = self.channels.iter().flat_map(|c| c.hint_points()).collect();
        points.retain(|&p| p > 0.0);
        let hints = Hints::from_singularities(&[zr, zr.conj()]).with_points(&points);
        try_integrate_interval(|e| Ok(Complex64::new(f(e), 0.0)), 0.0, f64::INFINITY, &hints, tolerance())
    }

    /// `I = int_0^inf sum_b |v_b(E)|^2 / ((E - E_R)^2 + (Gamma/2)^2) dE`.
    pub fn lorentz_integral(&self) -> Result<QuadratureResult> {
        self.integrate(|e| self.strength(e) * self.lorentzian(e))
    }

    /// Rescale the couplings so that `I = 1`.
    pub fn normalize(&self) -> Result<DecayScenario> {
        let i = self.lorentz_integral()?.value.re;
        if !(i > 0.0) {
            return Err(Error::ZeroCoupling);
        }
        let mut out = self.clone();
        out.normalization /= i;
        Ok(out)
    }
}

/// `P(t)` together with the quadrature of `I` it was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProbability {
    pub value: f64,
    pub lorentz_integral: f64,
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::TimeDirectionViolation { t });
    }
    Ok(())
}

/// `P(t) = 1 - e^{-Gamma t} I`.
pub fn transition_probability(scenario: &DecayScenario, t: f64) -> Result<TransitionProbability> {
    check_time(t)?;
    let i = scenario.lorentz_integral()?.value.re;
    Ok(TransitionProbability {
        value: probability_from(scenario.pole.width(), t, i),
        lorentz_integral: i,
    })
}

/// `1 - e^{-Gamma t} I`, arranged to keep full relative accuracy near `t = 0`.
pub fn probability_from(gamma: f64, t: f64, lorentz_integral: f64) -> f64 {
    let x = -gamma * t;
    -libm::expm1(x) - libm::exp(x) * (lorentz_integral - 1.0)
}

/// `dP/dt = e^{-Gamma t} 2 pi int_0^inf (Gamma / 2 pi) sum_b |v_b|^2 / ((E - E_R)^2 + (Gamma/2)^2) dE`.
pub fn decay_rate(scenario: &DecayScenario, t: f64) -> Result<f64> {
    check_time(t)?;
    let gamma = scenario.pole.width();
    let weight = gamma / (2.0 * PI);
    let integral = scenario.integrate(|e| weight * scenario.strength(e) * scenario.lorentzian(e))?;
    Ok(libm::exp(-gamma * t) * 2.0 * PI * integral.value.re)
}

/// `Gamma_Born = 2 pi sum_b |v_b(E_d)|^2`.
pub fn born_rate(scenario: &DecayScenario) -> Result<f64> {
    let e = scenario.born_energy.unwrap_or(scenario.pole.energy());
    let rate = 2.0 * PI * scenario.strength(e);
    if !(rate > 0.0) {
        return Err(Error::ZeroCoupling);
    }
    Ok(rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn constant(e_r: f64, gamma: f64, c: f64) -> DecayScenario {
        DecayScenario::new(ResonancePole::new(e_r, gamma).unwrap(), vec![Coupling::Constant(c)]).unwrap()
    }

    fn arctan_oracle(e_r: f64, gamma: f64) -> f64 {
        (2.0 / gamma) * (libm::atan(2.0 * e_r / gamma) + PI / 2.0)
    }

    #[test]
    fn normalization_examples() {
        let s = constant(1.0, 0.01, 3.0);
        let i = s.lorentz_integral().unwrap().value.re;
        assert!((i - 3.0 * arctan_oracle(1.0, 0.01)).abs() < 1e-12 * i);

        let n = s.normalize().unwrap();
        let c = n.strength(0.5);
        assert!((c - 1.0 / arctan_oracle(1.0, 0.01)).abs() < 1e-13 * c);
        assert!((c / (0.01 / (2.0 * PI)) - 1.0).abs() < 0.01);

        let again = n.normalize().unwrap();
        assert!((again.normalization / n.normalization - 1.0).abs() < 1e-10);

        assert_eq!(constant(1.0, 0.01, 0.0).normalize(), Err(Error::ZeroCoupling));
    }

    #[test]
    fn probability_examples() {
        let s = constant(1.0, 0.1, 1.0).normalize().unwrap();
        assert!(transition_probability(&s, 0.0).unwrap().value.abs() < 1e-12);
        let p = transition_probability(&s, 10.0).unwrap().value;
        assert!((p - (1.0 - libm::exp(-1.0))).abs() < 1e-10);
        assert!((p - 0.632121).abs() < 1e-6);
        assert!((transition_probability(&s, 300.0).unwrap().value - 1.0).abs() < 1e-12);
        assert_eq!(
            transition_probability(&s, -1.0),
            Err(Error::TimeDirectionViolation { t: -1.0 })
        );
    }

    #[test]
    fn rate_examples() {
        let gamma = 0.05;
        let s = constant(1.0, gamma, 1.0).normalize().unwrap();
        assert!((decay_rate(&s, 0.0).unwrap() - gamma).abs() < 1e-8 * gamma);
        let t = 1.0 / gamma;
        assert!((decay_rate(&s, t).unwrap() - gamma / core::f64::consts::E).abs() < 1e-8 * gamma);

        let dt = 1e-4 / gamma;
        let i = s.lorentz_integral().unwrap().value.re;
        let t = 7.0;
        let fd = (probability_from(gamma, t + dt, i) - probability_from(gamma, t - dt, i)) / (2.0 * dt);
        assert!((decay_rate(&s, t).unwrap() - fd).abs() < 1e-6);
    }

    #[test]
    fn born_examples() {
        let mut prev = f64::INFINITY;
        for ratio in [1e-1, 1e-2, 1e-3] {
            let s = constant(1.0, ratio, 1.0).normalize().unwrap();
            let err = (born_rate(&s).unwrap() - ratio).abs() / ratio;
            assert!(err < 2.0 * ratio, "{ratio}: {err}");
            assert!(err < prev);
            // arctan correction: Gamma_B / Gamma - 1 ~ Gamma / (2 pi E_R)
            assert!((err / (ratio / (2.0 * PI)) - 1.0).abs() < 0.2);
            prev = err;
        }

        let mut prev = f64::INFINITY;
        for ratio in [1e-1, 1e-2, 1e-3] {
            let linear = Coupling::Polynomial {
                coefficients: vec![0.0, 1.0],
                damping: Some(LorentzDamping { center: 0.0, width: 50.0 }),
            };
            let s = DecayScenario::new(ResonancePole::new(1.0, ratio).unwrap(), vec![linear])
                .unwrap()
                .normalize()
                .unwrap();
            let gap = (born_rate(&s).unwrap() - ratio).abs() / ratio;
            assert!(gap > 0.0 && gap < prev);
            prev = gap;
        }

        let zero = DecayScenario::new(ResonancePole::new(1.0, 0.1).unwrap(), vec![]).unwrap();
        assert_eq!(born_rate(&zero), Err(Error::ZeroCoupling));
    }

    #[test]
    fn coupling_families() {
        let tab = Coupling::Tabulated {
            energies: vec![0.0, 1.0, 2.0],
            values: vec![1.0, 3.0, 2.0],
        };
        tab.validate().unwrap();
        assert_eq!(tab.squared(-1.0), 1.0);
        assert_eq!(tab.squared(0.5), 2.0);
        assert_eq!(tab.squared(1.5), 2.5);
        assert_eq!(tab.squared(9.0), 2.0);

        let grows = Coupling::Polynomial {
            coefficients: vec![0.0, 1.0],
            damping: None,
        };
        assert!(grows.validate().is_err());
        assert!(Coupling::Constant(-1.0).validate().is_err());

        let s = DecayScenario::new(ResonancePole::new(1.0, 0.2).unwrap(), vec![tab]).unwrap().normalize().unwrap();
        assert!((s.lorentz_integral().unwrap().value.re - 1.0).abs() < 1e-10);
    }
}
