//! Closed-form energy wave functions `sum_k c_k / (E - a_k)^{m_k}`.
//!
//! The rational form keeps every Titchmarsh, Fourier and residue identity
//! exactly checkable: the continuation to any complex point, the large-`E`
//! expansion and partial-fraction products are all computed in closed form.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::near;

/// Half-plane analyticity class of an energy wave function.
///
/// `Lower` is the Hardy class from below (H^2_-): analytic in the lower
/// half-plane, so every pole sits strictly above the real axis. `Upper` is
/// the mirror image. `Neither` covers everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HardyClass {
    Upper,
    Lower,
    Neither,
}

impl HardyClass {
    pub fn reflected(self) -> HardyClass {
        match self {
            HardyClass::Upper => HardyClass::Lower,
            HardyClass::Lower => HardyClass::Upper,
            HardyClass::Neither => HardyClass::Neither,
        }
    }

    /// Whether `z` lies strictly inside the half-plane of analyticity.
    pub fn contains(self, z: Complex64) -> bool {
        match self {
            HardyClass::Upper => z.im > 0.0,
            HardyClass::Lower => z.im < 0.0,
            HardyClass::Neither => false,
        }
    }
}

impl fmt::Display for HardyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HardyClass::Upper => "HARDY_UPPER",
            HardyClass::Lower => "HARDY_LOWER",
            HardyClass::Neither => "NEITHER",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleTerm {
    pub coefficient: Complex64,
    pub pole: Complex64,
    pub multiplicity: u32,
}

impl PoleTerm {
    pub fn new(coefficient: Complex64, pole: Complex64, multiplicity: u32) -> Self {
        PoleTerm {
            coefficient,
            pole,
            multiplicity,
        }
    }

    pub fn simple(coefficient: Complex64, pole: Complex64) -> Self {
        PoleTerm::new(coefficient, pole, 1)
    }
}

/// Multiplicative factor `exp(-(E - center)^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDamping {
    pub center: f64,
    pub width: f64,
}

impl GaussianDamping {
    fn factor(&self, z: Complex64) -> Complex64 {
        let u = (z - self.center) / self.width;
        (-(u * u) * 0.5).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyWaveFunction {
    terms: Vec<PoleTerm>,
    class: HardyClass,
    damping: Option<GaussianDamping>,
}

/// Decay order reported for Gaussian-damped functions.
pub const DAMPED_DECAY_ORDER: u32 = u32::MAX;

impl EnergyWaveFunction {
    /// Builds a wave function and checks the declared class against the
    /// pole positions.
    pub fn new(terms: Vec<PoleTerm>, class: HardyClass) -> Result<Self> {
        Self::build(terms, class, None)
    }

    /// A Gaussian-damped family. Damping destroys half-plane boundedness, so
    /// the declared class must be `Neither`.
    pub fn damped(terms: Vec<PoleTerm>, damping: GaussianDamping) -> Result<Self> {
        Self::build(terms, HardyClass::Neither, Some(damping))
    }

    /// Like [`EnergyWaveFunction::new`] but with the class read off the poles.
    pub fn inferred(terms: Vec<PoleTerm>) -> Result<Self> {
        let class = infer_class(&terms);
        Self::build(terms, class, None)
    }

    /// `1 / (E - pole)` with the class inferred.
    pub fn simple_pole(pole: Complex64) -> Result<Self> {
        Self::inferred(alloc::vec![PoleTerm::simple(Complex64::new(1.0, 0.0), pole)])
    }

    fn build(terms: Vec<PoleTerm>, class: HardyClass, damping: Option<GaussianDamping>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("wave function needs at least one term"));
        }
        for t in &terms {
            if t.multiplicity == 0 {
                return Err(Error::invalid("multiplicity must be >= 1"));
            }
            let finite = [t.coefficient.re, t.coefficient.im, t.pole.re, t.pole.im]
                .iter()
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::invalid("wave function term is not finite"));
            }
        }
        match class {
            HardyClass::Lower if terms.iter().any(|t| t.pole.im <= 0.0) => {
                return Err(Error::invalid(
                    "HARDY_LOWER requires every pole strictly in the upper half-plane",
                ))
            }
            HardyClass::Upper if terms.iter().any(|t| t.pole.im >= 0.0) => {
                return Err(Error::invalid(
                    "HARDY_UPPER requires every pole strictly in the lower half-plane",
                ))
            }
            _ => {}
        }
        if let Some(d) = damping {
            if !(d.width > 0.0 && d.width.is_finite() && d.center.is_finite()) {
                return Err(Error::invalid("damping width must be > 0"));
            }
        }
        Ok(EnergyWaveFunction { terms, class, damping })
    }

    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    /// Declared class.
    pub fn class(&self) -> HardyClass {
        self.class
    }

    pub fn damping(&self) -> Option<GaussianDamping> {
        self.damping
    }

    /// Class implied by the pole positions alone (ignores the declaration).
    pub fn pole_class(&self) -> HardyClass {
        if self.damping.is_some() {
            return HardyClass::Neither;
        }
        infer_class(&self.terms)
    }

    pub fn poles(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for t in &self.terms {
            if !out.contains(&t.pole) {
                out.push(t.pole);
            }
        }
        out
    }

    /// Value of the closed form (or its continuation) at `z`.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let mut sum = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            if near(z, t.pole) {
                return Err(Error::PoleHit { at: z, pole: t.pole });
            }
            sum += t.coefficient / (z - t.pole).powu(t.multiplicity);
        }
        if let Some(d) = self.damping {
            sum *= d.factor(z);
        }
        Ok(sum)
    }

    /// Real-axis value without the pole-collision guard; a pole on the axis
    /// yields a non-finite number, which quadrature reports as divergence.
    pub fn at_real(&self, e: f64) -> Complex64 {
        let z = Complex64::new(e, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            sum += t.coefficient / (z - t.pole).powu(t.multiplicity);
        }
        if let Some(d) = self.damping {
            sum *= d.factor(z);
        }
        sum
    }

    /// Coefficients `mu_1, mu_2, ...` of the expansion `f(E) = sum_n mu_n E^{-n}`
    /// together with the magnitude scale each coefficient is built from.
    fn asymptotic_coefficients(&self, count: usize) -> Vec<(Complex64, f64)> {
        let mut mu = alloc::vec![(Complex64::new(0.0, 0.0), 0.0); count + 1];
        for t in &self.terms {
            // (E - a)^{-m} = sum_j C(m + j - 1, j) a^j E^{-m-j}
            let m = t.multiplicity as usize;
            let mut binom = 1.0;
            let mut apow = Complex64::new(1.0, 0.0);
            let mut j = 0usize;
            while m + j <= count {
                let contrib = t.coefficient * apow * binom;
                mu[m + j].0 += contrib;
                mu[m + j].1 += contrib.norm();
                j += 1;
                binom = binom * ((m + j - 1) as f64) / (j as f64);
                apow *= t.pole;
            }
        }
        mu
    }

    /// Denominator degree of the reduced rational function.
    fn denominator_degree(&self) -> usize {
        self.poles()
            .iter()
            .map(|p| {
                self.terms
                    .iter()
                    .filter(|t| t.pole == *p)
                    .map(|t| t.multiplicity as usize)
                    .max()
                    .unwrap_or(0)
            })
            .sum()
    }

    /// Leading power of `1/E` at large `|E|`; cancellations between terms are
    /// detected relative to the size of the contributing pieces.
    pub fn decay_order(&self) -> u32 {
        if self.damping.is_some() {
            return DAMPED_DECAY_ORDER;
        }
        let degree = self.denominator_degree();
        let mu = self.asymptotic_coefficients(degree);
        for (n, (value, scale)) in mu.iter().enumerate().skip(1) {
            if value.norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return n as u32;
            }
        }
        // Identically zero.
        DAMPED_DECAY_ORDER
    }

    /// Coefficient of `1/E` in the large-`E` expansion.
    pub fn leading_inverse_coefficient(&self) -> Complex64 {
        if self.damping.is_some() {
            return Complex64::new(0.0, 0.0);
        }
        self.terms
            .iter()
            .filter(|t| t.multiplicity == 1)
            .fold(Complex64::new(0.0, 0.0), |acc, t| acc + t.coefficient)
    }

    /// Exact residue at `z0` from the partial-fraction form.
    pub fn exact_residue(&self, z0: Complex64) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.multiplicity == 1 && t.pole == z0)
            .fold(Complex64::new(0.0, 0.0), |acc, t| acc + t.coefficient)
    }

    pub fn scaled(&self, factor: Complex64) -> EnergyWaveFunction {
        let terms = self
            .terms
            .iter()
            .map(|t| PoleTerm {
                coefficient: t.coefficient * factor,
                ..*t
            })
            .collect();
        EnergyWaveFunction {
            terms,
            class: self.class,
            damping: self.damping,
        }
    }

    /// `self + other`. Both must be undamped (or share the same damping).
    pub fn sum(&self, other: &EnergyWaveFunction) -> Result<EnergyWaveFunction> {
        if self.damping != other.damping {
            return Err(Error::invalid("cannot add wave functions with different damping"));
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        let class = if self.class == other.class {
            self.class
        } else {
            HardyClass::Neither
        };
        Self::build(terms, class, self.damping)
    }

    /// `E -> -E`: maps the Hardy class from below onto the one from above.
    pub fn reflected(&self) -> EnergyWaveFunction {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let sign = if t.multiplicity % 2 == 0 { 1.0 } else { -1.0 };
                PoleTerm {
                    coefficient: t.coefficient * sign,
                    pole: -t.pole,
                    multiplicity: t.multiplicity,
                }
            })
            .collect();
        EnergyWaveFunction {
            terms,
            class: self.class.reflected(),
            damping: self.damping.map(|d| GaussianDamping {
                center: -d.center,
                width: d.width,
            }),
        }
    }

    /// `E * f(E)` in closed form. Needs decay order >= 2 so that the
    /// polynomial part (the sum of the simple-pole coefficients) vanishes.
    pub fn multiplied_by_energy(&self) -> Result<EnergyWaveFunction> {
        if self.damping.is_some() {
            return Err(Error::invalid("energy multiplication needs an undamped family"));
        }
        let order = self.decay_order();
        if order < 2 {
            return Err(Error::DecayTooSlow { order, required: 2 });
        }
        // E / (E - a)^m = 1/(E - a)^{m-1} + a/(E - a)^m; the m = 1 constants cancel.
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.multiplicity > 1 {
                terms.push(PoleTerm::new(t.coefficient, t.pole, t.multiplicity - 1));
            }
            terms.push(PoleTerm::new(t.coefficient * t.pole, t.pole, t.multiplicity));
        }
        Self::build(terms, self.class, None)
    }

    /// Partial-fraction form of the product `self * other`.
    ///
    /// The principal part at each pole is read off the product of the two
    /// Laurent expansions; since both factors vanish at infinity the product
    /// has no polynomial part and equals the sum of its principal parts.
    pub fn product(&self, other: &EnergyWaveFunction) -> Result<EnergyWaveFunction> {
        if self.damping.is_some() || other.damping.is_some() {
            return Err(Error::invalid("products are only formed for undamped families"));
        }
        let mut poles = self.poles();
        for p in other.poles() {
            if !poles.contains(&p) {
                poles.push(p);
            }
        }
        let mut terms = Vec::new();
        for &p in &poles {
            let mf = self.order_at(p);
            let mg = other.order_at(p);
            let total = mf + mg;
            // Laurent coefficients alpha_j for j in [-mf, mg), beta_j for j in [-mg, mf).
            let alpha = self.laurent(p, mf, mg);
            let beta = other.laurent(p, mg, mf);
            for n in 1..=total {
                // coefficient of (E - p)^{-n}: sum over i + j = -n
                let mut acc = Complex64::new(0.0, 0.0);
                for (ia, a) in alpha.iter().enumerate() {
                    let i = ia as i64 - mf as i64;
                    let j = -(n as i64) - i;
                    let jb = j + mg as i64;
                    if jb >= 0 && (jb as usize) < beta.len() {
                        acc += *a * beta[jb as usize];
                    }
                }
                if acc != Complex64::new(0.0, 0.0) {
                    terms.push(PoleTerm::new(acc, p, n as u32));
                }
            }
        }
        if terms.is_empty() {
            return Err(Error::invalid("product vanishes identically"));
        }
        let class = if self.class == other.class {
            self.class
        } else {
            HardyClass::Neither
        };
        Self::build(terms, class, None)
    }

    fn order_at(&self, p: Complex64) -> usize {
        self.terms
            .iter()
            .filter(|t| t.pole == p)
            .map(|t| t.multiplicity as usize)
            .max()
            .unwrap_or(0)
    }

    /// Laurent coefficients at `p` for powers `-neg .. pos - 1`.
    fn laurent(&self, p: Complex64, neg: usize, pos: usize) -> Vec<Complex64> {
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); neg + pos];
        for t in &self.terms {
            let m = t.multiplicity as usize;
            if t.pole == p {
                out[neg - m] += t.coefficient;
                continue;
            }
            // c (E - a)^{-m} = c sum_j C(-m, j) (p - a)^{-m-j} (E - p)^j
            let d = p - t.pole;
            let mut coeff = t.coefficient / d.powu(m as u32);
            for j in 0..pos {
                out[neg + j] += coeff;
                coeff = coeff * (-((m + j) as f64) / ((j + 1) as f64)) / d;
            }
        }
        out
    }
}

fn infer_class(terms: &[PoleTerm]) -> HardyClass {
    if terms.iter().all(|t| t.pole.im > 0.0) {
        HardyClass::Lower
    } else if terms.iter().all(|t| t.pole.im < 0.0) {
        HardyClass::Upper
    } else {
        HardyClass::Neither
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one(pole: Complex64) -> PoleTerm {
        PoleTerm::simple(c(1.0, 0.0), pole)
    }

    #[test]
    fn evaluation_examples() {
        let wf = EnergyWaveFunction::simple_pole(c(0.0, 1.0)).unwrap();
        assert!((wf.evaluate(c(0.0, 0.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        let z = c(1.0, -1.5);
        let expected = 1.0 / c(1.0, -2.5);
        assert!((wf.evaluate(z).unwrap() - expected).norm() < 1e-15);

        let two = EnergyWaveFunction::new(vec![one(c(0.0, 1.0)), one(c(0.0, 2.0))], HardyClass::Lower).unwrap();
        let expected = 1.0 / c(1.0, -1.0) + 1.0 / c(1.0, -2.0);
        assert!((two.evaluate(c(1.0, 0.0)).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn pole_hit_is_reported() {
        let wf = EnergyWaveFunction::simple_pole(c(0.0, 1.0)).unwrap();
        assert!(matches!(wf.evaluate(c(0.0, 1.0)), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn declared_class_is_checked() {
        assert!(EnergyWaveFunction::new(vec![one(c(0.0, -1.0))], HardyClass::Lower).is_err());
        assert!(EnergyWaveFunction::new(vec![one(c(0.0, 1.0))], HardyClass::Upper).is_err());
        assert!(EnergyWaveFunction::new(vec![one(c(0.0, 1.0))], HardyClass::Neither).is_ok());
        let wf = EnergyWaveFunction::new(vec![one(c(0.0, 1.0)), one(c(0.0, -1.0))], HardyClass::Neither).unwrap();
        assert_eq!(wf.pole_class(), HardyClass::Neither);
    }

    #[test]
    fn decay_order_sees_cancellation() {
        let wf = EnergyWaveFunction::simple_pole(c(0.0, 1.0)).unwrap();
        assert_eq!(wf.decay_order(), 1);
        let diff = EnergyWaveFunction::new(
            vec![one(c(0.0, 1.0)), PoleTerm::simple(c(-1.0, 0.0), c(0.0, 2.0))],
            HardyClass::Lower,
        )
        .unwrap();
        assert_eq!(diff.decay_order(), 2);
        let sq = EnergyWaveFunction::new(vec![PoleTerm::new(c(1.0, 0.0), c(0.0, 1.0), 2)], HardyClass::Lower).unwrap();
        assert_eq!(sq.decay_order(), 2);
    }

    #[test]
    fn energy_multiplication_matches_pointwise() {
        let a = c(0.0, 1.0);
        let b = c(0.0, 2.0);
        let g = EnergyWaveFunction::simple_pole(a).unwrap().product(&EnergyWaveFunction::simple_pole(b).unwrap()).unwrap();
        let eg = g.multiplied_by_energy().unwrap();
        for z in [c(0.3, -0.7), c(-2.0, 0.0), c(5.0, 3.0)] {
            let lhs = eg.evaluate(z).unwrap();
            let rhs = z * g.evaluate(z).unwrap();
            assert!((lhs - rhs).norm() < 1e-13 * rhs.norm().max(1.0));
        }
        let slow = EnergyWaveFunction::simple_pole(a).unwrap();
        assert_eq!(slow.multiplied_by_energy(), Err(Error::DecayTooSlow { order: 1, required: 2 }));
    }

    #[test]
    fn reflection_swaps_class() {
        let wf = EnergyWaveFunction::simple_pole(c(0.5, 1.0)).unwrap();
        let r = wf.reflected();
        assert_eq!(r.class(), HardyClass::Upper);
        for e in [-2.0, 0.0, 0.7] {
            assert!((r.at_real(e) - wf.at_real(-e)).norm() < 1e-15);
        }
    }

    fn arb_pole() -> impl Strategy<Value = Complex64> {
        (-3.0f64..3.0, prop_oneof![0.05f64..2.0, -2.0f64..-0.05]).prop_map(|(re, im)| c(re, im))
    }

    fn arb_term() -> impl Strategy<Value = PoleTerm> {
        (-2.0f64..2.0, -2.0f64..2.0, arb_pole(), 1u32..=3)
            .prop_map(|(cr, ci, p, m)| PoleTerm::new(c(cr, ci), p, m))
    }

    proptest! {
        #[test]
        fn product_agrees_with_pointwise_product(
            f in proptest::collection::vec(arb_term(), 1..4),
            g in proptest::collection::vec(arb_term(), 1..4),
            zr in -4.0f64..4.0,
            zi in -4.0f64..4.0,
        ) {
            let f = EnergyWaveFunction::inferred(f).unwrap();
            let g = EnergyWaveFunction::inferred(g).unwrap();
            let z = c(zr, zi);
            let fz = f.evaluate(z);
            let gz = g.evaluate(z);
            prop_assume!(fz.is_ok() && gz.is_ok());
            let poles: Vec<Complex64> = f.poles().into_iter().chain(g.poles()).collect();
            let min_sep = poles.iter().flat_map(|p| poles.iter().map(move |q| (p - q).norm()))
                .filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
            let min_dist = poles.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min);
            prop_assume!(min_sep > 0.05 && min_dist > 0.05);
            let expected = fz.unwrap() * gz.unwrap();
            if let Ok(prod) = f.product(&g) {
                let got = prod.evaluate(z).unwrap();
                prop_assert!((got - expected).norm() <= 1e-8 * expected.norm().max(1.0),
                    "{got} vs {expected}");
            }
        }
    }
}
