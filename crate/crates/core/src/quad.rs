//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands.
//!
//! Every integral in the crate is reduced to a parameter integral over a
//! finite interval and handed to [`adaptive`]: a global, priority-driven
//! bisection over 10/21-point Gauss-Kronrod panels (the QUADPACK `qag`
//! scheme). Infinite ranges go through the tangent map `E = c + w tan(theta)`.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum bisection depth of a single panel.
pub const MAX_DEPTH: u32 = 60;

/// Relative size of the rounding floor against `int |f|`.
const ROUNDOFF_FLOOR: f64 = 100.0 * f64::EPSILON;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_111_248,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Weights of the embedded 10-point Gauss rule, paired with XGK[1], XGK[3], ...
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Absolute plus relative accuracy request.
///
/// A result is accepted once the summed error estimate is at most
/// `abs + rel * |value|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    /// Upper bound on the number of live panels.
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Tolerance::default()
        }
    }

    pub fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }

    pub fn target(&self, magnitude: f64) -> f64 {
        self.abs + self.rel * magnitude
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs >= 0.0 && self.rel >= 0.0) || (self.abs == 0.0 && self.rel == 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    pub const ZERO: QuadratureResult = QuadratureResult {
        value: Complex64::new(0.0, 0.0),
        error_estimate: 0.0,
        evaluations: 0,
    };

    pub(crate) fn combine(self, other: QuadratureResult) -> QuadratureResult {
        QuadratureResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    pub(crate) fn scale(self, factor: Complex64) -> QuadratureResult {
        QuadratureResult {
            value: self.value * factor,
            error_estimate: self.error_estimate * factor.norm(),
            evaluations: self.evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    mass: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position so that the processing
    // order never depends on heap internals.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One 21-point Kronrod panel with its embedded 10-point Gauss estimate.
fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<(Complex64, f64, f64)>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];

    let f_center = f(center)?;
    let mut res_gauss = Complex64::new(0.0, 0.0);
    let mut res_kronrod = f_center * WGK[10];
    let mut res_abs = WGK[10] * f_center.norm();

    for (j, &wg) in WG.iter().enumerate() {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += (f1 + f2) * wg;
        res_kronrod += (f1 + f2) * WGK[jtw];
        res_abs += WGK[jtw] * (f1.norm() + f2.norm());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_kronrod += (f1 + f2) * WGK[jtwm1];
        res_abs += WGK[jtwm1] * (f1.norm() + f2.norm());
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }

    let value = res_kronrod * half;
    let err = ((res_kronrod - res_gauss) * half).norm();
    let error = rescale_error(err, res_abs * abs_half, res_asc * abs_half);
    if !value.re.is_finite() || !value.im.is_finite() || !error.is_finite() {
        return Err(Error::NonConvergence {
            estimate: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    Ok((value, error, res_abs * abs_half))
}

/// Globally adaptive quadrature of `f` over the consecutive intervals of
/// `breaks` (which must be sorted, with at least two entries).
pub(crate) fn adaptive<F>(mut f: F, breaks: &[f64], tol: Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    tol.validate()?;
    debug_assert!(breaks.len() >= 2);

    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    let mut evaluations = 0usize;
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    let mut mass = 0.0;

    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, error, m) = gk21(&mut f, w[0], w[1])?;
        evaluations += 21;
        total += value;
        total_err += error;
        mass += m;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            mass: m,
            depth: 0,
        });
    }

    loop {
        // Cancellation can leave the result below what rounding resolves;
        // accept once the estimate sits at that floor.
        if total_err <= tol.target(total.norm()).max(ROUNDOFF_FLOOR * mass) {
            break;
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::NonConvergence {
                estimate: total_err,
                tolerance: tol.target(total.norm()),
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if worst.depth >= MAX_DEPTH || mid <= worst.a || mid >= worst.b {
            frozen.push(worst);
            continue;
        }
        if heap.len() + frozen.len() + 2 > tol.max_intervals {
            return Err(Error::NonConvergence {
                estimate: total_err,
                tolerance: tol.target(total.norm()),
            });
        }
        let (v1, e1, m1) = gk21(&mut f, worst.a, mid)?;
        let (v2, e2, m2) = gk21(&mut f, mid, worst.b)?;
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        mass += m1 + m2 - worst.mass;
        let depth = worst.depth + 1;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            mass: m1,
            depth,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            mass: m2,
            depth,
        });
    }

    // Final sum in left-to-right order, independent of the refinement history.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
    let error_estimate = panels.iter().map(|p| p.error).sum();
    Ok(QuadratureResult {
        value,
        error_estimate,
        evaluations,
    })
}

/// Where an integrand is expected to be hard: real breakpoints plus the
/// length scale used by the tangent map on infinite ranges.
#[derive(Debug, Clone, Default)]
pub struct Hints {
    pub points: Vec<f64>,
    pub center: f64,
    pub scale: f64,
}

impl Hints {
    /// Breakpoints clustered around the real projections of nearby
    /// singularities, whose distance to the axis sets the local scale.
    pub fn from_singularities(singularities: &[Complex64]) -> Self {
        let mut points = Vec::new();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in singularities {
            if !(s.re.is_finite() && s.im.is_finite()) {
                continue;
            }
            let d = s.im.abs();
            points.push(s.re);
            for k in [1.0, 4.0, 16.0] {
                if d > 0.0 {
                    points.push(s.re - k * d);
                    points.push(s.re + k * d);
                }
            }
            lo = lo.min(s.re);
            hi = hi.max(s.re);
        }
        let (center, spread) = if lo <= hi {
            (0.5 * (lo + hi), 0.5 * (hi - lo))
        } else {
            (0.0, 0.0)
        };
        Hints {
            points,
            center,
            scale: spread.max(1.0),
        }
    }

    pub fn with_points(mut self, extra: &[f64]) -> Self {
        self.points.extend_from_slice(extra);
        self
    }

    fn scale(&self) -> f64 {
        if self.scale > 0.0 {
            self.scale
        } else {
            1.0
        }
    }
}

fn sorted_breaks(lo: f64, hi: f64, inner: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut breaks: Vec<f64> = Vec::new();
    breaks.push(lo);
    breaks.extend(inner.filter(|x| x.is_finite() && *x > lo && *x < hi));
    breaks.push(hi);
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    breaks
}

/// `int f(E) dE` over `[a, b]`, where either end may be infinite.
///
/// Semi-infinite and infinite ranges use `E = c + w tan(theta)`; the
/// integrand must decay at least like `1/E^2` there.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, hints: &Hints, tol: Tolerance) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    try_integrate_interval(|e| Ok(f(e)), a, b, hints, tol)
}

pub(crate) fn try_integrate_interval<F>(
    f: F,
    a: f64,
    b: f64,
    hints: &Hints,
    tol: Tolerance,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if a.is_nan() || b.is_nan() {
        return Err(Error::invalid("NaN integration limit"));
    }
    if a == b {
        return Ok(QuadratureResult::ZERO);
    }
    if a > b {
        return try_integrate_interval(f, b, a, hints, tol).map(|r| r.scale(Complex64::new(-1.0, 0.0)));
    }
    let w = hints.scale();
    match (a.is_finite(), b.is_finite()) {
        (true, true) => {
            let breaks = sorted_breaks(a, b, hints.points.iter().copied());
            adaptive(f, &breaks, tol)
        }
        (false, false) => {
            let c = hints.center;
            let map = |e: f64| libm::atan((e - c) / w);
            let breaks = sorted_breaks(-FRAC_PI_2, FRAC_PI_2, hints.points.iter().map(|&p| map(p)));
            adaptive(
                |theta| {
                    let t = libm::tan(theta);
                    let jac = w * (1.0 + t * t);
                    Ok(f(c + w * t)? * jac)
                },
                &breaks,
                tol,
            )
        }
        (true, false) => {
            let map = |e: f64| libm::atan((e - a) / w);
            let breaks = sorted_breaks(0.0, FRAC_PI_2, hints.points.iter().map(|&p| map(p)));
            adaptive(
                |theta| {
                    let t = libm::tan(theta);
                    Ok(f(a + w * t)? * (w * (1.0 + t * t)))
                },
                &breaks,
                tol,
            )
        }
        (false, true) => {
            let map = |e: f64| libm::atan((e - b) / w);
            let breaks = sorted_breaks(-FRAC_PI_2, 0.0, hints.points.iter().map(|&p| map(p)));
            adaptive(
                |theta| {
                    let t = libm::tan(theta);
                    Ok(f(b + w * t)? * (w * (1.0 + t * t)))
                },
                &breaks,
                tol,
            )
        }
    }
}

/// `int_{-inf}^{inf} f(E) dE` for an integrand decaying at least like `1/E^2`.
pub fn integrate_real_line<F>(f: F, tol: Tolerance) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    integrate_interval(f, f64::NEG_INFINITY, f64::INFINITY, &Hints::default(), tol)
}

/// Real-line quadrature refined around the given complex singularities.
pub fn integrate_real_line_near<F>(f: F, singularities: &[Complex64], tol: Tolerance) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    let hints = Hints::from_singularities(singularities);
    integrate_interval(f, f64::NEG_INFINITY, f64::INFINITY, &hints, tol)
}

/// `(1 / 2 pi i) * closed integral of f` over the circle `|z - z0| = radius`.
///
/// Periodic trapezoid rule with doubling until the value settles. The
/// result is checked two ways: halving the radius must not move it by more
/// than `1e-8` relative (no other pole inside), and the next Laurent
/// coefficient `c_{-2}` must vanish (the pole is simple).
pub fn residue_at<F>(f: F, z0: Complex64, radius: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("residue circle radius must be positive"));
    }
    let outer = circle_moments(&f, z0, radius)?;
    let inner = circle_moments(&f, z0, 0.5 * radius)?;
    let residue = outer.residue;

    let mean_scale = outer.mean_abs * radius;
    let floor = 1e-8 * mean_scale;
    if (outer.residue - inner.residue).norm() > 1e-8 * residue.norm().max(floor) {
        return Err(Error::InconsistentResidue { at: z0 });
    }
    if outer.second.norm() > 1e-8 * (mean_scale * radius).max(f64::MIN_POSITIVE) {
        return Err(Error::InconsistentResidue { at: z0 });
    }
    Ok(residue)
}

struct CircleMoments {
    residue: Complex64,
    second: Complex64,
    mean_abs: f64,
}

fn circle_moments<F>(f: &F, z0: Complex64, radius: f64) -> Result<CircleMoments>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    // (1/2 pi i) \oint g dz = mean over theta of g(z) (z - z0)
    let sample = |n: usize| -> Result<CircleMoments> {
        let mut res = Complex64::new(0.0, 0.0);
        let mut second = Complex64::new(0.0, 0.0);
        let mut mean_abs = 0.0;
        for k in 0..n {
            let theta = 2.0 * PI * (k as f64) / (n as f64);
            let dz = Complex64::from_polar(radius, theta);
            let v = f(z0 + dz)?;
            res += v * dz;
            second += v * dz * dz;
            mean_abs += v.norm();
        }
        let nf = n as f64;
        Ok(CircleMoments {
            residue: res / nf,
            second: second / nf,
            mean_abs: mean_abs / nf,
        })
    };
    let mut n = 64;
    let mut prev = sample(n)?;
    while n < 1 << 16 {
        n *= 2;
        let next = sample(n)?;
        let delta = (next.residue - prev.residue).norm() + (next.second - prev.second).norm() / radius;
        let scale = next.mean_abs * radius;
        prev = next;
        if delta <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kronrod_weights_sum_to_interval_length() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_is_exact_for_degree_31() {
        // int_{-1}^{1} x^n dx = 2/(n+1) for even n, 0 for odd n.
        for n in 0..=31 {
            let mut f = |x: f64| Ok(c(x.powi(n), 0.0));
            let (v, _, _) = gk21(&mut f, -1.0, 1.0).unwrap();
            let exact = if n % 2 == 0 { 2.0 / (n as f64 + 1.0) } else { 0.0 };
            assert!((v.re - exact).abs() < 1e-14, "degree {n}: {} vs {exact}", v.re);
        }
    }

    #[test]
    fn lorentzian_over_real_line_is_pi() {
        let r = integrate_real_line(|e| c(1.0 / (e * e + 1.0), 0.0), Tolerance::default()).unwrap();
        assert!((r.value - c(PI, 0.0)).norm() < 1e-10);
        assert!(r.error_estimate <= Tolerance::default().target(PI));
    }

    #[test]
    fn gaussian_over_real_line() {
        let r = integrate_real_line(|e| c(libm::exp(-e * e), 0.0), Tolerance::default()).unwrap();
        assert!((r.value.re - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn poles_on_one_side_integrate_to_zero() {
        let p1 = c(0.0, 1.0);
        let p2 = c(1.0, 0.5);
        let f = |e: f64| {
            let z = c(e, 0.0);
            1.0 / ((z - p1) * (z - p2))
        };
        let r = integrate_real_line_near(f, &[p1, p2], Tolerance::default()).unwrap();
        assert!(r.value.norm() < 1e-10, "{}", r.value);
    }

    #[test]
    fn semi_infinite_and_reversed_limits() {
        let f = |e: f64| c(1.0 / (e * e + 1.0), 0.0);
        let h = Hints::default();
        let r = integrate_interval(f, 0.0, f64::INFINITY, &h, Tolerance::default()).unwrap();
        assert!((r.value.re - FRAC_PI_2).abs() < 1e-10);
        let r = integrate_interval(f, f64::INFINITY, 0.0, &h, Tolerance::default()).unwrap();
        assert!((r.value.re + FRAC_PI_2).abs() < 1e-10);
        let r = integrate_interval(f, f64::NEG_INFINITY, 1.0, &h, Tolerance::default()).unwrap();
        assert!((r.value.re - (FRAC_PI_2 + PI / 4.0)).abs() < 1e-10);
    }

    #[test]
    fn divergent_integrand_reports_non_convergence() {
        let r = integrate_interval(
            |e| c(1.0 / e, 0.0),
            0.0,
            1.0,
            &Hints::default(),
            Tolerance::default(),
        );
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn residue_examples() {
        let r = residue_at(|z| Ok(1.0 / (z - c(2.0, 0.0))), c(2.0, 0.0), 0.1).unwrap();
        assert!((r - c(1.0, 0.0)).norm() < 1e-12);

        let zr = c(1.0, -0.05);
        let r = residue_at(|z| Ok(c(0.0, 0.1) / (z - zr)), zr, 0.01).unwrap();
        assert!((r - c(0.0, 0.1)).norm() < 1e-13);

        let r = residue_at(|z| Ok(1.0 / ((z - 1.0) * (z - 3.0))), c(1.0, 0.0), 0.5).unwrap();
        assert!((r - c(-0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn residue_rejects_double_pole_and_crowded_circle() {
        let z0 = c(2.0, 0.0);
        let r = residue_at(|z| Ok(1.0 / ((z - z0) * (z - z0))), z0, 0.1);
        assert_eq!(r, Err(Error::InconsistentResidue { at: z0 }));

        // A second pole between radius/2 and radius.
        let r = residue_at(|z| Ok(1.0 / ((z - 1.0) * (z - 1.07))), c(1.0, 0.0), 0.1);
        assert_eq!(r, Err(Error::InconsistentResidue { at: c(1.0, 0.0) }));
    }
}
