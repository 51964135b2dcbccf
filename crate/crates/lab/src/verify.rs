//! Seeded randomized verification suites behind the `verify-all` task.

use gamow_lab_core::expansion::{
    background_term, decompose, decompose_default, default_path, continuum_completeness_defect_on,
};
use gamow_lab_core::gamow::{
    breit_wigner_pole_term, eigenvalue_defect, gamow_pairing, semigroup_divergence_scan, semigroup_factor,
    DEFAULT_CUTOFFS,
};
use gamow_lab_core::golden_rule::{born_rate, decay_rate, probability_from};
use gamow_lab_core::hardy::{
    fourier_transform_signal, paley_wiener_classify, titchmarsh_conjugate_defect, titchmarsh_value,
};
use gamow_lab_core::{
    Complex64, ContourPath, Coupling, DecayScenario, EnergyWaveFunction, Error, ExpansionMode, GamowFunctional,
    HardyClass, LorentzDamping, PoleTerm, ResonancePole, SMatrixModel, Sheet, TimeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    /// Worst defect over the cases (a count of misses for yes/no checks).
    pub defect: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Randomized cases per suite (the Fourier-based suites use fewer).
    pub cases: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, cases: 50 }
    }
}

/// Random families used by the suites.
pub mod random {
    use super::*;

    pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
        rng.gen_range(lo..hi)
    }

    pub fn complex(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
        Complex64::new(uniform(rng, -scale, scale), uniform(rng, -scale, scale))
    }

    /// A point strictly inside `class`'s half-plane.
    pub fn pole_in(rng: &mut ChaCha8Rng, class: HardyClass, min_im: f64) -> Complex64 {
        let im = uniform(rng, min_im, 2.0);
        let sign = if class == HardyClass::Upper { 1.0 } else { -1.0 };
        Complex64::new(uniform(rng, -3.0, 3.0), sign * im)
    }

    /// Rational function analytic in the half-plane of `class`: 1 to 3 terms
    /// of multiplicity 1 or 2 with poles on the other side of the axis.
    pub fn hardy(rng: &mut ChaCha8Rng, class: HardyClass) -> EnergyWaveFunction {
        let n = rng.gen_range(1..=3);
        let mut terms = Vec::with_capacity(n);
        for _ in 0..n {
            let mut c = complex(rng, 1.0);
            if c.norm() < 0.2 {
                c += Complex64::new(0.5, 0.0);
            }
            let pole = pole_in(rng, class.reflected(), 0.2);
            terms.push(PoleTerm::new(c, pole, rng.gen_range(1..=2)));
        }
        EnergyWaveFunction::new(terms, class).expect("poles placed in the right half-plane")
    }

    /// Single simple pole `c / (E - a)` of the class from below.
    pub fn lower_simple(rng: &mut ChaCha8Rng) -> EnergyWaveFunction {
        let a = pole_in(rng, HardyClass::Upper, 0.3);
        let c = Complex64::from_polar(uniform(rng, 0.5, 1.5), uniform(rng, -3.0, 3.0));
        EnergyWaveFunction::new(vec![PoleTerm::simple(c, a)], HardyClass::Lower).unwrap()
    }

    /// Class from below with decay order at least 2.
    pub fn lower_fast(rng: &mut ChaCha8Rng) -> EnergyWaveFunction {
        if rng.gen_bool(0.5) {
            lower_simple(rng).product(&lower_simple(rng)).unwrap()
        } else {
            let a = pole_in(rng, HardyClass::Upper, 0.3);
            EnergyWaveFunction::new(vec![PoleTerm::new(complex(rng, 1.0) + 1.0, a, 2)], HardyClass::Lower).unwrap()
        }
    }

    pub fn pole(rng: &mut ChaCha8Rng) -> ResonancePole {
        ResonancePole::new(uniform(rng, 0.5, 5.0), uniform(rng, 0.01, 1.0)).unwrap()
    }
}

fn rng_for(seed: u64, suite: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite);
    rng
}

/// Collects per-case defects; any error is a failure with its message.
struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    worst: f64,
    failures: usize,
    detail: Option<String>,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally {
            name,
            tolerance,
            cases: 0,
            worst: 0.0,
            failures: 0,
            detail: None,
        }
    }

    fn record(&mut self, case: usize, outcome: Result<f64, Error>) {
        self.cases += 1;
        match outcome {
            Ok(d) => {
                if d.is_nan() || d > self.worst {
                    self.worst = if d.is_nan() { f64::INFINITY } else { d };
                }
                if !(d < self.tolerance) {
                    self.failures += 1;
                    self.detail.get_or_insert_with(|| format!("case {case}: defect {d:e}"));
                }
            }
            Err(e) => {
                self.failures += 1;
                self.worst = f64::INFINITY;
                self.detail.get_or_insert_with(|| format!("case {case}: {e}"));
            }
        }
    }

    /// Yes/no case: the defect is the number of misses.
    fn flag(&mut self, case: usize, ok: Result<bool, Error>) {
        self.cases += 1;
        match ok {
            Ok(true) => {}
            Ok(false) => {
                self.failures += 1;
                self.worst += 1.0;
                self.detail.get_or_insert_with(|| format!("case {case} failed"));
            }
            Err(e) => {
                self.failures += 1;
                self.worst += 1.0;
                self.detail.get_or_insert_with(|| format!("case {case}: {e}"));
            }
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name.to_string(),
            cases: self.cases,
            defect: self.worst,
            tolerance: self.tolerance,
            passed: self.failures == 0,
            detail: self.detail,
        }
    }
}

fn relative(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm()
}

fn titchmarsh(opts: VerifyOptions) -> Vec<CheckOutcome> {
    let mut rng = rng_for(opts.seed, 1);
    let mut value = Tally::new("titchmarsh-value", 1e-8);
    let mut conj = Tally::new("titchmarsh-conjugate", 1e-8);
    for case in 0..opts.cases {
        let class = if rng.gen_bool(0.5) { HardyClass::Lower } else { HardyClass::Upper };
        let wf = random::hardy(&mut rng, class);
        let z = random::pole_in(&mut rng, class, 0.1);
        value.record(
            case,
            titchmarsh_value(&wf, z).and_then(|v| Ok(relative(v, wf.evaluate(z)?))),
        );
        conj.record(case, titchmarsh_conjugate_defect(&wf, z.conj()));
    }
    vec![value.finish(), conj.finish()]
}

fn gamow(opts: VerifyOptions) -> Vec<CheckOutcome> {
    let mut rng = rng_for(opts.seed, 2);
    let mut eig = Tally::new("gamow-eigenvalue", 1e-8);
    let mut pairing = Tally::new("gamow-pairing-continuation", 1e-8);
    let mut bw = Tally::new("breit-wigner-pole-term", 1e-8);
    for case in 0..opts.cases {
        let pole = random::pole(&mut rng);
        let g = GamowFunctional::decaying(pole);
        let test = random::lower_fast(&mut rng);
        eig.record(case, eigenvalue_defect(&g, &test));
        pairing.record(
            case,
            gamow_pairing(&g, &test).and_then(|v| Ok(relative(v, test.evaluate(pole.position())?))),
        );
        let psi = random::lower_simple(&mut rng);
        let phi = random::lower_simple(&mut rng);
        bw.record(
            case,
            breit_wigner_pole_term(&psi, &phi, &pole).map(|(lhs, rhs)| relative(lhs, rhs)),
        );
    }
    vec![eig.finish(), pairing.finish(), bw.finish()]
}

fn semigroup(opts: VerifyOptions) -> Vec<CheckOutcome> {
    let mut rng = rng_for(opts.seed, 3);
    let mut law = Tally::new("exponential-decay-law", 1e-12);
    let mut compose = Tally::new("semigroup-composition", 1e-14);
    let mut direction = Tally::new("time-direction-violation", 0.5);
    for case in 0..opts.cases {
        let pole = random::pole(&mut rng);
        let gamma = pole.width();
        for g in [GamowFunctional::decaying(pole), GamowFunctional::growing(pole)] {
            let sign = if g.allows(1.0) { 1.0 } else { -1.0 };
            for t in [0.0, 1.0 / gamma, 5.0 / gamma] {
                let t = sign * t;
                let want = (-gamma * t.abs()).exp();
                law.record(case, semigroup_factor(&g, t).map(|f| (f.norm_sqr() - want).abs() / want));
            }
            let t1 = sign * random::uniform(&mut rng, 0.0, 3.0 / gamma);
            let t2 = sign * random::uniform(&mut rng, 0.0, 3.0 / gamma);
            let phase = 1.0 + g.eigenvalue().norm() * (t1.abs() + t2.abs());
            compose.record(
                case,
                (|| {
                    let product = semigroup_factor(&g, t1)? * semigroup_factor(&g, t2)?;
                    Ok(relative(product, semigroup_factor(&g, t1 + t2)?) / phase)
                })(),
            );
            let misses = (1..=20)
                .map(|k| -sign * k as f64 * 0.5 / gamma)
                .filter(|&t| !matches!(semigroup_factor(&g, t), Err(Error::TimeDirectionViolation { .. })))
                .count();
            direction.record(case, Ok(misses as f64));
        }
    }
    vec![law.finish(), compose.finish(), direction.finish()]
}

fn arrow_of_time(opts: VerifyOptions) -> Vec<CheckOutcome> {
    let mut rng = rng_for(opts.seed, 4);
    let n = opts.cases.clamp(1, 3);
    let families: Vec<EnergyWaveFunction> = (0..n).map(|_| random::hardy(&mut rng, HardyClass::Lower)).collect();
    let results: Vec<Result<(f64, bool), Error>> = families
        .par_iter()
        .map(|wf| {
            let grid = TimeGrid::new(TimeGrid::for_wavefunction(wf).half_width, 1 << 11)?;
            let r = paley_wiener_classify(&fourier_transform_signal(wf, grid)?)?;
            let reflected = wf.reflected();
            let grid = TimeGrid::new(TimeGrid::for_wavefunction(&reflected).half_width, 1 << 11)?;
            let rr = paley_wiener_classify(&fourier_transform_signal(&reflected, grid)?)?;
            let flips = r.inferred == HardyClass::Lower && rr.inferred == HardyClass::Upper;
            Ok((r.forbidden_mass_fraction.max(rr.forbidden_mass_fraction), flips))
        })
        .collect();
    let mut mass = Tally::new("forbidden-half-line-mass", 1e-6);
    let mut flip = Tally::new("reflection-flips-class", 0.5);
    for (case, r) in results.into_iter().enumerate() {
        match r {
            Ok((m, f)) => {
                mass.record(case, Ok(m));
                flip.flag(case, Ok(f));
            }
            Err(e) => {
                mass.record(case, Err(e.clone()));
                flip.flag(case, Err(e));
            }
        }
    }
    vec![mass.finish(), flip.finish()]
}

fn flat_model(rng: &mut ChaCha8Rng, poles: usize) -> SMatrixModel {
    let list: Vec<ResonancePole> = (0..poles)
        .map(|k| {
            let base = 1.0 + 2.0 * k as f64;
            ResonancePole::new(random::uniform(rng, base, base + 1.5), random::uniform(rng, 0.05, 1.0)).unwrap()
        })
        .collect();
    let beta = if poles == 1 { -1.0 } else { 1.0 };
    SMatrixModel::flat(list, Complex64::new(beta, 0.0)).unwrap()
}

fn expansion(opts: VerifyOptions) -> Vec<CheckOutcome> {
    let mut rng = rng_for(opts.seed, 5);
    let mut one = Tally::new("expansion-one-pole", 1e-6);
    let mut two = Tally::new("expansion-two-pole", 1e-6);
    let mut path = Tally::new("background-path-independence", 1e-8);
    let mut none = Tally::new("expansion-no-pole", 1e-10);
    for case in 0..opts.cases {
        let psi = random::lower_simple(&mut rng);
        let phi = random::lower_simple(&mut rng);
        let m1 = flat_model(&mut rng, 1);
        let m2 = flat_model(&mut rng, 2);
        for mode in [ExpansionMode::FullLine, ExpansionMode::Physical] {
            one.record(case, decompose_default(&psi, &phi, &m1, mode).map(|r| r.residual));
            two.record(case, decompose_default(&psi, &phi, &m2, mode).map(|r| r.residual));
            none.record(
                case,
                decompose_default(&psi, &phi, &SMatrixModel::identity(), mode).map(|r| {
                    if r.poles.is_empty() {
                        r.residual
                    } else {
                        f64::INFINITY
                    }
                }),
            );
        }
        let angle = random::uniform(&mut rng, -2.9, -2.0);
        path.record(
            case,
            (|| {
                let axis = default_path(&m1, ExpansionMode::Physical)?;
                let a = background_term(&psi, &phi, &m1, &axis)?.value;
                let corner = Complex64::from_polar(random::uniform(&mut rng, 0.5, 2.0), angle);
                let bent = ContourPath::builder(Complex64::new(0.0, 0.0), Sheet::Second)
                    .line_to(corner)
                    .ray(Complex64::new(-1.0, -0.3))
                    .build()?;
                let b = background_term(&psi, &phi, &m1, &bent)?.value;
                decompose(&psi, &phi, &m1, &bent, ExpansionMode::Physical)?;
                Ok(relative(b, a))
            })(),
        );
    }
    vec![one.finish(), two.finish(), path.finish(), none.finish()]
}

fn completeness(opts: VerifyOptions) -> Vec<CheckOutcome> {
    let mut rng = rng_for(opts.seed, 6);
    let n = opts.cases.clamp(1, 3);
    let families: Vec<EnergyWaveFunction> = (0..n).map(|_| random::lower_simple(&mut rng)).collect();
    let results: Vec<Result<f64, Error>> = families
        .par_iter()
        .map(|wf| {
            let grid = TimeGrid::new(TimeGrid::for_wavefunction(wf).half_width, 1 << 11)?;
            continuum_completeness_defect_on(wf, grid)
        })
        .collect();
    let mut t = Tally::new("continuum-completeness", 1e-6);
    for (case, r) in results.into_iter().enumerate() {
        t.record(case, r);
    }
    vec![t.finish()]
}

fn golden_rule(opts: VerifyOptions) -> Vec<CheckOutcome> {
    let mut rng = rng_for(opts.seed, 7);
    let mut prob = Tally::new("golden-rule-probability", 1e-10);
    let mut rate = Tally::new("golden-rule-rate", 1e-8);
    let mut fd = Tally::new("golden-rule-finite-difference", 1e-6);
    for case in 0..opts.cases.min(10) {
        let e_r = random::uniform(&mut rng, 1.0, 5.0);
        let gamma = random::uniform(&mut rng, 1e-3, 0.2);
        let coupling = if rng.gen_bool(0.5) {
            Coupling::Constant(random::uniform(&mut rng, 0.1, 2.0))
        } else {
            Coupling::Polynomial {
                coefficients: vec![random::uniform(&mut rng, 0.1, 1.0), random::uniform(&mut rng, 0.0, 1.0)],
                damping: Some(LorentzDamping {
                    center: 0.0,
                    width: random::uniform(&mut rng, 5.0, 20.0),
                }),
            }
        };
        let outcome = (|| {
            let s = DecayScenario::new(ResonancePole::new(e_r, gamma)?, vec![coupling])?.normalize()?;
            let i = s.lorentz_integral()?.value.re;
            let mut worst = 0.0f64;
            for k in 0..500 {
                let t = 10.0 / gamma * k as f64 / 499.0;
                let p = probability_from(gamma, t, i);
                worst = worst.max((p - (-(-gamma * t).exp_m1())).abs());
            }
            let r0 = decay_rate(&s, 0.0)?;
            let t = 1.0 / gamma;
            let dt = 1e-4 / gamma;
            let slope = (probability_from(gamma, t + dt, i) - probability_from(gamma, t - dt, i)) / (2.0 * dt);
            Ok::<_, Error>((worst, (r0 - gamma).abs() / gamma, (decay_rate(&s, t)? - slope).abs()))
        })();
        match outcome {
            Ok((p, r, d)) => {
                prob.record(case, Ok(p));
                rate.record(case, Ok(r));
                fd.record(case, Ok(d));
            }
            Err(e) => {
                prob.record(case, Err(e.clone()));
                rate.record(case, Err(e.clone()));
                fd.record(case, Err(e));
            }
        }
    }

    let mut born = Tally::new("born-convergence", 1.0);
    let e_r = random::uniform(&mut rng, 1.0, 5.0);
    let outcome = (|| {
        let mut prev = f64::INFINITY;
        let mut worst = 0.0f64;
        for ratio in [1e-1, 1e-2, 1e-3] {
            let s = DecayScenario::new(ResonancePole::new(e_r, ratio * e_r)?, vec![Coupling::Constant(1.0)])?.normalize()?;
            let gamma = ratio * e_r;
            let err = (born_rate(&s)? - gamma).abs() / gamma;
            if !(err < prev) {
                return Ok(f64::INFINITY);
            }
            prev = err;
            // bound 2 (Gamma / E_R), reported as a fraction of the bound
            worst = worst.max(err / (2.0 * ratio));
        }
        Ok::<_, Error>(worst)
    })();
    born.record(0, outcome);
    vec![prob.finish(), rate.finish(), fd.finish(), born.finish()]
}

fn breakdown(opts: VerifyOptions) -> Vec<CheckOutcome> {
    let mut rng = rng_for(opts.seed, 8);
    let n = opts.cases.clamp(1, 3);
    let cases: Vec<(ResonancePole, EnergyWaveFunction)> = (0..n)
        .map(|_| (random::pole(&mut rng), random::lower_fast(&mut rng)))
        .collect();
    let results: Vec<Result<(bool, f64), Error>> = cases
        .par_iter()
        .map(|(pole, test)| {
            let g = GamowFunctional::decaying(*pole);
            let forbidden = semigroup_divergence_scan(&g, test, -2.0, &DEFAULT_CUTOFFS)?;
            let allowed = semigroup_divergence_scan(&g, test, 2.0, &DEFAULT_CUTOFFS)?;
            let grows = forbidden.windows(2).all(|w| w[1] > w[0]);
            let k = allowed.len();
            Ok((grows, allowed[k - 1] / allowed[k - 2]))
        })
        .collect();
    let mut grows = Tally::new("semigroup-divergence-forbidden-t", 0.5);
    let mut conv = Tally::new("semigroup-convergence-allowed-t", 1.01);
    for (case, r) in results.into_iter().enumerate() {
        match r {
            Ok((g, ratio)) => {
                grows.flag(case, Ok(g));
                conv.record(case, Ok(ratio));
            }
            Err(e) => {
                grows.flag(case, Err(e.clone()));
                conv.record(case, Err(e));
            }
        }
    }
    vec![grows.finish(), conv.finish()]
}

/// Run every suite; outcomes come back in a fixed order regardless of
/// scheduling.
pub fn run_suites(opts: VerifyOptions) -> Vec<CheckOutcome> {
    type Suite = fn(VerifyOptions) -> Vec<CheckOutcome>;
    let suites: [Suite; 8] = [
        titchmarsh,
        gamow,
        semigroup,
        arrow_of_time,
        expansion,
        completeness,
        golden_rule,
        breakdown,
    ];
    suites.par_iter().map(|s| s(opts)).collect::<Vec<_>>().into_iter().flatten().collect()
}
