//! Acceptance criteria, one line each. Oracles are closed forms written here,
//! independent of the library's quadrature.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use gamow_lab::config::load_config;
use gamow_lab::verify::{run_suites, VerifyOptions};
use gamow_lab::{run, RunOptions};
use gamow_lab_core::expansion::{background_term, decompose, decompose_default, default_path};
use gamow_lab_core::gamow::{
    breit_wigner_pole_term, eigenvalue_defect, gamow_pairing, semigroup_divergence_scan, semigroup_factor,
    DEFAULT_CUTOFFS,
};
use gamow_lab_core::golden_rule::{born_rate, decay_rate, transition_probability};
use gamow_lab_core::hardy::{
    fourier_transform_signal, fourier_value, paley_wiener_classify, titchmarsh_conjugate_defect, titchmarsh_value,
};
use gamow_lab_core::{
    Complex64, ContourPath, Coupling, DecayScenario, EnergyWaveFunction, Error, ExpansionMode, GamowFunctional,
    HardyClass, PoleTerm, ResonancePole, SMatrixModel, Sheet, TimeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm().max(1e-300)
}

fn scenario_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/reference.json")
}

/// `sum c / (z - p)^m`, evaluated directly.
fn rational(terms: &[(Complex64, Complex64, u32)], z: Complex64) -> Complex64 {
    terms.iter().map(|&(c, p, m)| c / (z - p).powu(m)).sum()
}

struct Family {
    terms: Vec<(Complex64, Complex64, u32)>,
    wf: EnergyWaveFunction,
}

fn family(terms: Vec<(Complex64, Complex64, u32)>, class: HardyClass) -> Family {
    let wf = EnergyWaveFunction::new(terms.iter().map(|&(c, p, m)| PoleTerm::new(c, p, m)).collect(), class).unwrap();
    Family { terms, wf }
}

fn random_family(rng: &mut ChaCha8Rng, class: HardyClass, min_mult: u32) -> Family {
    let side = if class == HardyClass::Lower { 1.0 } else { -1.0 };
    let n = rng.gen_range(1..=3);
    let terms = (0..n)
        .map(|_| {
            let coef = c(rng.gen_range(0.2..1.5), rng.gen_range(-1.0..1.0));
            let pole = c(rng.gen_range(-4.0..4.0), side * rng.gen_range(0.3..2.0));
            (coef, pole, rng.gen_range(min_mult..=2))
        })
        .collect();
    family(terms, class)
}

fn random_pole(rng: &mut ChaCha8Rng) -> ResonancePole {
    ResonancePole::new(rng.gen_range(0.5..5.0), rng.gen_range(0.05..2.0)).unwrap()
}

/// Residue at `z_i` of `beta prod (z - z_j*) / (z - z_j)`.
fn flat_residue(poles: &[Complex64], beta: Complex64, i: usize) -> Complex64 {
    let zi = poles[i];
    poles
        .iter()
        .enumerate()
        .fold(beta * (zi - zi.conj()), |acc, (j, &p)| if j == i { acc } else { acc * (zi - p.conj()) / (zi - p) })
}

type Criterion = fn() -> Result<Line, Error>;

struct Line {
    passed: bool,
    detail: String,
}

fn line(passed: bool, detail: String) -> Line {
    Line { passed, detail }
}

fn titchmarsh() -> Result<Line, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut value, mut conj) = (0.0f64, 0.0f64);
    for k in 0..100 {
        let class = if k % 2 == 0 { HardyClass::Lower } else { HardyClass::Upper };
        let f = random_family(&mut rng, class, 1);
        let side = if class == HardyClass::Upper { 1.0 } else { -1.0 };
        let z = c(rng.gen_range(-4.0..4.0), side * rng.gen_range(0.1..3.0));
        value = value.max(rel(titchmarsh_value(&f.wf, z)?, rational(&f.terms, z)));
        conj = conj.max(titchmarsh_conjugate_defect(&f.wf, z.conj())?);
    }
    Ok(line(value < 1e-8 && conj < 1e-8, format!("value {value:.2e}, conjugate {conj:.2e} (tol 1e-8, 100 functions)")))
}

fn gamow_eigenvalue() -> Result<Line, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut eig, mut pairing) = (0.0f64, 0.0f64);
    for k in 0..50 {
        let pole = random_pole(&mut rng);
        let (g, class, z) = if k % 2 == 0 {
            (GamowFunctional::decaying(pole), HardyClass::Lower, pole.position())
        } else {
            (GamowFunctional::growing(pole), HardyClass::Upper, pole.conjugate_position())
        };
        let f = random_family(&mut rng, class, 2);
        eig = eig.max(eigenvalue_defect(&g, &f.wf)?);
        pairing = pairing.max(rel(gamow_pairing(&g, &f.wf)?, rational(&f.terms, z)));
    }
    Ok(line(
        eig < 1e-8 && pairing < 1e-8,
        format!("eigenvalue {eig:.2e}, pairing vs continuation {pairing:.2e} (tol 1e-8, 50 pairs)"),
    ))
}

fn breit_wigner() -> Result<Line, Error> {
    let mut cases = Vec::new();
    let scenario = load_config(&scenario_path()).expect("reference scenario loads");
    let spec = &scenario.config.wavefunctions;
    let terms = |name: &str| -> Vec<(Complex64, Complex64, u32)> {
        spec[name].terms.iter().map(|t| (t.coefficient.0, t.pole.0, t.multiplicity)).collect()
    };
    cases.push((
        family(terms("psi"), HardyClass::Lower),
        family(terms("phi"), HardyClass::Lower),
        scenario.model.poles()[0],
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..50 {
        let psi = random_family(&mut rng, HardyClass::Lower, 1);
        let phi = random_family(&mut rng, HardyClass::Lower, 1);
        cases.push((psi, phi, random_pole(&mut rng)));
    }
    let (mut gap, mut oracle) = (0.0f64, 0.0f64);
    for (psi, phi, pole) in &cases {
        let (lhs, rhs) = breit_wigner_pole_term(&psi.wf, &phi.wf, pole)?;
        let z = pole.position();
        let closed = 2.0 * PI * pole.width() * rational(&psi.terms, z) * rational(&phi.terms, z);
        gap = gap.max(rel(lhs, rhs));
        oracle = oracle.max(rel(rhs, closed));
    }
    Ok(line(
        gap < 1e-8 && oracle < 1e-8,
        format!("lhs/rhs {gap:.2e}, rhs vs residue form {oracle:.2e} (tol 1e-8, reference + 50)"),
    ))
}

fn decay_law() -> Result<Line, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut law, mut compose, mut misses) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..50 {
        let pole = random_pole(&mut rng);
        let gamma = pole.width();
        for g in [GamowFunctional::decaying(pole), GamowFunctional::growing(pole)] {
            let sign = if g.allows(1.0) { 1.0 } else { -1.0 };
            for t in [0.0, 1.0 / gamma, 5.0 / gamma] {
                let want = (-gamma * t).exp();
                law = law.max((semigroup_factor(&g, sign * t)?.norm_sqr() - want).abs() / want);
            }
            let (t1, t2) = (sign * rng.gen_range(0.0..3.0 / gamma), sign * rng.gen_range(0.0..3.0 / gamma));
            let lhs = semigroup_factor(&g, t1)? * semigroup_factor(&g, t2)?;
            let rhs = semigroup_factor(&g, t1 + t2)?;
            let phase = 1.0 + pole.position().norm() * (t1.abs() + t2.abs());
            compose = compose.max(rel(lhs, rhs) / phase);
            misses += (1..=20)
                .map(|k| -sign * k as f64 * 0.25 / gamma)
                .filter(|&t| !matches!(semigroup_factor(&g, t), Err(Error::TimeDirectionViolation { .. })))
                .count();
        }
    }
    Ok(line(
        law < 1e-12 && compose < 1e-14 && misses == 0,
        format!("|f|^2 vs e^-Gt {law:.2e} (tol 1e-12), composition {compose:.2e} per unit phase, {misses} unflagged wrong-sign times"),
    ))
}

/// Reflect `E -> -E`: `c / (-E - p)^m = (-1)^m c / (E + p)^m`.
fn reflect(f: &Family) -> Family {
    let terms: Vec<_> = f
        .terms
        .iter()
        .map(|&(c, p, m)| (if m % 2 == 0 { c } else { -c }, -p, m))
        .collect();
    family(terms, f.wf.class().reflected())
}

/// `int c (E - p)^-m e^{-iEt} dE` for `Im p > 0`: nonzero only for `t < 0`.
fn fourier_oracle(terms: &[(Complex64, Complex64, u32)], t: f64) -> Complex64 {
    if t >= 0.0 {
        return c(0.0, 0.0);
    }
    terms
        .iter()
        .map(|&(c, p, m)| {
            let fact: f64 = (1..m).map(f64::from).product();
            2.0 * PI * I * c * (-I * t).powu(m - 1) / fact * (-I * p * t).exp()
        })
        .sum()
}

fn arrow_of_time() -> Result<Line, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let (mut mass, mut flips, mut transform) = (0.0f64, 0usize, 0.0f64);
    let families: Vec<Family> = (0..3).map(|_| random_family(&mut rng, HardyClass::Lower, 1)).collect();
    for f in &families {
        for t in [-3.0, -0.7, 0.4, 2.5] {
            let got = fourier_value(&f.wf, t)?.value;
            let scale = rational(&f.terms, c(0.0, 0.0)).norm().max(1.0);
            transform = transform.max((got - fourier_oracle(&f.terms, t)).norm() / scale);
        }
        for (wf, want) in [(&f.wf, HardyClass::Lower), (&reflect(f).wf, HardyClass::Upper)] {
            let grid = TimeGrid::new(TimeGrid::for_wavefunction(wf).half_width, 1 << 11)?;
            let report = paley_wiener_classify(&fourier_transform_signal(wf, grid)?)?;
            mass = mass.max(report.forbidden_mass_fraction);
            if report.inferred != want {
                flips += 1;
            }
        }
    }
    Ok(line(
        mass < 1e-6 && flips == 0 && transform < 1e-8,
        format!("forbidden mass {mass:.2e} (tol 1e-6), {flips} misclassified under reflection, F(t) vs closed form {transform:.2e}"),
    ))
}

fn flat_model(rng: &mut ChaCha8Rng, n: usize) -> (SMatrixModel, Vec<Complex64>, Complex64) {
    let poles: Vec<ResonancePole> = (0..n).map(|_| random_pole(rng)).collect();
    let beta = Complex64::from_polar(1.0, rng.gen_range(-PI..PI));
    let positions = poles.iter().map(|p| p.position()).collect();
    (SMatrixModel::flat(poles, beta).unwrap(), positions, beta)
}

fn expansion() -> Result<Line, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut residual, mut direct, mut path, mut none) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut stray_poles = 0;
    for _ in 0..20 {
        let psi = random_family(&mut rng, HardyClass::Lower, 1);
        let phi = random_family(&mut rng, HardyClass::Lower, 1);
        for n in [1, 2] {
            let (model, poles, beta) = flat_model(&mut rng, n);
            for mode in [ExpansionMode::FullLine, ExpansionMode::Physical] {
                residual = residual.max(decompose_default(&psi.wf, &phi.wf, &model, mode)?.residual);
            }
            // closing below picks up only the S-matrix poles
            let closed: Complex64 = (0..n)
                .map(|i| {
                    -2.0 * PI * I * flat_residue(&poles, beta, i) * rational(&psi.terms, poles[i]) * rational(&phi.terms, poles[i])
                })
                .sum();
            let r = decompose_default(&psi.wf, &phi.wf, &model, ExpansionMode::FullLine)?;
            direct = direct.max(rel(r.direct, closed));

            let axis = default_path(&model, ExpansionMode::Physical)?;
            let a = background_term(&psi.wf, &phi.wf, &model, &axis)?.value;
            let corner = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-2.9..-2.0));
            let bent = ContourPath::builder(c(0.0, 0.0), Sheet::Second)
                .line_to(corner)
                .ray(c(-1.0, -0.3))
                .build()?;
            let b = background_term(&psi.wf, &phi.wf, &model, &bent)?.value;
            decompose(&psi.wf, &phi.wf, &model, &bent, ExpansionMode::Physical)?;
            path = path.max(rel(b, a));
        }
        for mode in [ExpansionMode::FullLine, ExpansionMode::Physical] {
            let r = decompose_default(&psi.wf, &phi.wf, &SMatrixModel::identity(), mode)?;
            stray_poles += r.poles.len();
            none = none.max(r.residual);
        }
    }
    Ok(line(
        residual < 1e-6 && direct < 1e-8 && path < 1e-8 && none < 1e-10 && stray_poles == 0,
        format!(
            "residual {residual:.2e} (tol 1e-6), direct vs residue sum {direct:.2e}, background path gap {path:.2e} (tol 1e-8), no-pole residual {none:.2e} (tol 1e-10)"
        ),
    ))
}

fn golden_rule() -> Result<Line, Error> {
    let (e_r, gamma, v2) = (5.0, 0.05, 0.49);
    let pole = ResonancePole::new(e_r, gamma).unwrap();
    let s = DecayScenario::new(pole, vec![Coupling::Constant(v2)])?;
    // I = |v|^2 (2/Gamma) (atan(2 E_R / Gamma) + pi/2)
    let closed_i = v2 * (2.0 / gamma) * ((2.0 * e_r / gamma).atan() + PI / 2.0);
    let i_gap = (s.lorentz_integral()?.value.re - closed_i).abs() / closed_i;
    let n = s.normalize()?;
    let mut p_defect = 0.0f64;
    for k in 0..500 {
        let t = 50.0 * k as f64 / 499.0;
        let p = transition_probability(&n, t)?.value;
        p_defect = p_defect.max((p - (-(-gamma * t).exp_m1())).abs());
    }
    let rate = (decay_rate(&n, 0.0)? - gamma).abs() / gamma;

    let mut errors = Vec::new();
    let mut oracle = 0.0f64;
    for ratio in [1e-1, 1e-2, 1e-3] {
        let g = ratio * e_r;
        let s = DecayScenario::new(ResonancePole::new(e_r, g).unwrap(), vec![Coupling::Constant(1.0)])?.normalize()?;
        let err = (born_rate(&s)? - g).abs() / g;
        let closed = (PI / ((2.0 * e_r / g).atan() + PI / 2.0) - 1.0).abs();
        oracle = oracle.max((err - closed).abs() / closed);
        errors.push((ratio, err));
    }
    let bounded = errors.iter().all(|&(ratio, err)| err < 2.0 * ratio);
    let decreasing = errors.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(line(
        i_gap < 1e-10 && p_defect < 1e-10 && rate < 1e-8 && bounded && decreasing && oracle < 1e-6,
        format!(
            "max |P - (1-e^-Gt)| {p_defect:.2e} (tol 1e-10, 500 points), |Pdot(0)-G|/G {rate:.2e} (tol 1e-8), Born errors {} ({}), I vs arctan form {i_gap:.2e}",
            errors.iter().map(|(r, e)| format!("{e:.2e}@{r:.0e}")).collect::<Vec<_>>().join(" "),
            if bounded && decreasing { "below 2G/E_R, decreasing" } else { "NOT bounded/decreasing" },
        ),
    ))
}

fn breakdown() -> Result<Line, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (mut grows, mut ratio, mut limit) = (true, 0.0f64, 0.0f64);
    for _ in 0..3 {
        let pole = random_pole(&mut rng);
        let test = random_family(&mut rng, HardyClass::Lower, 2);
        let g = GamowFunctional::decaying(pole);
        let forbidden = semigroup_divergence_scan(&g, &test.wf, -2.0, &DEFAULT_CUTOFFS)?;
        grows &= forbidden.windows(2).all(|w| w[1] > w[0]);
        let t = 2.0;
        let allowed = semigroup_divergence_scan(&g, &test.wf, t, &DEFAULT_CUTOFFS)?;
        let k = allowed.len();
        ratio = ratio.max(allowed[k - 1] / allowed[k - 2]);
        // closing below encircles only z_R
        let z = pole.position();
        let want = (2.0 * PI * rational(&test.terms, z) * (-I * z * t).exp()).norm();
        limit = limit.max((allowed[k - 1] - want).abs() / want);
    }
    Ok(line(
        grows && ratio < 1.01 && limit < 1e-6,
        format!(
            "forbidden t {}, allowed final ratio {ratio:.6} (tol 1.01), limit vs residue {limit:.2e}",
            if grows { "strictly increasing" } else { "NOT increasing" }
        ),
    ))
}

fn determinism() -> Result<Line, Error> {
    let scenario = load_config(&scenario_path()).expect("reference scenario loads");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut reports = Vec::new();
    for d in &dirs {
        let options = RunOptions {
            output_dir: Some(d.path().to_path_buf()),
            ..RunOptions::default()
        };
        let (report, dir) = run(&scenario, &options).expect("run writes artifacts");
        reports.push((report.passed, std::fs::read(dir.join("report.json")).unwrap()));
    }
    let identical = reports[0].1 == reports[1].1;
    let all_pass = reports[0].0;

    let mut base: serde_json::Value = serde_json::from_slice(&std::fs::read(scenario_path()).unwrap()).unwrap();
    base["model"]["poles"][0]["Gamma"] = serde_json::json!(-0.5);
    let gamma = gamow_lab::config::ScenarioConfig::from_json(&base.to_string())
        .and_then(|c| c.validate())
        .err()
        .map(|e| e.to_string());
    let mut base: serde_json::Value = serde_json::from_slice(&std::fs::read(scenario_path()).unwrap()).unwrap();
    base["tasks"][4]["psi"] = serde_json::json!("psi2");
    let dangling = gamow_lab::config::ScenarioConfig::from_json(&base.to_string())
        .and_then(|c| c.validate())
        .err()
        .map(|e| e.to_string());
    let named = gamma.as_deref().is_some_and(|m| m.contains("Gamma must be > 0"))
        && dangling.as_deref().is_some_and(|m| m.contains("psi2"));

    let start = Instant::now();
    let checks = run_suites(VerifyOptions::default());
    let elapsed = start.elapsed().as_secs_f64();
    let suites_pass = checks.iter().all(|c| c.passed);
    Ok(line(
        identical && all_pass && named && suites_pass && elapsed < 60.0,
        format!(
            "reports {}, reference {}, invalid configs {}, verify-all {} in {elapsed:.1}s (limit 60s)",
            if identical { "byte-identical" } else { "DIFFER" },
            if all_pass { "passes" } else { "FAILS" },
            if named { "rejected with named invariants" } else { "NOT rejected as expected" },
            if suites_pass { "passes" } else { "FAILS" },
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("titchmarsh reproduction", titchmarsh),
        ("gamow pairing and eigenvalue", gamow_eigenvalue),
        ("breit-wigner pole term", breit_wigner),
        ("exponential decay law", decay_law),
        ("arrow-of-time fourier conditions", arrow_of_time),
        ("expansion identity", expansion),
        ("exact golden rule", golden_rule),
        ("semigroup domain breakdown", breakdown),
        ("determinism and plumbing", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| line(false, format!("error: {e}")));
        if !outcome.passed {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {} [{:.1}s]",
            if outcome.passed { "PASS" } else { "FAIL" },
            k + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
