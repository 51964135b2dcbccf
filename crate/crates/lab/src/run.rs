//! Task execution and the run report.

use std::path::{Path, PathBuf};

use gamow_lab_core::expansion::decompose_default;
use gamow_lab_core::gamow::semigroup_factor;
use gamow_lab_core::golden_rule::{decay_rate, probability_from};
use gamow_lab_core::hardy::{fourier_transform_signal, paley_wiener_classify};
use gamow_lab_core::{
    DecayScenario, EnergyWaveFunction, ExpansionMode, ExpansionReport, GamowFunctional, HardyClass,
    HardyClassReport, ModelTier, TimeGrid, TimeSignal,
};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{JsonComplex, ModeSpec, Scenario, ScenarioConfig, TaskSpec, TimeRange, VariantSpec};
use crate::output::{csv_bytes, json_bytes, write_atomic};
use crate::verify::{run_suites, CheckOutcome, VerifyOptions};

pub const TOOL_VERSION: &str = concat!("gamow-lab ", env!("CARGO_PKG_VERSION"));

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "GAMOW_LAB_THREADS";

pub const HARDY_TOL: f64 = 1e-6;
pub const EVOLVE_TOL: f64 = 1e-12;
pub const EXPAND_TOL: f64 = 1e-6;
pub const GOLDEN_RULE_TOL: f64 = 1e-10;
pub const RATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskOutcome {
    pub index: usize,
    pub kind: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckOutcome>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool_version: String,
    pub config_digest: String,
    pub seed: u64,
    pub passed: bool,
    pub tasks: Vec<TaskOutcome>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        json_bytes(self)
    }
}

/// SHA-256 of the canonical JSON form of the config, without its output
/// directory.
pub fn config_digest(config: &ScenarioConfig) -> String {
    let mut c = config.clone();
    c.output_dir = PathBuf::new();
    let bytes = serde_json::to_vec(&c).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Run options that can override the config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Default tolerance for tasks that do not set their own.
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// A computed artifact, written only after all tasks finished.
struct Artifact {
    name: String,
    bytes: Vec<u8>,
}

struct TaskResult {
    outcome: TaskOutcome,
    artifacts: Vec<Artifact>,
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Run with the worker pool capped by `GAMOW_LAB_THREADS`.
pub fn in_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Execute every task, write the artifacts and `report.json` into
/// `<output_dir>/<digest>/`, and return the report with its directory.
pub fn run(scenario: &Scenario, options: &RunOptions) -> std::io::Result<(RunReport, PathBuf)> {
    let mut config = scenario.config.clone();
    if let Some(seed) = options.seed {
        config.seed = seed;
    }
    let digest = config_digest(&config);
    let root = options.output_dir.clone().unwrap_or_else(|| config.output_dir.clone());
    let dir = run_dir(&root, &digest);

    let results: Vec<TaskResult> = in_pool(|| {
        config
            .tasks
            .par_iter()
            .enumerate()
            .map(|(index, task)| execute(scenario, config.seed, index, task, options.tolerance))
            .collect()
    });

    let mut tasks = Vec::with_capacity(results.len());
    for r in results {
        for a in &r.artifacts {
            write_atomic(&dir.join(&a.name), &a.bytes)?;
        }
        tasks.push(r.outcome);
    }
    let report = RunReport {
        tool_version: TOOL_VERSION.to_string(),
        config_digest: digest,
        seed: config.seed,
        passed: tasks.iter().all(|t| t.status == Status::Pass),
        tasks,
    };
    write_atomic(&dir.join("report.json"), &report.to_json())?;
    Ok((report, dir))
}

fn artifact_name(index: usize, kind: &str, ext: &str) -> String {
    format!("task-{index:02}-{kind}.{ext}")
}

fn execute(scenario: &Scenario, seed: u64, index: usize, task: &TaskSpec, global_tol: Option<f64>) -> TaskResult {
    let kind = task.kind();
    let mut outcome = TaskOutcome {
        index,
        kind,
        status: Status::Fail,
        defect: None,
        tolerance: None,
        message: None,
        checks: Vec::new(),
        artifacts: Vec::new(),
    };
    let mut artifacts = Vec::new();
    let pick = |own: Option<f64>, default: f64| own.or(global_tol).unwrap_or(default);

    let result: Result<(), String> = match task {
        TaskSpec::HardyCheck {
            wavefunction,
            points_per_side,
            tolerance,
        } => {
            let tol = pick(*tolerance, HARDY_TOL);
            outcome.tolerance = Some(tol);
            let wf = &scenario.wavefunctions[wavefunction];
            hardy_check(wf, *points_per_side, tol).map(|(signal, report, pass)| {
                outcome.defect = Some(report.forbidden_mass_fraction);
                if pass {
                    outcome.status = Status::Pass;
                } else {
                    outcome.message = Some(format!(
                        "declared {} but the transform looks {}",
                        wf.class(),
                        report.inferred
                    ));
                }
                artifacts.push(Artifact {
                    name: artifact_name(index, kind, "csv"),
                    bytes: signal_csv(&signal),
                });
                artifacts.push(Artifact {
                    name: artifact_name(index, kind, "json"),
                    bytes: json_bytes(&HardySummary::new(wf, &report)),
                });
            })
        }
        TaskSpec::GamowEvolve {
            pole,
            variant,
            t_grid,
            tolerance,
        } => {
            let tol = pick(*tolerance, EVOLVE_TOL);
            outcome.tolerance = Some(tol);
            let pole = scenario.model.poles()[*pole];
            let g = match variant {
                VariantSpec::Decaying => GamowFunctional::decaying(pole),
                VariantSpec::Growing => GamowFunctional::growing(pole),
            };
            let (rows, worst, error) = evolve(&g, t_grid);
            outcome.defect = Some(worst);
            artifacts.push(Artifact {
                name: artifact_name(index, kind, "csv"),
                bytes: evolve_csv(&rows),
            });
            match error {
                Some(e) => Err(e),
                None if worst < tol => {
                    outcome.status = Status::Pass;
                    Ok(())
                }
                None => Err(format!("|factor|^2 deviates from the exponential law by {worst:e}")),
            }
        }
        TaskSpec::Expand {
            psi,
            phi,
            mode,
            tolerance,
        } => {
            let tol = pick(*tolerance, EXPAND_TOL);
            outcome.tolerance = Some(tol);
            let mode = match mode {
                ModeSpec::FullLine => ExpansionMode::FullLine,
                ModeSpec::Physical => ExpansionMode::Physical,
            };
            decompose_default(&scenario.wavefunctions[psi], &scenario.wavefunctions[phi], &scenario.model, mode)
                .map_err(|e| e.to_string())
                .and_then(|r| {
                    outcome.defect = Some(r.residual);
                    artifacts.push(Artifact {
                        name: artifact_name(index, kind, "json"),
                        bytes: json_bytes(&ExpansionJson::from(&r)),
                    });
                    if r.residual < tol {
                        outcome.status = Status::Pass;
                        Ok(())
                    } else {
                        Err(format!("residual {:e} above tolerance", r.residual))
                    }
                })
        }
        TaskSpec::GoldenRule { t_grid, tolerance } => {
            let tol = pick(*tolerance, GOLDEN_RULE_TOL);
            outcome.tolerance = Some(tol);
            let decay = scenario.decay.as_ref().expect("validated");
            golden_rule_curve(decay, t_grid).map(|curve| {
                outcome.defect = Some(curve.probability_defect);
                artifacts.push(Artifact {
                    name: artifact_name(index, kind, "csv"),
                    bytes: golden_rule_csv(&curve.rows),
                });
                let p_ok = curve.probability_defect < tol;
                let r_ok = curve.rate_defect < RATE_TOL;
                outcome.checks = vec![
                    CheckOutcome {
                        name: "probability".into(),
                        cases: curve.rows.len(),
                        defect: curve.probability_defect,
                        tolerance: tol,
                        passed: p_ok,
                        detail: None,
                    },
                    CheckOutcome {
                        name: "rate".into(),
                        cases: curve.rows.len(),
                        defect: curve.rate_defect,
                        tolerance: RATE_TOL,
                        passed: r_ok,
                        detail: None,
                    },
                ];
                if p_ok && r_ok {
                    outcome.status = Status::Pass;
                } else {
                    outcome.message = Some("golden-rule curve deviates from 1 - exp(-Gamma t)".into());
                }
            })
        }
        TaskSpec::VerifyAll { cases } => {
            let checks = run_suites(VerifyOptions {
                seed,
                cases: cases.unwrap_or(VerifyOptions::default().cases),
            });
            let failed = checks.iter().filter(|c| !c.passed).count();
            outcome.defect = Some(failed as f64);
            outcome.checks = checks;
            if failed == 0 {
                outcome.status = Status::Pass;
            } else {
                outcome.message = Some(format!("{failed} checks failed"));
            }
            Ok(())
        }
    };
    if let Err(m) = result {
        outcome.status = Status::Fail;
        outcome.message = Some(m);
    }
    outcome.artifacts = artifacts.iter().map(|a| a.name.clone()).collect();
    TaskResult { outcome, artifacts }
}

/// Fourier transform on the task grid, its classification, and whether it
/// agrees with the declared class.
pub fn hardy_check(
    wf: &EnergyWaveFunction,
    points_per_side: Option<usize>,
    tol: f64,
) -> Result<(TimeSignal, HardyClassReport, bool), String> {
    let mut grid = TimeGrid::for_wavefunction(wf);
    if let Some(n) = points_per_side {
        grid = TimeGrid::new(grid.half_width, n).map_err(|e| e.to_string())?;
    }
    let signal = fourier_transform_signal(wf, grid).map_err(|e| e.to_string())?;
    let report = paley_wiener_classify(&signal).map_err(|e| e.to_string())?;
    let pass = match wf.class() {
        HardyClass::Neither => report.inferred == HardyClass::Neither,
        declared => report.inferred == declared && report.forbidden_mass_fraction < tol,
    };
    Ok((signal, report, pass))
}

pub fn signal_csv(signal: &TimeSignal) -> Vec<u8> {
    let rows: Vec<(f64, f64, f64)> = signal.times().zip(&signal.values).map(|(t, v)| (t, v.re, v.im)).collect();
    csv_bytes(&["t", "ReF", "ImF"], &rows).expect("in-memory csv")
}

#[derive(Debug, Clone, Serialize)]
pub struct HardySummary {
    pub declared: String,
    pub inferred: String,
    pub forbidden_mass_fraction: f64,
    pub positive_fraction: f64,
    pub negative_fraction: f64,
    pub threshold: f64,
    pub half_width: f64,
    pub points_per_side: usize,
    pub method: String,
}

impl HardySummary {
    pub fn new(wf: &EnergyWaveFunction, report: &HardyClassReport) -> Self {
        HardySummary {
            declared: wf.class().to_string(),
            inferred: report.inferred.to_string(),
            forbidden_mass_fraction: report.forbidden_mass_fraction,
            positive_fraction: report.positive_fraction,
            negative_fraction: report.negative_fraction,
            threshold: report.threshold,
            half_width: report.grid.half_width,
            points_per_side: report.grid.per_side,
            method: match wf.damping() {
                Some(_) => "truncated-quadrature".into(),
                None => "rotated-tail-quadrature".into(),
            },
        }
    }
}

/// `(t, Re, Im, |f|^2)`.
pub type EvolveRow = (f64, f64, f64, f64);

/// Rows for the allowed times, the worst relative
/// deviation of `|f|^2` from `e^{-Gamma |t|}`, and the first domain error.
pub fn evolve(g: &GamowFunctional, grid: &TimeRange) -> (Vec<EvolveRow>, f64, Option<String>) {
    let gamma = g.pole.width();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut error = None;
    for t in grid.points() {
        match semigroup_factor(g, t) {
            Ok(f) => {
                let want = (-gamma * t.abs()).exp();
                worst = worst.max((f.norm_sqr() - want).abs() / want);
                rows.push((t, f.re, f.im, f.norm_sqr()));
            }
            Err(e) => {
                error.get_or_insert_with(|| format!("TimeDirectionViolation: {e}"));
            }
        }
    }
    (rows, worst, error)
}

pub fn evolve_csv(rows: &[EvolveRow]) -> Vec<u8> {
    csv_bytes(&["t", "Re_factor", "Im_factor", "abs_factor_sq"], rows).expect("in-memory csv")
}

#[derive(Debug, Clone, Serialize)]
pub struct PoleJson {
    pub index: usize,
    #[serde(rename = "E_R")]
    pub energy: f64,
    #[serde(rename = "Gamma")]
    pub width: f64,
    pub winding: i32,
    pub contribution: JsonComplex,
}

/// Serialized expansion report; the field names are part of the CLI contract.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionJson {
    pub direct: JsonComplex,
    pub poles: Vec<PoleJson>,
    pub background: JsonComplex,
    pub residual: f64,
    pub tier: &'static str,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative_axis_tail: Option<JsonComplex>,
}

impl From<&ExpansionReport> for ExpansionJson {
    fn from(r: &ExpansionReport) -> Self {
        ExpansionJson {
            direct: r.direct.into(),
            poles: r
                .poles
                .iter()
                .map(|p| PoleJson {
                    index: p.index,
                    energy: p.pole.energy(),
                    width: p.pole.width(),
                    winding: p.winding,
                    contribution: p.value.into(),
                })
                .collect(),
            background: r.background.into(),
            residual: r.residual,
            tier: match r.tier {
                ModelTier::Oracle => "oracle",
                ModelTier::Demonstration => "demonstration",
            },
            mode: match r.mode {
                ExpansionMode::FullLine => "full-line",
                ExpansionMode::Physical => "physical",
            },
            negative_axis_tail: r.negative_axis_tail.map(JsonComplex::from),
        }
    }
}

pub struct GoldenRuleCurve {
    /// `(t, P, Pdot, P_closed_form, Pdot_closed_form)`.
    pub rows: Vec<(f64, f64, f64, f64, f64)>,
    pub probability_defect: f64,
    pub rate_defect: f64,
    pub normalized: DecayScenario,
}

/// Normalize the scenario and tabulate `P` and `dP/dt` against their closed
/// forms.
pub fn golden_rule_curve(decay: &DecayScenario, grid: &TimeRange) -> Result<GoldenRuleCurve, String> {
    let s = decay.normalize().map_err(|e| e.to_string())?;
    let gamma = s.pole.width();
    let audited = s.lorentz_integral().map_err(|e| e.to_string())?.value.re;
    let mut rows = Vec::new();
    let (mut pd, mut rd) = (0.0f64, 0.0f64);
    for t in grid.points() {
        if t < 0.0 {
            return Err(format!("TimeDirectionViolation: golden rule holds for t >= 0 only (t = {t})"));
        }
        let p = probability_from(gamma, t, audited);
        let pdot = decay_rate(&s, t).map_err(|e| e.to_string())?;
        let p_closed = -(-gamma * t).exp_m1();
        let pdot_closed = gamma * (-gamma * t).exp();
        pd = pd.max((p - p_closed).abs());
        rd = rd.max((pdot - pdot_closed).abs() / pdot_closed);
        rows.push((t, p, pdot, p_closed, pdot_closed));
    }
    Ok(GoldenRuleCurve {
        rows,
        probability_defect: pd,
        rate_defect: rd,
        normalized: s,
    })
}

pub fn golden_rule_csv(rows: &[(f64, f64, f64, f64, f64)]) -> Vec<u8> {
    csv_bytes(&["t", "P", "Pdot", "P_closed_form", "Pdot_closed_form"], rows).expect("in-memory csv")
}

/// Directory of a run: the first 16 hex digits of the config digest.
pub fn run_dir(root: &Path, digest: &str) -> PathBuf {
    root.join(&digest[..16])
}
