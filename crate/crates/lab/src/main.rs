use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gamow_lab::config::{load_config, ConfigError, DecaySpec, TimeRange, WaveFunctionSpec};
use gamow_lab::output::{write_atomic, write_json};
use gamow_lab::run::{
    evolve, evolve_csv, golden_rule_curve, golden_rule_csv, hardy_check, in_pool, run, signal_csv, ExpansionJson,
    HardySummary, RunOptions, EXPAND_TOL, EVOLVE_TOL, GOLDEN_RULE_TOL, HARDY_TOL, RATE_TOL,
};
use gamow_lab::verify::{run_suites, VerifyOptions};
use gamow_lab_core::expansion::decompose_default;
use gamow_lab_core::golden_rule::born_rate;
use gamow_lab_core::{ExpansionMode, GamowFunctional, ResonancePole};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "gamow-lab", version, about = "Resonance poles, Gamow vectors and the exact golden rule")]
struct Cli {
    /// Default pass tolerance for checks that do not set their own
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for the randomized suites
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory, depending on the command
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of a scenario file
    Run { config: PathBuf },
    /// Paley-Wiener classification of a wave function
    Hardy {
        #[command(subcommand)]
        command: HardyCommand,
    },
    /// Semigroup evolution of a Gamow vector
    Gamow {
        #[command(subcommand)]
        command: GamowCommand,
    },
    /// Pole-plus-background expansion of an S-matrix element
    Expand(ExpandArgs),
    /// Exact golden-rule probability and rate
    GoldenRule(GoldenRuleArgs),
    /// Run all randomized verification suites
    VerifyAll {
        #[arg(long, default_value_t = 50)]
        cases: usize,
    },
}

#[derive(Subcommand)]
enum HardyCommand {
    Check {
        /// Inline JSON or a path to a JSON file
        #[arg(long)]
        wavefunction: String,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        points_per_side: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Decaying,
    Growing,
}

#[derive(Subcommand)]
enum GamowCommand {
    Evolve {
        /// `E_R,Gamma`
        #[arg(long, allow_hyphen_values = true)]
        pole: String,
        #[arg(long, allow_hyphen_values = true)]
        t_grid: TimeRange,
        #[arg(long, value_enum, default_value = "decaying")]
        variant: Variant,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    FullLine,
    Physical,
}

#[derive(Args)]
struct ExpandArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "psi")]
    psi: String,
    #[arg(long, default_value = "phi")]
    phi: String,
    #[arg(long, value_enum, default_value = "full-line")]
    mode: Mode,
}

#[derive(Args)]
struct GoldenRuleArgs {
    /// Decay scenario JSON, or a scenario file with a `decay` section
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "0:50:500", allow_hyphen_values = true)]
    t_grid: TimeRange,
    /// Comma-separated widths; writes one CSV per width plus summary.json
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<f64>,
}

enum Failure {
    Config(String),
    Task(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Task(format!("write failed: {e}"))
    }
}

fn need_out(out: &Option<PathBuf>, what: &str) -> Result<PathBuf, Failure> {
    out.clone().ok_or_else(|| Failure::Config(format!("--out <{what}> is required")))
}

fn read_json_arg(arg: &str) -> Result<String, Failure> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| Failure::Config(format!("cannot read {arg}: {e}")))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::from(ConfigError::from(e)))
}

fn hardy(cli: &Cli, wavefunction: &str, report: &Path, points_per_side: Option<usize>) -> Result<(), Failure> {
    let spec: WaveFunctionSpec = parse_json(&read_json_arg(wavefunction)?)?;
    let wf = spec.build()?;
    let tol = cli.tol.unwrap_or(HARDY_TOL);
    let (signal, summary, pass) = hardy_check(&wf, points_per_side, tol).map_err(Failure::Task)?;
    write_atomic(report, &signal_csv(&signal))?;
    write_json(&report.with_extension("json"), &HardySummary::new(&wf, &summary))?;
    println!(
        "declared {} inferred {} forbidden-mass {:e}",
        wf.class(),
        summary.inferred,
        summary.forbidden_mass_fraction
    );
    if pass {
        Ok(())
    } else {
        Err(Failure::Task("transform support contradicts the declared class".into()))
    }
}

fn gamow(cli: &Cli, pole: &str, grid: &TimeRange, variant: Variant) -> Result<(), Failure> {
    let out = need_out(&cli.out, "csv")?;
    let parts: Vec<f64> = pole
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Config(format!("--pole '{pole}' must be E_R,Gamma")))?;
    let [e_r, gamma] = parts[..] else {
        return Err(Failure::Config(format!("--pole '{pole}' must be E_R,Gamma")));
    };
    let pole = ResonancePole::new(e_r, gamma).map_err(|e| Failure::Config(e.to_string()))?;
    let g = match variant {
        Variant::Decaying => GamowFunctional::decaying(pole),
        Variant::Growing => GamowFunctional::growing(pole),
    };
    let (rows, worst, error) = evolve(&g, grid);
    write_atomic(&out, &evolve_csv(&rows))?;
    if let Some(e) = error {
        return Err(Failure::Task(e));
    }
    let tol = cli.tol.unwrap_or(EVOLVE_TOL);
    if worst < tol {
        Ok(())
    } else {
        Err(Failure::Task(format!("|factor|^2 deviates from the exponential law by {worst:e}")))
    }
}

fn expand(cli: &Cli, args: &ExpandArgs) -> Result<(), Failure> {
    let out = need_out(&cli.out, "report.json")?;
    let scenario = load_config(&args.config)?;
    let lookup = |name: &str| {
        scenario
            .wavefunctions
            .get(name)
            .ok_or_else(|| Failure::Config(format!("undeclared wavefunction '{name}'")))
    };
    let (psi, phi) = (lookup(&args.psi)?, lookup(&args.phi)?);
    let mode = match args.mode {
        Mode::FullLine => ExpansionMode::FullLine,
        Mode::Physical => ExpansionMode::Physical,
    };
    let r = decompose_default(psi, phi, &scenario.model, mode).map_err(|e| Failure::Task(e.to_string()))?;
    write_json(&out, &ExpansionJson::from(&r))?;
    println!("residual {:e} with {} pole terms", r.residual, r.poles.len());
    if r.residual < cli.tol.unwrap_or(EXPAND_TOL) {
        Ok(())
    } else {
        Err(Failure::Task(format!("residual {:e} above tolerance", r.residual)))
    }
}

#[derive(Deserialize)]
struct WithDecay {
    decay: DecaySpec,
}

#[derive(Serialize)]
struct SweepEntry {
    gamma: f64,
    born_rate: f64,
    relative_error: f64,
}

fn golden_rule(cli: &Cli, args: &GoldenRuleArgs) -> Result<(), Failure> {
    let out = need_out(&cli.out, if args.sweep.is_empty() { "csv" } else { "dir" })?;
    let text = std::fs::read_to_string(&args.scenario)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", args.scenario.display())))?;
    let spec: DecaySpec = match serde_json::from_str::<WithDecay>(&text) {
        Ok(w) => w.decay,
        Err(_) => parse_json(&text)?,
    };
    let tol = cli.tol.unwrap_or(GOLDEN_RULE_TOL);
    let check = |curve: &gamow_lab::run::GoldenRuleCurve| -> Result<(), Failure> {
        if curve.probability_defect < tol && curve.rate_defect < RATE_TOL {
            Ok(())
        } else {
            Err(Failure::Task(format!(
                "P defect {:e}, rate defect {:e}",
                curve.probability_defect, curve.rate_defect
            )))
        }
    };

    if args.sweep.is_empty() {
        let curve = golden_rule_curve(&spec.build()?, &args.t_grid).map_err(Failure::Task)?;
        write_atomic(&out, &golden_rule_csv(&curve.rows))?;
        return check(&curve);
    }

    let mut summary = Vec::new();
    let mut failure = Ok(());
    for &gamma in &args.sweep {
        let mut s = spec.clone();
        s.pole.width = gamma;
        let curve = golden_rule_curve(&s.build()?, &args.t_grid).map_err(Failure::Task)?;
        write_atomic(&out.join(format!("golden-rule-gamma-{gamma}.csv")), &golden_rule_csv(&curve.rows))?;
        let born = born_rate(&curve.normalized).map_err(|e| Failure::Task(e.to_string()))?;
        summary.push(SweepEntry {
            gamma,
            born_rate: born,
            relative_error: (born - gamma).abs() / gamma,
        });
        if failure.is_ok() {
            failure = check(&curve);
        }
    }
    write_json(&out.join("summary.json"), &summary)?;
    failure
}

fn verify_all(cli: &Cli, cases: usize) -> Result<(), Failure> {
    let checks = in_pool(|| {
        run_suites(VerifyOptions {
            seed: cli.seed.unwrap_or(0),
            cases,
        })
    });
    for c in &checks {
        println!(
            "{} {:<36} defect {:.3e} tol {:.0e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.defect,
            c.tolerance
        );
    }
    if let Some(dir) = &cli.out {
        write_json(&dir.join("verify-all.json"), &checks)?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Task(format!("{failed} checks failed")))
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run { config } => {
            let scenario = load_config(config)?;
            let options = RunOptions {
                tolerance: cli.tol,
                seed: cli.seed,
                output_dir: cli.out.clone(),
            };
            let (report, dir) = run(&scenario, &options)?;
            for t in &report.tasks {
                println!(
                    "{} task {} {}{}",
                    if t.status == gamow_lab::Status::Pass { "PASS" } else { "FAIL" },
                    t.index,
                    t.kind,
                    t.message.as_deref().map(|m| format!(": {m}")).unwrap_or_default()
                );
            }
            println!("report: {}", dir.join("report.json").display());
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Task("some tasks failed".into()))
            }
        }
        Command::Hardy {
            command: HardyCommand::Check {
                wavefunction,
                report,
                points_per_side,
            },
        } => hardy(cli, wavefunction, report, *points_per_side),
        Command::Gamow {
            command: GamowCommand::Evolve { pole, t_grid, variant },
        } => gamow(cli, pole, t_grid, *variant),
        Command::Expand(args) => expand(cli, args),
        Command::GoldenRule(args) => golden_rule(cli, args),
        Command::VerifyAll { cases } => verify_all(cli, *cases),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            eprintln!("error: --tol must be > 0");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Task(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
