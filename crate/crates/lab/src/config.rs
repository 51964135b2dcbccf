//! Scenario files: JSON schema, parsing and eager validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use gamow_lab_core::{
    Complex64, Coupling, DecayScenario, EnergyWaveFunction, GaussianDamping, HardyClass, LorentzDamping, ModelKind,
    PoleTerm, ResonancePole, SMatrixModel,
};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid config: {0}")]
    Validation(String),
}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Validation(msg.into())
}

/// A complex number written either as a plain number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsonComplex(pub Complex64);

impl Serialize for JsonComplex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&self.0.re)?;
        t.serialize_element(&self.0.im)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for JsonComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = JsonComplex;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a [re, im] pair")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<JsonComplex, E> {
                Ok(JsonComplex(Complex64::new(v, 0.0)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<JsonComplex, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<JsonComplex, E> {
                self.visit_f64(v as f64)
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<JsonComplex, A::Error> {
                let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(JsonComplex(Complex64::new(re, im)))
            }
        }
        d.deserialize_any(V)
    }
}

impl From<Complex64> for JsonComplex {
    fn from(z: Complex64) -> Self {
        JsonComplex(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    #[serde(rename = "E_R")]
    pub energy: f64,
    #[serde(rename = "Gamma")]
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue: Option<JsonComplex>,
}

impl PoleSpec {
    pub fn build(&self) -> Result<ResonancePole, ConfigError> {
        let pole = ResonancePole::new(self.energy, self.width).map_err(|e| invalid(core_message(&e)))?;
        Ok(match self.residue {
            Some(r) => pole.with_residue(r.0),
            None => pole,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKindSpec {
    Flat,
    Uniformized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKindSpec,
    #[serde(default)]
    pub poles: Vec<PoleSpec>,
    #[serde(default = "unit_background")]
    pub background: JsonComplex,
    #[serde(default)]
    pub branch_point: f64,
}

fn unit_background() -> JsonComplex {
    JsonComplex(Complex64::new(1.0, 0.0))
}

impl ModelSpec {
    pub fn build(&self) -> Result<SMatrixModel, ConfigError> {
        let poles = self.poles.iter().map(PoleSpec::build).collect::<Result<Vec<_>, _>>()?;
        let kind = match self.kind {
            ModelKindSpec::Flat => ModelKind::FlatRationalE,
            ModelKindSpec::Uniformized => ModelKind::UniformizedRationalK,
        };
        SMatrixModel::new(kind, poles, self.background.0, self.branch_point)
            .map_err(|e| invalid(format!("model: {}", core_message(&e))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassSpec {
    #[serde(rename = "HARDY_UPPER")]
    Upper,
    #[serde(rename = "HARDY_LOWER")]
    Lower,
    #[serde(rename = "NONE")]
    Neither,
}

impl From<ClassSpec> for HardyClass {
    fn from(c: ClassSpec) -> Self {
        match c {
            ClassSpec::Upper => HardyClass::Upper,
            ClassSpec::Lower => HardyClass::Lower,
            ClassSpec::Neither => HardyClass::Neither,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coefficient: JsonComplex,
    pub pole: JsonComplex,
    #[serde(default = "one")]
    pub multiplicity: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingSpec {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveFunctionSpec {
    pub terms: Vec<TermSpec>,
    /// Declared class; inferred from the pole positions when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<DampingSpec>,
}

impl WaveFunctionSpec {
    pub fn build(&self) -> Result<EnergyWaveFunction, ConfigError> {
        let terms: Vec<PoleTerm> = self
            .terms
            .iter()
            .map(|t| PoleTerm::new(t.coefficient.0, t.pole.0, t.multiplicity))
            .collect();
        let built = match (self.damping, self.class) {
            (Some(d), None | Some(ClassSpec::Neither)) => EnergyWaveFunction::damped(
                terms,
                GaussianDamping {
                    center: d.center,
                    width: d.width,
                },
            ),
            (Some(_), Some(_)) => return Err(invalid("a damped wave function can only be of class NONE")),
            (None, Some(c)) => EnergyWaveFunction::new(terms, c.into()),
            (None, None) => EnergyWaveFunction::inferred(terms),
        };
        built.map_err(|e| invalid(core_message(&e)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CouplingSpec {
    Constant {
        value: f64,
    },
    Polynomial {
        coefficients: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        damping: Option<DampingSpec>,
    },
    Tabulated {
        energies: Vec<f64>,
        values: Vec<f64>,
    },
}

impl CouplingSpec {
    pub fn build(&self) -> Coupling {
        match self {
            CouplingSpec::Constant { value } => Coupling::Constant(*value),
            CouplingSpec::Polynomial { coefficients, damping } => Coupling::Polynomial {
                coefficients: coefficients.clone(),
                damping: damping.map(|d| LorentzDamping {
                    center: d.center,
                    width: d.width,
                }),
            },
            CouplingSpec::Tabulated { energies, values } => Coupling::Tabulated {
                energies: energies.clone(),
                values: values.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub pole: PoleSpec,
    pub channels: Vec<CouplingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub born_energy: Option<f64>,
}

impl DecaySpec {
    pub fn build(&self) -> Result<DecayScenario, ConfigError> {
        let pole = self.pole.build()?;
        let channels = self.channels.iter().map(CouplingSpec::build).collect();
        let s = DecayScenario::new(pole, channels).map_err(|e| invalid(format!("decay: {}", core_message(&e))))?;
        Ok(match self.born_energy {
            Some(e) if e.is_finite() => s.with_born_energy(e),
            Some(_) => return Err(invalid("decay: born_energy must be finite")),
            None => s,
        })
    }
}

/// `a:b:n`, `n` evenly spaced points from `a` to `b` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeRange {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl TimeRange {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.end } else { self.start + step * i as f64 })
            .collect()
    }
}

impl std::str::FromStr for TimeRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("time grid '{s}' must look like a:b:n"));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| format!("bad grid start '{}'", parts[0]))?;
        let end: f64 = parts[1].trim().parse().map_err(|_| format!("bad grid end '{}'", parts[1]))?;
        let count: usize = parts[2].trim().parse().map_err(|_| format!("bad grid count '{}'", parts[2]))?;
        if !start.is_finite() || !end.is_finite() || count == 0 {
            return Err(format!("time grid '{s}' needs finite ends and n >= 1"));
        }
        Ok(TimeRange { start, end, count })
    }
}

impl fmt::Display for TimeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.count)
    }
}

impl Serialize for TimeRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantSpec {
    Decaying,
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    FullLine,
    Physical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    HardyCheck {
        wavefunction: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points_per_side: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    GamowEvolve {
        #[serde(default)]
        pole: usize,
        variant: VariantSpec,
        t_grid: TimeRange,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Expand {
        psi: String,
        phi: String,
        #[serde(default = "full_line")]
        mode: ModeSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    GoldenRule {
        t_grid: TimeRange,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    VerifyAll {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cases: Option<usize>,
    },
}

fn full_line() -> ModeSpec {
    ModeSpec::FullLine
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::HardyCheck { .. } => "hardy-check",
            TaskSpec::GamowEvolve { .. } => "gamow-evolve",
            TaskSpec::Expand { .. } => "expand",
            TaskSpec::GoldenRule { .. } => "golden-rule",
            TaskSpec::VerifyAll { .. } => "verify-all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub wavefunctions: BTreeMap<String, WaveFunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecaySpec>,
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("gamow-lab-out")
}

/// Everything a run needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub model: SMatrixModel,
    pub wavefunctions: BTreeMap<String, EnergyWaveFunction>,
    pub decay: Option<DecayScenario>,
}

fn check_tolerance(index: usize, tol: Option<f64>) -> Result<(), ConfigError> {
    match tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(invalid(format!("task {index}: tolerance must be > 0"))),
        _ => Ok(()),
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    /// Build every referenced object, failing on the first violated invariant.
    pub fn validate(&self) -> Result<Scenario, ConfigError> {
        let model = self.model.build()?;
        let mut wavefunctions = BTreeMap::new();
        for (name, spec) in &self.wavefunctions {
            let wf = spec.build().map_err(|e| match e {
                ConfigError::Validation(m) => invalid(format!("wavefunction '{name}': {m}")),
                other => other,
            })?;
            wavefunctions.insert(name.clone(), wf);
        }
        let decay = self.decay.as_ref().map(DecaySpec::build).transpose()?;
        if self.tasks.is_empty() {
            return Err(invalid("no tasks declared"));
        }
        let known = |index: usize, name: &str| -> Result<(), ConfigError> {
            if wavefunctions.contains_key(name) {
                Ok(())
            } else {
                Err(invalid(format!("task {index}: undeclared wavefunction '{name}'")))
            }
        };
        for (index, task) in self.tasks.iter().enumerate() {
            match task {
                TaskSpec::HardyCheck {
                    wavefunction,
                    points_per_side,
                    tolerance,
                } => {
                    known(index, wavefunction)?;
                    check_tolerance(index, *tolerance)?;
                    if let Some(n) = points_per_side {
                        if *n < 2 || n % 2 != 0 {
                            return Err(invalid(format!("task {index}: points_per_side must be even and >= 2")));
                        }
                    }
                }
                TaskSpec::GamowEvolve { pole, tolerance, .. } => {
                    if *pole >= model.poles().len() {
                        return Err(invalid(format!("task {index}: model has no pole {pole}")));
                    }
                    check_tolerance(index, *tolerance)?;
                }
                TaskSpec::Expand {
                    psi, phi, tolerance, ..
                } => {
                    known(index, psi)?;
                    known(index, phi)?;
                    check_tolerance(index, *tolerance)?;
                }
                TaskSpec::GoldenRule { tolerance, .. } => {
                    if decay.is_none() {
                        return Err(invalid(format!("task {index}: golden-rule needs a 'decay' section")));
                    }
                    check_tolerance(index, *tolerance)?;
                }
                TaskSpec::VerifyAll { cases } => {
                    if *cases == Some(0) {
                        return Err(invalid(format!("task {index}: cases must be >= 1")));
                    }
                }
            }
        }
        Ok(Scenario {
            config: self.clone(),
            model,
            wavefunctions,
            decay,
        })
    }
}

/// Read, parse and validate a scenario file.
pub fn load_config(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioConfig::from_json(&text)?.validate()
}

/// Error text without the enum wrapper for invariants reported by the core.
pub(crate) fn core_message(e: &gamow_lab_core::Error) -> String {
    match e {
        gamow_lab_core::Error::Invalid(m) => m.clone(),
        other => other.to_string(),
    }
}
