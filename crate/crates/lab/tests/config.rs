use std::fs;

use gamow_lab::config::{ConfigError, ScenarioConfig, TaskSpec, TimeRange};
use gamow_lab::run::config_digest;
use gamow_lab::{load_config, run, RunOptions, Status};
use serde_json::{json, Value};

fn minimal() -> Value {
    json!({
        "model": { "kind": "flat", "poles": [{ "E_R": 2.0, "Gamma": 0.4 }] },
        "wavefunctions": {
            "psi": { "terms": [{ "coefficient": 1.0, "pole": [0.0, 1.0], "multiplicity": 2 }] }
        },
        "tasks": [{ "kind": "expand", "psi": "psi", "phi": "psi" }]
    })
}

fn validate(v: &Value) -> Result<gamow_lab::Scenario, ConfigError> {
    ScenarioConfig::from_json(&v.to_string())?.validate()
}

fn validation_message(v: &Value) -> String {
    match validate(v) {
        Err(ConfigError::Validation(m)) => m,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn minimal_config_loads() {
    let s = validate(&minimal()).unwrap();
    assert_eq!(s.model.poles().len(), 1);
    assert_eq!(s.wavefunctions["psi"].class().to_string(), "HARDY_LOWER");
    assert_eq!(s.config.seed, 0);
}

#[test]
fn nonpositive_width_is_named() {
    for g in [0.0, -0.3] {
        let mut v = minimal();
        v["model"]["poles"][0]["Gamma"] = json!(g);
        assert!(validation_message(&v).contains("Gamma must be > 0"));
    }
}

#[test]
fn undeclared_wavefunction_is_named() {
    let mut v = minimal();
    v["tasks"][0]["phi"] = json!("psi2");
    let m = validation_message(&v);
    assert!(m.contains("psi2"), "{m}");
}

#[test]
fn golden_rule_needs_decay_section() {
    let mut v = minimal();
    v["tasks"] = json!([{ "kind": "golden-rule", "t_grid": "0:1:3" }]);
    assert!(validation_message(&v).contains("decay"));
}

#[test]
fn wavefunction_class_contradicting_poles_is_rejected() {
    let mut v = minimal();
    v["wavefunctions"]["psi"]["class"] = json!("HARDY_UPPER");
    assert!(validation_message(&v).contains("psi"));
}

#[test]
fn parse_errors_carry_position() {
    let text = "{\n  \"model\": {\n    \"kind\": \"flat\",,\n  }\n}";
    match ScenarioConfig::from_json(text) {
        Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let mut v = minimal();
    v["model"]["colour"] = json!("red");
    assert!(matches!(ScenarioConfig::from_json(&v.to_string()), Err(ConfigError::Parse { .. })));
}

#[test]
fn complex_values_accept_both_spellings() {
    let mut v = minimal();
    v["model"]["background"] = json!([0.0, 1.0]);
    v["wavefunctions"]["psi"]["terms"][0]["coefficient"] = json!(2);
    let s = validate(&v).unwrap();
    assert_eq!(s.model.background().im, 1.0);
}

#[test]
fn time_ranges() {
    let r: TimeRange = "0:50:500".parse().unwrap();
    let p = r.points();
    assert_eq!(p.len(), 500);
    assert_eq!((p[0], p[499]), (0.0, 50.0));
    assert_eq!("-1:1:1".parse::<TimeRange>().unwrap().points(), vec![-1.0]);
    for bad in ["0:1", "0:1:0", "a:1:2", "0:inf:3"] {
        assert!(bad.parse::<TimeRange>().is_err(), "{bad}");
    }
}

#[test]
fn digest_ignores_output_dir_but_not_seed() {
    let a = ScenarioConfig::from_json(&minimal().to_string()).unwrap();
    let mut b = a.clone();
    b.output_dir = "elsewhere".into();
    assert_eq!(config_digest(&a), config_digest(&b));
    b.seed = 3;
    assert_ne!(config_digest(&a), config_digest(&b));
}

#[test]
fn reruns_are_byte_identical_and_failures_isolated() {
    let mut v = minimal();
    v["decay"] = json!({ "pole": { "E_R": 3.0, "Gamma": 0.1 }, "channels": [{ "kind": "constant", "value": 0.5 }] });
    v["tasks"] = json!([
        { "kind": "gamow-evolve", "variant": "decaying", "t_grid": "-1:1:5" },
        { "kind": "expand", "psi": "psi", "phi": "psi", "mode": "physical" },
        { "kind": "golden-rule", "t_grid": "0:20:50" },
        { "kind": "verify-all", "cases": 2 }
    ]);
    v["seed"] = json!(11);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    fs::write(&path, v.to_string()).unwrap();
    let scenario = load_config(&path).unwrap();
    assert!(matches!(scenario.config.tasks[0], TaskSpec::GamowEvolve { .. }));

    let mut bytes = Vec::new();
    for sub in ["a", "b"] {
        let options = RunOptions {
            output_dir: Some(dir.path().join(sub)),
            ..RunOptions::default()
        };
        let (report, out) = run(&scenario, &options).unwrap();
        assert!(!report.passed);
        assert_eq!(report.exit_code(), 1);
        assert_eq!(report.tasks[0].status, Status::Fail);
        assert!(report.tasks[0].message.as_deref().unwrap().contains("TimeDirectionViolation"));
        assert!(report.tasks[1..].iter().all(|t| t.status == Status::Pass), "{:?}", report.tasks);
        assert!(out.join("task-02-golden-rule.csv").exists());
        bytes.push(fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}
