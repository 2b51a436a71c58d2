use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cotangent::scenario::{list_scenarios, run_scenario, RunOptions, ScenarioConfig, ScenarioId};
use cotangent::Error;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cotangent")).args(args).output().expect("binary runs")
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

const FREE: &str = r#"
scenario = "classical-free"
[system]
mass = 2.0
[initial]
q = [0.0, 0.0, 0.0, 0.0]
momentum = [0.4, 0.1, -0.3]
[integrator]
step = 0.05
duration = 5.0
"#;

#[test]
fn list_contains_every_scenario() {
    let out = cli(&["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ScenarioId::ALL {
        assert!(text.contains(id.name()), "missing {id}");
    }
    assert!(text.contains("classical-charged") && text.contains("quantize-verify"));
}

#[test]
fn list_as_json() {
    let out = cli(&["list-scenarios", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ids: Vec<_> = v.as_array().unwrap().iter().map(|s| s["id"].as_str().unwrap().to_string()).collect();
    assert_eq!(ids.len(), list_scenarios().len());
    assert!(v[0]["topics"].as_array().is_some_and(|t| !t.is_empty()));
}

#[test]
fn missing_mass_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &FREE.replace("mass = 2.0", ""));
    let cfg = ScenarioConfig::load(&path).unwrap();
    match run_scenario(&cfg, &RunOptions { output_dir: Some(dir.path().into()), ..Default::default() }) {
        Err(Error::ConfigInvalid { path, .. }) => assert_eq!(path, "system.mass"),
        other => panic!("expected ConfigInvalid, got {other:?}"),
    }
    let out = cli(&["run", path.to_str().unwrap(), "-o", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("system.mass"));
}

#[test]
fn unknown_key_is_rejected() {
    let err = ScenarioConfig::from_toml(&FREE.replace("mass = 2.0", "mass = 2.0\nmas = 1.0")).unwrap_err();
    assert!(matches!(err, Error::ConfigInvalid { .. }), "{err}");
    assert!(err.to_string().contains("mas"));
}

#[test]
fn unparseable_expression_is_rejected() {
    let text = r#"
scenario = "classical-curved"
[system]
mass = 1.0
metric = { kind = "diagonal", inverse = ["1 +* q1", "-1", "-1", "-1"] }
[initial]
q = [0.0, 0.0, 0.0, 0.0]
momentum = [0.0, 0.0, 0.0]
[integrator]
step = 0.1
duration = 1.0
"#;
    let cfg = ScenarioConfig::from_toml(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err =
        run_scenario(&cfg, &RunOptions { output_dir: Some(dir.path().into()), ..Default::default() }).unwrap_err();
    assert!(matches!(err, Error::Expression { .. }), "{err}");
}

#[test]
fn cfl_violation_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("klein-gordon-unstable.toml");
    let out = cli(&["run", cfg.to_str().unwrap(), "-o", dir.path().to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);
    assert!(report.to_string().contains("CflViolation"));
    assert!(!dir.path().join("evolution.csv").exists());
}

#[test]
fn free_run_writes_stamped_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), FREE);
    let out_dir = dir.path().join("out");
    let out = cli(&["run", path.to_str().unwrap(), "-o", out_dir.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("# scenario=classical-free seed=7\n"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["scenario"], "classical-free");
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::load(config_path("schrodinger-magnetic.toml")).unwrap();
    let mut cfg = cfg;
    cfg.output.grid_dumps = true;
    let run = |sub: &str| {
        let opts = RunOptions { output_dir: Some(dir.path().join(sub)), seed: Some(3), scenario: None };
        run_scenario(&cfg, &opts).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert!(a.report.passed);
    assert_eq!(a.report.outputs, b.report.outputs);
    for name in &a.report.outputs {
        let read = |o: &cotangent::scenario::RunOutcome| std::fs::read(o.output_dir.join(name)).unwrap();
        assert_eq!(read(&a), read(&b), "{name} differs");
    }
}

#[test]
fn sample_configs_pass() {
    for name in [
        "classical-free.toml",
        "classical-charged.toml",
        "classical-curved.toml",
        "classical-nonrel.toml",
        "schrodinger-harmonic.toml",
        "klein-gordon.toml",
    ] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScenarioConfig::load(config_path(name)).unwrap();
        let outcome =
            run_scenario(&cfg, &RunOptions { output_dir: Some(dir.path().into()), ..Default::default() }).unwrap();
        assert!(outcome.report.passed, "{name}:\n{}", outcome.report.to_text(true));
        assert_eq!(outcome.exit_code(), 0);
    }
}

#[test]
fn builtin_scenario_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["run", "--scenario", "kinematics-suite", "-o", dir.path().to_str().unwrap(), "-v"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn scenario_without_parameters_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["run", "--scenario", "schrodinger-run", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
