use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use abw_cli::{parse, set_param, validate, ScenarioConfig};
use serde_json::{json, Value};

fn scenario(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Writes `config` with output under `dir` and returns the file path.
fn write(dir: &Path, name: &str, mut config: Value) -> PathBuf {
    config["output_dir"] = json!(format!("out_{name}"));
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn cli(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ab-wavelab"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("AB_WAVELAB_THREADS", t),
        None => cmd.env_remove("AB_WAVELAB_THREADS"),
    };
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn magnetic_single_runs_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "single", scenario("magnetic_single.json"));
    let o = cli(&["run", path.to_str().unwrap()], Some("1"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out_single");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let peak = report["report"]["measured_peak"].as_f64().unwrap();
    let predicted = report["report"]["predicted"].as_f64().unwrap();
    assert!((peak - predicted).abs() / predicted < 0.15, "{peak} {predicted}");
    assert!(out.join("profile.csv").exists());
    // the echoed config validates and reruns to the same bytes
    let echoed: ScenarioConfig = serde_json::from_value(report["config"].clone()).unwrap();
    assert!(validate(&echoed).is_empty());
    let first = std::fs::read(out.join("report.json")).unwrap();
    let o = cli(&["run", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(out.join("report.json")).unwrap(), first);
}

#[test]
fn overlapping_obstacles_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = scenario("magnetic_broken.json");
    c["experiment"]["magnetic_broken"]["obstacles"][2]["shape"]["center"] = c["experiment"]["magnetic_broken"]["obstacles"][1]["shape"]["center"].clone();
    let path = write(dir.path(), "overlap", c);
    let o = cli(&["run", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("intersecting closures"), "{}", stderr(&o));
    assert!(!dir.path().join("out_overlap").exists());
}

#[test]
fn error_budget_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = scenario("magnetic_single.json");
    c["experiment"]["magnetic_single"]["phase_tolerance"] = json!(1e-6);
    let path = write(dir.path(), "budget", c);
    let o = cli(&["run", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("error budget"));
}

#[test]
fn validate_accepts_every_shipped_scenario() {
    for name in ["magnetic_single", "magnetic_broken", "mirror", "electric", "beam_validate", "solver_validate"] {
        let text = serde_json::to_string(&scenario(&format!("{name}.json"))).unwrap();
        let cfg = parse(&text, Path::new(name)).unwrap();
        assert_eq!(cfg.experiment.name(), name);
        assert!(validate(&cfg).is_empty(), "{name}: {:?}", validate(&cfg));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "ok", scenario("mirror.json"));
    let o = cli(&["validate", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(!dir.path().join("out_ok").exists());
}

#[test]
fn wide_strip_gives_one_support_diagnostic() {
    let mut c = scenario("magnetic_single.json");
    c["experiment"]["magnetic_single"]["beam_theta"]["delta1"] = json!(0.5);
    let cfg: ScenarioConfig = serde_json::from_value(c.clone()).unwrap();
    let diags = validate(&cfg);
    assert_eq!(diags.len(), 1);
    assert!(diags[0].contains("intersects obstacle tube"), "{diags:?}");
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["validate", write(dir.path(), "strip", c).to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn resonant_k_with_equal_directions_is_degenerate() {
    let mut c = scenario("magnetic_single.json");
    let m = &mut c["experiment"]["magnetic_single"];
    m["beam_theta"] = m["beam_omega"].clone();
    let cfg: ScenarioConfig = serde_json::from_value(c).unwrap();
    let diags = validate(&cfg);
    assert_eq!(diags.len(), 1);
    assert!(diags[0].contains("degenerate geometry"), "{diags:?}");
}

#[test]
fn parse_errors_carry_position() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = scenario("mirror.json");
    c["experiment"]["mirror"]["colour"] = json!("red");
    let path = write(dir.path(), "unknown", c);
    let o = cli(&["validate", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("unknown field `colour`") && e.contains("unknown.json:"), "{e}");
    let missing = cli(&["run", dir.path().join("nope.json").to_str().unwrap()], None);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = scenario("mirror.json");
    c["experiment"]["mirror"]["k"] = json!(30.0);
    let path = write(dir.path(), "sweep", c);
    let o = cli(
        &["sweep", path.to_str().unwrap(), "--param", "experiment.mirror.fluxes.0.flux", "--values", "0,1.5707963267948966,3.141592653589793"],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out_sweep");
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4);
    let peaks: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert!(peaks[0] < 0.1 && peaks[1] > 1.5 && peaks[2] > 3.4, "{peaks:?}");
    assert!(out.join("sweep_002/report.json").exists());
    let bad = cli(&["sweep", path.to_str().unwrap(), "--param", "experiment.mirror.nothing", "--values", "1"], None);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn set_param_accepts_pointers() {
    let mut v = json!({"a": {"b": [1, 2]}});
    set_param(&mut v, "/a/b/1", json!(5)).unwrap();
    set_param(&mut v, "a.b.0", json!(4)).unwrap();
    assert_eq!(v, json!({"a": {"b": [4, 5]}}));
    assert!(set_param(&mut v, "a.c", json!(0)).is_err());
}

#[test]
fn bad_thread_count_exits_2() {
    let o = cli(&["validate", "whatever.json"], Some("zero"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("AB_WAVELAB_THREADS"));
}

#[test]
fn solver_validate_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = scenario("solver_validate.json");
    c["field_dump"] = json!("abwf");
    let path = write(dir.path(), "solver", c.clone());
    assert_eq!(cli(&["run", path.to_str().unwrap()], None).status.code(), Some(0));
    let out = dir.path().join("out_solver");
    let first = std::fs::read(out.join("report.json")).unwrap();
    assert_eq!(cli(&["run", path.to_str().unwrap()], Some("1")).status.code(), Some(0));
    assert_eq!(std::fs::read(out.join("report.json")).unwrap(), first);
    assert!(out.join("field_001.abwf").exists());
    let report: Value = serde_json::from_slice(&first).unwrap();
    assert!(report["report"]["gauge_covariance_error"].as_f64().unwrap() < 1e-9);
    assert!(report["report"]["norm_drift"].as_f64().unwrap() < 1e-9);
    assert!(report["report"]["group_velocity_error"].is_null());
}

#[test]
fn electric_scenario_detects_the_effect() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = scenario("electric.json");
    c["experiment"]["electric"]["solver"] = json!({"grid": {"origin": [-1.1, -1.1], "spacing": 0.04, "nx": 56, "ny": 56}, "dt": 0.004});
    let path = write(dir.path(), "electric", c);
    let o = cli(&["run", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out_electric/report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["verdict"], json!(true));
    assert!(dir.path().join("out_electric/density_difference.csv").exists());
}
