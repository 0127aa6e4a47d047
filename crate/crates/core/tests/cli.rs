use std::path::Path;
use std::process::{Command, Output};

use crharq::report::{validate, ValidationHooks};
use crharq::Config;

fn crharq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crharq")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn analyze_echoes_the_baseline() {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/baseline.toml");
    let out = crharq(&["analyze", "--config", cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["config"]["timing"]["frame_duration_s"], 1e-4);
    assert_eq!(doc["config"]["timing"]["sensing_duration_s"], 2e-5);
    assert_eq!(doc["config"]["timing"]["bandwidth_hz"], 1e6);
    assert_eq!(doc["config"]["sensing"]["detection_threshold"], 1.4);
    assert_eq!(doc["config"]["sensing"]["primary_activity_prob"], 0.1);
    assert_eq!(doc["tool"], "crharq");
    assert!(doc["version"].is_string());
    assert!(doc["effective_capacity"]["paper"]["eff_cap_bcu"].is_number());
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[timing]\nsensing_duration_s = 1e-4\n");
    let out = crharq(&["analyze", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sensing_duration_s"));

    let typo = write(dir.path(), "typo.toml", "[link]\npacket_bit = 3\n");
    assert_eq!(crharq(&["analyze", "--config", &typo]).status.code(), Some(2));
    assert_eq!(crharq(&["analyze", "--config", "/nonexistent.toml"]).status.code(), Some(2));
}

#[test]
fn zero_payload_gives_zero_rates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "zero.toml", "[link]\npacket_bits = 0\n");
    let doc = json(&crharq(&["analyze", "--config", &cfg]));
    assert_eq!(doc["chain"]["p_lost"], 0.0);
    assert_eq!(doc["throughput"]["service_rate_bcu"], 0.0);
    assert_eq!(doc["throughput"]["goodput_bcu"], 0.0);
    assert_eq!(doc["effective_capacity"]["renewal"]["eff_cap_bcu"], 0.0);
    assert_eq!(doc["effective_capacity"]["paper"]["eff_cap_bcu"], 0.0);
}

#[test]
fn sweep_writes_fixed_schema_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/deadline_sweep.toml");
    let out_path = dir.path().join("d.csv");
    let out = crharq(&["sweep", "--config", cfg, "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(&out_path).unwrap();
    let header = reader.headers().unwrap().clone();
    assert_eq!(header.len(), crharq::sweep::csv_header().len());
    assert_eq!(reader.records().count(), 16);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["rows"], 16);
    assert_eq!(meta["config"]["link"]["qos_exponent_per_bit"], 1e-3);
}

#[test]
fn theta_sweep_at_deadline_one_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "flat.toml",
        "[link]\ndeadline_frames = 1\npacket_bits = 120\n\n[[sweep]]\naxis = \"theta\"\nvalues = [1e-5, 1e-3, 0.1, 1.0]\n",
    );
    let out = crharq(&["sweep", "--config", &cfg]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(&out.stdout[..]);
    for rec in reader.deserialize::<std::collections::HashMap<String, String>>() {
        let rec = rec.unwrap();
        assert_eq!(rec["effcap_bcu_renewal"].parse::<f64>().unwrap(), 1.2);
        assert_eq!(rec["effcap_bcu_paper"].parse::<f64>().unwrap(), 1.2);
    }
}

#[test]
fn permuting_sweep_values_permutes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let up = write(dir.path(), "up.toml", "[[sweep]]\naxis = \"lambda\"\nvalues = [1.2, 1.4, 1.6]\n");
    let down = write(dir.path(), "down.toml", "[[sweep]]\naxis = \"lambda\"\nvalues = [1.6, 1.4, 1.2]\n");
    let rows = |p: &str| {
        let text = String::from_utf8(crharq(&["sweep", "--config", p]).stdout).unwrap();
        text.lines().skip(1).map(String::from).collect::<Vec<_>>()
    };
    let mut a = rows(&up);
    a.reverse();
    assert_eq!(a, rows(&down));
}

#[test]
fn simulate_is_byte_identical_for_a_fixed_seed() {
    let args = ["simulate", "--frames", "1000", "--seed", "42"];
    let a = crharq(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, crharq(&args).stdout);
    let doc = json(&a);
    assert_eq!(doc["simulation"]["seed"], 42);
    assert_eq!(doc["empirical"]["frames"], 1000);
}

#[test]
fn simulate_with_zero_threshold_loses_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k0.toml", "[link]\npacket_bits = 0\n");
    let doc = json(&crharq(&["simulate", "--config", &cfg, "--frames", "5000", "--mode", "physical"]));
    assert_eq!(doc["empirical"]["est_p_lost"]["value"], 0.0);
    assert_eq!(doc["empirical"]["packets_lost"], 0);
}

#[test]
fn validate_passes_at_baseline_and_deadline_one() {
    let out = crharq(&["validate", "--frames", "1000000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut cfg = Config::default();
    cfg.link.deadline_frames = 1;
    cfg.simulation.frames = 200_000;
    let r = validate(&cfg, &ValidationHooks::default()).unwrap();
    assert!(r.passed, "{:#?}", r.checks);
}

#[test]
fn corrupted_root_input_fails_validation() {
    let mut cfg = Config::default();
    cfg.simulation.frames = 20_000;
    let hooks = ValidationHooks {
        root_failure_probs: Some(vec![0.9, 0.9, 0.9, 0.9]),
    };
    let r = validate(&cfg, &hooks).unwrap();
    assert!(!r.passed);
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert!(failed.contains(&"root_vs_spectral_radius"), "{failed:?}");
}

#[test]
fn unknown_flag_values_are_rejected() {
    assert!(!crharq(&["simulate", "--mode", "quantum"]).status.success());
    assert!(!crharq(&["analyze", "--variant", "both"]).status.success());
    assert!(!crharq(&["sweep", "--preset", "fig9"]).status.success());
}
