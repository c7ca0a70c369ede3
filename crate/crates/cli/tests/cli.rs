use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nlwave(mode: &str, config: &str, dir: &Path, out: &str) -> Output {
    let cfg = dir.join(format!("{out}.json"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_nlwave"))
        .args(["--mode", mode, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .args(["--quiet", "--jobs", "2"])
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const TM: &str = r#"{"k": 1.0, "omega": 1.0,
    "permittivity": {"kind": "constant", "value": 0.5},
    "nonlinearity": {"kind": "kerr", "chi3": 1.0},
    "grid": {"n": 64, "half_width": 12.0},
    "solver": {"states": 1}}"#;

#[test]
fn spectrum_rows_match_shifted_symbol() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlwave("spectrum", r#"{"k": 1.0, "spectrum": {"points": 16}}"#, dir.path(), "s");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("s/summary.json"));
    assert_eq!(summary["config"]["config"]["grid"]["n"], 128);
    let table = &summary["tables"][0];
    assert!(table["max_deviation"].as_f64().unwrap() < 1e-12);
    let csv = std::fs::read_to_string(dir.path().join("s").join(table["table"].as_str().unwrap())).unwrap();
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 256);
    for r in rows {
        let shadow = r[2] * r[2] + r[3] * r[3] + 1.0;
        assert!((r[4] - shadow).abs() < 1e-12 * shadow);
        assert!(r[5].abs() < 1e-9 && r[6].abs() < 1e-9);
        for ev in &r[7..] {
            assert!((ev - shadow).abs() < 1e-9 * shadow);
        }
    }
}

#[test]
fn violated_assumption_v_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = TM.replace("\"value\": 0.5", "\"value\": 1.0");
    let out = nlwave("tm-solve", &cfg, dir.path(), "bad");
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("assumption (V)"), "{stderr}");
    let err = json(&dir.path().join("bad/error.json"));
    assert_eq!(err["kind"], "validation");
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn physical_parameters_are_required() {
    let dir = tempfile::tempdir().unwrap();
    for (field, cfg) in [
        ("`k`", TM.replace("\"k\": 1.0,", "")),
        ("`omega`", TM.replace("\"omega\": 1.0,", "")),
        ("`permittivity`", TM.replace("\"permittivity\": {\"kind\": \"constant\", \"value\": 0.5},", "")),
    ] {
        let out = nlwave("tm-solve", &cfg, dir.path(), "m");
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains(field));
    }
    let out = nlwave("spectrum", "{}", dir.path(), "m");
    assert_eq!(out.status.code(), Some(2));
    let out = nlwave("tm-solve", "{not json", dir.path(), "m");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("file"), b"").unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, "{\"k\": 1.0}").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nlwave"))
        .args(["--mode", "spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("file/sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn orlicz_check_reports_power_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlwave("orlicz-check", r#"{"nonlinearity": {"kind": "power", "p": 3.0}}"#, dir.path(), "o");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&dir.path().join("o/orlicz_report.json"));
    assert!((r["delta2_k"].as_f64().unwrap() - 8.0).abs() < 1e-10);
    assert!((r["delta2_kappa"].as_f64().unwrap() - 3.0).abs() < 1e-10);
    assert_eq!(r["f3"], true);
    assert!(r["young_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn te_shoot_writes_profiles_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlwave("te-shoot", r#"{"te": {"n": [1]}}"#, dir.path(), "te");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("te/te_summary.json"));
    let sol = &s["solutions"][0];
    assert_eq!(sol["zeros"], 1);
    assert_eq!(sol["deriv_zeros"], 2);
    assert!((sol["slope_star"].as_f64().unwrap() - 2.4155).abs() < 1e-4);
    let csv = std::fs::read_to_string(dir.path().join("te/te_n1.csv")).unwrap();
    assert!(csv.starts_with("r,beta,dbeta\n0e0,0e0,"));
}

#[test]
fn solve_then_verify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlwave("tm-solve", TM, dir.path(), "a");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("a/summary.json"));
    assert_eq!(s["status"], "certified");
    assert_eq!(s["config"]["config"]["nonlinearity"]["omega"], 1.0);
    let st = &s["states"][0];
    assert!(st["certification"]["maxwell_residual"].as_f64().unwrap() < 1e-5);
    assert_eq!(st["fields"]["b3_ratio"], 0.0);

    // same seed, same bytes
    let again = nlwave("tm-solve", TM, dir.path(), "b");
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.path().join("a/state_1.f6")).unwrap(),
        std::fs::read(dir.path().join("b/state_1.f6")).unwrap()
    );

    let input = dir.path().join("a");
    let cfg = serde_json::json!({"verify": {"input": input}}).to_string();
    let v = nlwave("verify", &cfg, dir.path(), "v");
    assert_eq!(v.status.code(), Some(0), "{}", String::from_utf8_lossy(&v.stderr));
    let rep = json(&dir.path().join("v/verify.json"));
    assert!(rep["states"][0]["max_relative_deviation"].as_f64().unwrap() <= 1e-12);

    // a tampered action is caught
    let mut tampered = s.clone();
    let j = tampered["states"][0]["certification"]["action"].as_f64().unwrap();
    tampered["states"][0]["certification"]["action"] = (j * (1.0 + 1e-9)).into();
    std::fs::write(dir.path().join("a/summary.json"), tampered.to_string()).unwrap();
    let v = nlwave("verify", &cfg, dir.path(), "v2");
    assert_eq!(v.status.code(), Some(2));
}
