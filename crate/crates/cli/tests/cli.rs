use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qiplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qiplab")).args(args).output().expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn reveal_wi_is_one() {
    let out = qiplab(&["qip", "wi", "--fixture", "reveal", "--x", "01", "--w0", "00", "--w1", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["results"]["wi_error"], 1.0);
    assert_eq!(v["inputs"]["w0"], "00");
}

#[test]
fn first_bits_closed_form() {
    let out = qiplab(&["qds", "check", "--family", "first-bits", "--t", "8", "--tprime", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["results"]["delta"].as_f64().unwrap() - 1.0 / 16.0).abs() < 1e-12);
    assert!((v["results"]["gap"].as_f64().unwrap() - 1.0 / 8.0).abs() < 1e-12);
}

#[test]
fn grover_curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let report = dir.path().join("curve.json");
    let out = qiplab(&[
        "grover", "curve", "--k", "4,8,16", "--csv", csv.to_str().unwrap(), "--out", report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,T,catch_b0_attack,catch_b0_honest_bad,find_j_attack,find_j_honest");
    assert_eq!(lines.len(), 4);
    let k4: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(k4[..2], [4.0, 1.0]);
    assert!((k4[5] - 1.0).abs() < 1e-9);
    assert_eq!(json_file(&report)["schema"], 1);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["batch", "advice", "--seed", "11"],
        vec!["qds", "check", "--family", "random", "--t", "5", "--tprime", "2", "--seed", "4", "--samples", "40"],
        vec!["qip", "adversary", "--fixture", "noisy-reveal", "--x", "00", "--seed", "9", "--restarts", "3"],
    ] {
        let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("r{i}.json"))).collect();
        for p in &paths {
            let mut full = args.clone();
            full.extend(["--out", p.to_str().unwrap()]);
            assert_eq!(qiplab(&full).status.code(), Some(0), "{args:?}");
        }
        assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap(), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(qiplab(&["bogus"]).status.code(), Some(1));
    assert_eq!(qiplab(&["batch", "advice"]).status.code(), Some(1));
    assert_eq!(qiplab(&["qip", "run", "--fixture", "nope", "--w", "00"]).status.code(), Some(1));
    assert_eq!(qiplab(&["fixtures", "list", "--tol", "nope=1"]).status.code(), Some(1));
}

#[test]
fn infeasible_dimensions_exit_three() {
    let out = qiplab(&["transform", "pipeline", "--fixture", "blind"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("par-repeat"));
    assert_eq!(qiplab(&["grover", "attack", "--k", "64", "--bad", "0"]).status.code(), Some(3));
}

#[test]
fn failed_assertion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("advice.json");
    assert_eq!(qiplab(&["batch", "advice", "--seed", "11", "--out", path.to_str().unwrap()]).status.code(), Some(0));
    let mut advice = json_file(&path)["results"].clone();
    advice["value"] = 0.0.into();
    advice["epsilon"] = 0.0.into();
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, advice.to_string()).unwrap();
    let out = qiplab(&["batch", "advice", "--advice", tampered.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("assertion failed"));
}

#[test]
fn fixtures_are_listed() {
    let v = stdout_json(&qiplab(&["fixtures", "list"]));
    let names: Vec<&str> = v["results"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for n in ["reveal", "blind", "noisy-reveal", "sketch-batch", "checking-batch"] {
        assert!(names.contains(&n));
    }
}
