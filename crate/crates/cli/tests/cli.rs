use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn poslab(args: &[&str]) -> Output {
    poslab_env(args, &[])
}

fn poslab_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_poslab"));
    c.args(args).env_remove("POSLAB_THREADS");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("spawn poslab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let o = poslab(&["run", "--suite", "nonsense", "--group", "SL3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_group_and_bad_samples_are_usage_errors() {
    assert_eq!(code(&poslab(&["run", "--suite", "cocycle", "--group", "SL1"])), 2);
    assert_eq!(code(&poslab(&["run", "--suite", "cocycle", "--group", "SL3", "--samples", "0"])), 2);
}

#[test]
fn unsupported_combinations_are_capability_errors() {
    let o = poslab(&["run", "--suite", "exact-parity", "--group", "SO(3,4)", "--samples", "5"]);
    assert_eq!(code(&o), 2);
    let o = poslab(&["run", "--suite", "tensor", "--group", "SL3", "--samples", "5", "--backend", "exact"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn passing_run_exits_zero_and_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = poslab(&["run", "--suite", "theoremA", "--group", "SL3", "--samples", "40", "--seed", "7", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read(&out);
    assert_eq!(v["suite"], "theoremA");
    assert_eq!(v["trials"], 40);
    assert_eq!(v["passes"], 40);
    assert_eq!(v["records"].as_array().unwrap().len(), 40);
    assert!(v["failures"].as_array().unwrap().is_empty());
}

#[test]
fn reports_are_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("r{i}.json"));
        let args = ["run", "--suite", "cocycle", "--group", "Sp4", "--samples", "60", "--seed", "11", "--out", s(&out)];
        let o = poslab_env(&args, &[("POSLAB_THREADS", threads)]);
        assert_eq!(code(&o), 0);
        bytes.push(fs::read(&out).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    assert_eq!(bytes[1], bytes[2]);
}

#[test]
fn different_seeds_give_different_reports() {
    let a = poslab(&["run", "--suite", "tensor", "--group", "SL3", "--samples", "10", "--seed", "1"]);
    let b = poslab(&["run", "--suite", "tensor", "--group", "SL3", "--samples", "10", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn invalid_thread_cap_is_a_usage_error() {
    let o = poslab_env(&["run", "--suite", "tensor", "--group", "SL3", "--samples", "3"], &[("POSLAB_THREADS", "many")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn csv_report_has_one_row_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let o = poslab(&["run", "--suite", "bracket", "--group", "SO(3,4)", "--samples", "25", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 26);
    assert_eq!(lines[0], "index,pass,margin,note");
}

#[test]
fn sample_then_crossratio_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = dir.path().join("tuple.json");
    let o = poslab(&["sample", "--group", "SL3", "--k", "4", "--seed", "3", "--out", s(&tuple)]);
    assert_eq!(code(&o), 0);
    let flags = read(&tuple)["flags"].as_array().unwrap().clone();
    assert_eq!(flags.len(), 4);

    let quad = dir.path().join("quad.json");
    fs::write(&quad, json!({"x": flags[0], "y": flags[1], "X": flags[2], "Y": flags[3]}).to_string()).unwrap();
    let res = dir.path().join("cr.json");
    let o = poslab(&["crossratio", s(&quad), "--eta", "1:1,2:1", "--out", s(&res)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read(&res);
    for t in ["1", "2"] {
        assert!(v["values"][t].as_f64().unwrap() > 1.0);
    }
    assert_eq!(v["cyclically_positive"], true);
    assert!(v["rebase_residual"].as_f64().unwrap() < 1e-8);
    let b1 = v["values"]["1"].as_f64().unwrap();
    let b2 = v["values"]["2"].as_f64().unwrap();
    let sum = v["forms"][0]["value"].as_f64().unwrap();
    assert!((sum / (b1 * b2) - 1.0).abs() < 1e-9);
}

#[test]
fn crossratio_exact_backend_matches_float() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = dir.path().join("tuple.json");
    assert_eq!(code(&poslab(&["sample", "--group", "SL4", "--seed", "5", "--out", s(&tuple)])), 0);
    let flags = read(&tuple)["flags"].as_array().unwrap().clone();
    let quad = dir.path().join("quad.json");
    fs::write(&quad, json!({"x": flags[0], "y": flags[1], "X": flags[2], "Y": flags[3]}).to_string()).unwrap();
    let f = poslab(&["crossratio", s(&quad)]);
    let e = poslab(&["crossratio", s(&quad), "--backend", "exact"]);
    assert_eq!(code(&f), 0);
    assert_eq!(code(&e), 0);
    let fv: Value = serde_json::from_slice(&f.stdout).unwrap();
    let ev: Value = serde_json::from_slice(&e.stdout).unwrap();
    for (t, x) in fv["values"].as_object().unwrap() {
        let exact = ev["values"][t]["float"].as_f64().unwrap();
        assert!((x.as_f64().unwrap() / exact - 1.0).abs() < 1e-8);
    }
}

#[test]
fn exact_backend_rejects_float_symplectic_flags() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = dir.path().join("tuple.json");
    assert_eq!(code(&poslab(&["sample", "--group", "Sp4", "--seed", "5", "--out", s(&tuple)])), 0);
    let flags = read(&tuple)["flags"].as_array().unwrap().clone();
    let quad = dir.path().join("quad.json");
    fs::write(&quad, json!({"x": flags[0], "y": flags[1], "X": flags[2], "Y": flags[3]}).to_string()).unwrap();
    assert_eq!(code(&poslab(&["crossratio", s(&quad)])), 0);
    assert_eq!(code(&poslab(&["crossratio", s(&quad), "--backend", "exact"])), 2);
}

#[test]
fn malformed_crossratio_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\"x\": 1}").unwrap();
    assert_eq!(code(&poslab(&["crossratio", s(&p)])), 2);
}

#[test]
fn collar_holds_for_sampled_lifts() {
    for group in ["SL3", "Sp4"] {
        let o = poslab(&["collar", "--group", group, "--seed", "9"]);
        assert_eq!(code(&o), 0, "{group}: {}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["holds"], true);
        assert!(v["max_residual"].as_f64().unwrap() < 1.0);
        assert!(v["hyperbolic_baseline"].as_f64().unwrap() > 1.0);
    }
}

#[test]
fn collar_reads_a_sampled_representation() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("rep.json");
    assert_eq!(code(&poslab(&["sample", "--group", "SL4", "--kind", "rep", "--seed", "4", "--out", s(&rep)])), 0);
    let o = poslab(&["collar", "--input", s(&rep)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["holds"], true);
    assert!(v["hyperbolic_baseline"].is_null());
}

#[test]
fn collar_without_a_source_is_a_usage_error() {
    assert_eq!(code(&poslab(&["collar"])), 2);
    assert_eq!(code(&poslab(&["collar", "--group", "SL3", "--embedding", "diagonal"])), 2);
}
