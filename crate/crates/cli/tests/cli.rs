//! Black-box tests of the `qroute` binary: exit codes, file outputs, and
//! the documented subcommand behaviors.

mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

fn qroute(args: &[&str], out_dir: &PathBuf) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qroute"))
        .args(args)
        .arg("--output-dir")
        .arg(out_dir)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("qroute-cli-tests").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Four nodes in range of each other plus the base station: small enough for
/// the genuine QAOA path.
fn write_tiny_instance(dir: &PathBuf) -> PathBuf {
    let json = r#"{
        "nodes": [
            {"id": 0, "x": 5.0, "y": 9.0, "role": "base_station", "energy": "unbounded"},
            {"id": 1, "x": 5.0, "y": 5.0, "role": "cluster_head", "energy": 200.0},
            {"id": 2, "x": 3.0, "y": 3.0, "role": "sensor", "energy": 100.0},
            {"id": 3, "x": 7.0, "y": 3.0, "role": "sensor", "energy": 100.0}
        ],
        "comm_range": 10.0,
        "epsilon": 1.0,
        "area": [10.0, 10.0]
    }"#;
    let path = dir.join("tiny.json");
    std::fs::write(&path, json).unwrap();
    path
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = tmp("gen-det");
    let a = qroute(
        &["generate", "--sensors", "5", "--chs", "1", "--seed", "1", "--out", "a.json"],
        &dir,
    );
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = qroute(
        &["generate", "--sensors", "5", "--chs", "1", "--seed", "1", "--out", "b.json"],
        &dir,
    );
    assert!(b.status.success());
    let fa = std::fs::read(dir.join("a.json")).unwrap();
    let fb = std::fs::read(dir.join("b.json")).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn generate_preset_emits_109_nodes() {
    let dir = tmp("gen-preset");
    let out = qroute(&["generate", "--preset", "paper109", "--seed", "7"], &dir);
    assert!(out.status.success());
    let graph = qroute_core::netmodel::load_instance(&dir.join("instance.json")).unwrap();
    assert_eq!(graph.len(), 109);
}

#[test]
fn invalid_area_exits_with_validation_code() {
    let dir = tmp("gen-bad-area");
    let out = qroute(
        &["generate", "--sensors", "3", "--chs", "1", "--area", "0,-5", "--seed", "1"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("area"));
}

#[test]
fn solve_tiny_instance_runs_real_qaoa() {
    let dir = tmp("solve-tiny");
    let instance = write_tiny_instance(&dir);
    let out = qroute(
        &[
            "solve",
            "--instance",
            instance.to_str().unwrap(),
            "--methods",
            "qaoa,greedy",
            "--p",
            "1",
            "--restarts",
            "3",
            "--max-iters",
            "60",
            "--shots",
            "256",
            "--seed",
            "5",
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3, "header plus one row per method: {csv}");
    assert!(lines[1].starts_with("tiny,qaoa,"));
    assert!(lines[2].starts_with("tiny,greedy,"));
    // Paired comparison shares c_initial (column 3).
    let c1: Vec<&str> = lines[1].split(',').collect();
    let c2: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(c1[2], c2[2]);
    // The QAOA path really ran: a per-cluster result file exists.
    assert!(dir.join("qaoa_cluster0.json").exists());
}

#[test]
fn oversized_cluster_gets_fallback_tag() {
    let dir = tmp("solve-fallback");
    let instance = write_tiny_instance(&dir);
    let out = qroute(
        &[
            "solve",
            "--instance",
            instance.to_str().unwrap(),
            "--methods",
            "qaoa",
            "--n-max-sim",
            "2",
            "--seed",
            "5",
        ],
        &dir,
    );
    assert!(out.status.success());
    let solution = std::fs::read_to_string(dir.join("solution_qaoa.json")).unwrap();
    assert!(solution.contains("classical-fallback"), "{solution}");
}

#[test]
fn compare_prints_paired_table() {
    let dir = tmp("compare");
    let instance = write_tiny_instance(&dir);
    let out = qroute(
        &[
            "compare",
            "--instance",
            instance.to_str().unwrap(),
            "--p",
            "1",
            "--restarts",
            "2",
            "--max-iters",
            "40",
            "--shots",
            "128",
            "--seed",
            "2",
        ],
        &dir,
    );
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("qaoa") && stdout.contains("greedy"));
    assert!(stdout.contains("paired gap"));
}

#[test]
fn cluster_writes_partition_and_dots() {
    let dir = tmp("cluster");
    let out = qroute(
        &["cluster", "--preset", "paper109", "--seed", "3", "--k", "5", "--k-nn", "10"],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("partition.json").exists());
    for i in 0..5 {
        assert!(dir.join(format!("cluster{i}.dot")).exists());
    }
    let partition: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("partition.json")).unwrap())
            .unwrap();
    assert_eq!(partition["k"], 5);
    assert_eq!(partition["assignment"].as_array().unwrap().len(), 109);
    assert!(partition["assignment"][0].is_null(), "base station stays unassigned");
}

#[test]
fn compile_report_single_covers_every_cluster() {
    let dir = tmp("compile-single");
    let instance = write_tiny_instance(&dir);
    let out = qroute(
        &[
            "compile-report",
            "--instance",
            instance.to_str().unwrap(),
            "--strategy",
            "single",
            "--seed",
            "1",
            "--export-qubos",
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("compile_single.json")).unwrap())
            .unwrap();
    let reports = reports.as_array().unwrap();
    assert!(!reports.is_empty());
    for report in reports {
        assert_eq!(report["ebits"], 0);
        assert_eq!(report["strategy"], "single");
    }
    assert!(dir.join("qubo_cluster0.json").exists());
}

#[test]
fn compile_report_rejects_even_distance() {
    let dir = tmp("compile-even-d");
    let out = qroute(
        &["compile-report", "--preset", "paper109", "--strategy", "single", "--d", "2"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn export_dot_writes_role_attributes() {
    let dir = tmp("export-dot");
    let instance = write_tiny_instance(&dir);
    let out = qroute(&["export-dot", "--instance", instance.to_str().unwrap()], &dir);
    assert!(out.status.success());
    let dot = std::fs::read_to_string(dir.join("network.dot")).unwrap();
    assert!(dot.contains("box") && dot.contains("diamond") && dot.contains("circle"));
}

#[test]
fn config_file_with_unknown_keys_is_rejected() {
    let dir = tmp("config-unknown");
    std::fs::write(dir.join("run.json"), r#"{"preset": "paper109", "bogus_key": 1}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qroute"))
        .args(["solve", "--config"])
        .arg(dir.join("run.json"))
        .arg("--output-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));
}

#[test]
fn flags_override_config_file() {
    let dir = tmp("config-override");
    let instance = write_tiny_instance(&dir);
    std::fs::write(
        dir.join("run.json"),
        format!(
            r#"{{"instance": "{}", "seed": 9, "methods": ["greedy"], "qaoa": {{"p": 1}}}}"#,
            instance.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qroute"))
        .args(["solve", "--config"])
        .arg(dir.join("run.json"))
        .args(["--methods", "greedy", "--seed", "9"])
        .arg("--output-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "greedy only: {csv}");
    assert!(!dir.join("solution_qaoa.json").exists());
}

#[test]
fn missing_instance_is_a_validation_error() {
    let dir = tmp("missing-instance");
    let out = qroute(&["solve"], &dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no instance"));
}

#[test]
fn output_dir_env_var_is_honored() {
    let dir = tmp("env-outdir");
    let out = Command::new(env!("CARGO_BIN_EXE_qroute"))
        .args(["generate", "--sensors", "3", "--chs", "1", "--seed", "4"])
        .env("QROUTE_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.join("instance.json").exists());
}
