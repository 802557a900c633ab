//! End-to-end checks of the binary: subcommand wiring, exit codes, trace
//! determinism through the CLI, and file-format ingestion.

use std::path::Path;
use std::process::{Command, Output};

fn qils(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qils"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// JSONL with wall_time_ms stripped from every line.
fn canonical(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let mut out = String::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let mut value: serde_json::Value = serde_json::from_str(line).unwrap();
        if let Some(map) = value.as_object_mut() {
            map.remove("wall_time_ms");
        }
        out.push_str(&value.to_string());
        out.push('\n');
    }
    out
}

#[test]
fn solve_is_deterministic_across_invocations() {
    // Same output path both times: the header echoes the full config,
    // path included, so the configs must be truly identical.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.jsonl");
    let mut captures = Vec::new();
    for _ in 0..2 {
        let out = qils(&[
            "solve",
            "--algorithm",
            "kaczmarz",
            "--n",
            "8",
            "--steps",
            "12",
            "--seed",
            "1",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        captures.push(canonical(&path));
    }
    assert_eq!(captures[0], captures[1]);
    // Header + initial record + 12 step records.
    assert_eq!(captures[0].lines().count(), 14);
}

#[test]
fn cd_run_over_cap_is_refused() {
    let out = qils(&["solve", "--algorithm", "cd", "--steps", "20", "--n", "8"]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("amplitude"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn verify_quick_exits_zero() {
    let out = qils(&["verify", "--quick"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("PASS").count(), 10);
    assert!(text.contains("10/10 checks passed"));
}

#[test]
fn json_matrix_ingestion_and_readout() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("sys.json");
    std::fs::write(
        &sys,
        r#"{"n": 4, "rows": [[2,0,0,0],[0,1,0,0],[0,0,3,0],[0,0,0,1]], "b": [1.2, 0.5, -0.3, 0.25]}"#,
    )
    .unwrap();
    let probe = dir.path().join("c.txt");
    std::fs::write(&probe, "1.0\n0.0\n0.0\n0.0\n").unwrap();
    let out = qils(&[
        "readout",
        "--probe",
        probe.to_str().unwrap(),
        "--mode",
        "sampled",
        "--epsilon",
        "0.1",
        "--algorithm",
        "kaczmarz",
        "--input",
        sys.to_str().unwrap(),
        "--steps",
        "6",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("exact overlap:"));
    assert!(text.contains("sampled overlap:"));
    assert!(text.contains("shots:"));
}

#[test]
fn matrix_market_ingestion_requires_rhs() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("a.mtx");
    std::fs::write(
        &mtx,
        "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 2 1.0\n",
    )
    .unwrap();
    let out = qils(&[
        "solve",
        "--algorithm",
        "classical-kaczmarz",
        "--input",
        mtx.to_str().unwrap(),
        "--steps",
        "5",
    ]);
    assert!(!out.status.success());

    let rhs = dir.path().join("b.txt");
    std::fs::write(&rhs, "0.5\n0.25\n").unwrap();
    let out = qils(&[
        "solve",
        "--algorithm",
        "classical-kaczmarz",
        "--input",
        mtx.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
        "--steps",
        "5",
        "--x0",
        "zero",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"algorithm":"cd","problem":{{"kind":"random-consistent","n":4,"seed":5}},"steps":4,"seed":5,"output":{:?}}}"#,
            trace.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = qils(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(trace.exists());
    // Header + initial record + 4 step records.
    assert_eq!(canonical(&trace).lines().count(), 6);
}

#[test]
fn bench_prints_a_table() {
    let out = qils(&[
        "bench",
        "--algorithm",
        "kaczmarz",
        "--n",
        "4",
        "--steps",
        "6",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("amplitudes"));
    assert!(text.lines().count() >= 7);
}

#[test]
fn state_dump_is_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("state.json");
    let out = qils(&[
        "solve",
        "--algorithm",
        "kaczmarz",
        "--n",
        "4",
        "--steps",
        "3",
        "--dump-state",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(value["q"], 3);
    assert_eq!(value["dim_sys"], 4);
    assert!(!value["blocks"].as_array().unwrap().is_empty());
}

#[test]
fn top_level_help_lists_subcommands() {
    let out = qils(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for sub in ["solve", "classical", "verify", "bench", "readout"] {
        assert!(text.contains(sub), "help missing '{sub}': {text}");
    }
}

#[test]
fn unknown_algorithm_fails_with_the_available_list() {
    let out = qils(&["solve", "--algorithm", "grover", "--n", "4", "--steps", "1"]);
    assert!(!out.status.success());
    let text = stderr(&out);
    assert!(text.contains("kaczmarz"), "stderr: {text}");
    assert!(text.contains("classical-cd"));
}
