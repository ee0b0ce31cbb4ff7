use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BAS_CONFIG: &str = r#"
seed = 3
iterations = 4
restarts = 2
shots = 200

[dataset]
kind = "bas"
n = 2
m = 2
size = 200
seed = 77

[circuit]
num_qubits = 4
layers = 2
topology = "chain"
"#;

fn qcbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcbm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("experiment.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn train_writes_traces_and_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BAS_CONFIG);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let res = qcbm(&["train", &config, "--out", out.to_str().unwrap()]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        assert!(stdout(&res).contains("median_final_kl_nats"));
    }
    for name in ["trace_restart_000.csv", "trace_restart_001.csv"] {
        let ta = fs::read_to_string(a.join(name)).unwrap();
        assert_eq!(ta, fs::read_to_string(b.join(name)).unwrap());
        assert!(ta.starts_with("# config_sha256: "));
        assert!(ta.contains("# seeds: base=3 dataset=77 restarts=3..=4"));
        assert_eq!(ta.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4);
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["restarts"].as_array().unwrap().len(), 2);
    assert!(fs::read_to_string(a.join("config.toml")).unwrap().contains("topology = \"chain\""));
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BAS_CONFIG);
    let out = dir.path().join("run");
    let res = qcbm(&["train", &config, "--restarts", "1", "--iterations", "2", "--seed", "10", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    assert!(out.join("trace_restart_000.csv").exists());
    assert!(!out.join("trace_restart_001.csv").exists());
    let trace = fs::read_to_string(out.join("trace_restart_000.csv")).unwrap();
    assert!(trace.contains("# restart: 0 seed: 10"));
}

#[test]
fn validation_failures_exit_nonzero_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &BAS_CONFIG.replace("num_qubits = 4", "num_qubits = 3"));
    let res = qcbm(&["train", &config, "--out", dir.path().to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("circuit.num_qubits"));

    let config = write_config(dir.path(), BAS_CONFIG);
    let res = qcbm(&["train", &config, "--shots", "0", "--out", dir.path().to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("shots"));

    let res = qcbm(&["train", &config]);
    assert!(!res.status.success(), "no output directory given");
}

#[test]
fn qbas_reports_the_best_restart() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BAS_CONFIG);
    let res = qcbm(&["qbas", &config]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&res)).unwrap();
    assert_eq!(v["report"]["num_reads"], 15);
    assert_eq!(v["report"]["scores"].as_array().unwrap().len(), 25);
    assert!(v["restart"].is_u64());
}

#[test]
fn score_shots_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shots.txt");
    let mut text = String::new();
    for _ in 0..10 {
        text.push_str("0000\n0011\n0101\n1010\n1100\n1111\n");
    }
    fs::write(&path, &text).unwrap();
    let res = qcbm(&["score-shots", path.to_str().unwrap(), "--n", "2", "--m", "2"]);
    assert!(res.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&res)).unwrap();
    assert_eq!(v["report"]["precision"], 1.0);
    assert_eq!(v["report"]["scores"].as_array().unwrap().len(), 4);
    assert_eq!(v["mean_score"]["center"], 1.0);

    let res = qcbm(&["qbas", "--shots-file", path.to_str().unwrap(), "--n", "2", "--m", "2"]);
    assert!(res.status.success());

    let res = qcbm(&["score-shots", path.to_str().unwrap(), "--n", "3", "--m", "3"]);
    assert!(!res.status.success());
}

#[test]
fn ghz_verify_passes() {
    let res = qcbm(&["ghz-verify", "--max-qubits", "12"]);
    assert!(res.status.success());
    assert_eq!(stdout(&res).lines().filter(|l| l.contains("ok")).count(), 11);
    assert!(!qcbm(&["ghz-verify", "--max-qubits", "13"]).status.success());
}

#[test]
fn entropy_surface_csv() {
    let res = qcbm(&["entropy-surface", "--points", "8"]);
    assert!(res.status.success());
    let text = stdout(&res);
    assert_eq!(text.lines().next(), Some("v1,v2,entropy_bits"));
    assert_eq!(text.lines().count(), 65);
}

#[test]
fn thermal_suite_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("thermal.csv");
    let res = qcbm(&[
        "thermal-suite",
        "--sizes",
        "3",
        "--temperatures",
        "2,1",
        "--depths",
        "1,3",
        "--instances",
        "3",
        "--iterations",
        "3",
        "--resamples",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("num_qubits,temperature,layers,iteration,median_kl_nats"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 3);
    assert_eq!(stdout(&res).lines().count(), 4);
}
