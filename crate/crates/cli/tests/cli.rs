use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BV: &str = r#"OPENQASM 2.0;
include "qelib1.inc";
qreg q[4];
creg c[3];
x q[3];
h q;
cx q[0],q[3];
cx q[2],q[3];
h q[0];
h q[1];
h q[2];
measure q[0] -> c[0];
measure q[1] -> c[1];
measure q[2] -> c[2];
"#;

fn qcloak(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcloak"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn setup() -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bv.qasm"), BV).unwrap();
    dir
}

#[test]
fn full_flow_restores_the_secret() {
    let dir = setup();
    let d = dir.path();
    let ok = |args: &[&str]| {
        let out = qcloak(d, args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    // Flip classical bit 1 and swap bits 0 and 2, so corruption is certain.
    fs::write(d.join("plan.json"), r#"[{"index":0,"qubits":[1]},{"index":2,"qubits":[0,2]}]"#).unwrap();
    ok(&["obfuscate", "--in", "bv.qasm", "--plan", "plan.json", "--out", "obf.qasm", "--key", "key.txt"]);
    assert_eq!(fs::read_to_string(d.join("key.txt")).unwrap(), "2#0|2@0#1\n");
    ok(&["transpile", "--in", "obf.qasm", "--out", "compiled.qasm"]);
    ok(&["simulate", "--in", "compiled.qasm", "--shots", "256", "--seed", "3", "--out", "obf_counts.json"]);
    ok(&["correct", "--counts", "obf_counts.json", "--key", "key.txt", "--in", "obf.qasm", "--out", "fixed.json"]);
    ok(&["simulate", "--in", "bv.qasm", "--shots", "256", "--out", "orig.json"]);

    let fixed: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("fixed.json")).unwrap()).unwrap();
    assert_eq!(fixed["counts"]["101"], 256);
    let obf: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("obf_counts.json")).unwrap()).unwrap();
    assert_eq!(obf["counts"]["111"], 256);

    ok(&["evaluate", "--orig", "orig.json", "--obfus", "obf_counts.json", "--correct-output", "101", "--out", "m.json"]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("m.json")).unwrap()).unwrap();
    assert_eq!(report["tvd"], 1.0);
    assert_eq!(report["dfc"], -1.0);
}

#[cfg(unix)]
#[test]
fn key_file_is_private() {
    use std::os::unix::fs::PermissionsExt;
    let dir = setup();
    let out = qcloak(dir.path(), &["obfuscate", "--in", "bv.qasm", "--seed", "1", "--out", "o.qasm", "--key", "k"]);
    assert_eq!(code(&out), 0);
    let mode = fs::metadata(dir.path().join("k")).unwrap().permissions().mode();
    assert_eq!(mode & 0o077, 0);
    assert!(!String::from_utf8_lossy(&out.stderr).contains("world-readable"));
}

#[cfg(unix)]
#[test]
fn warns_on_world_readable_key() {
    use std::os::unix::fs::PermissionsExt;
    let dir = setup();
    let key = dir.path().join("k");
    fs::write(&key, "").unwrap();
    fs::set_permissions(&key, fs::Permissions::from_mode(0o644)).unwrap();
    let out = qcloak(dir.path(), &["obfuscate", "--in", "bv.qasm", "--out", "o.qasm", "--key", "k"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("world-readable"));
}

#[test]
fn parse_errors_exit_two_with_positions() {
    let dir = setup();
    fs::write(dir.path().join("bad.qasm"), "OPENQASM 2.0;\nqreg q[2];\nv q[0];\nfoo q[1];\n").unwrap();
    let out = qcloak(dir.path(), &["transpile", "--in", "bad.qasm"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.qasm:3:1"), "{err}");
    assert!(err.contains("bad.qasm:4:1"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    let dir = setup();
    assert_eq!(code(&qcloak(dir.path(), &["obfuscate", "--in", "bv.qasm"])), 1);
    assert_eq!(code(&qcloak(dir.path(), &["bench", "--algo", "nope", "--out-dir", "x"])), 1);
    assert_eq!(code(&qcloak(dir.path(), &["transpile", "--in", "missing.qasm"])), 1);
    assert_eq!(code(&qcloak(dir.path(), &["--help"])), 0);
}

#[test]
fn validation_errors_exit_two() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("key.txt"), "9#0\n").unwrap();
    fs::write(d.join("c.json"), r#"{"shots":1,"counts":{"000":1}}"#).unwrap();
    let out = qcloak(d, &["correct", "--counts", "c.json", "--key", "key.txt", "--in", "bv.qasm"]);
    assert_eq!(code(&out), 2);
    let out = qcloak(d, &["transpile", "--in", "bv.qasm", "--basis", "rz,rx"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bench_writes_summary_and_trials() {
    let dir = setup();
    let out = qcloak(
        dir.path(),
        &["bench", "--algo", "all", "--trials", "4", "--shots", "128", "--seed", "9", "--out-dir", "res"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let res = dir.path().join("res");
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(res.join("summary.json")).unwrap()).unwrap();
    let rows = summary.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for row in rows {
        assert_eq!(row["trials"], 4);
        assert_eq!(row["correction_soundness"], true);
        let name = row["algorithm"].as_str().unwrap();
        let csv = fs::read_to_string(res.join(name).join("trials.csv")).unwrap();
        assert_eq!(csv.lines().next(), Some("trial,tvd,dfc,key"));
        assert_eq!(csv.lines().count(), 5);
    }
}
