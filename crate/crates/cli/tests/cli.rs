//! End-to-end checks of the command-line surface: file formats, exit codes,
//! and report shapes.

use std::path::Path;
use std::process::Command;

fn oscbound() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oscbound"))
}

fn write_grid(dir: &Path) -> std::path::PathBuf {
    // 1-D grid (4, 0, 0, 0) on [0, 1).
    let path = dir.join("g.oscg");
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"OSCG");
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.extend_from_slice(&4u32.to_le_bytes());
    bytes.extend_from_slice(&0.25f64.to_le_bytes());
    bytes.extend_from_slice(&0.0f64.to_le_bytes());
    for v in [4.0f64, 0.0, 0.0, 0.0] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(&path, bytes).unwrap();
    path
}

#[test]
fn rearrange_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_grid(dir.path());
    let csv = dir.path().join("fstar.csv");
    let json = dir.path().join("fstar.json");
    let status = oscbound()
        .args(["rearrange", "--input"])
        .arg(&input)
        .arg("--out-csv")
        .arg(&csv)
        .arg("--out-json")
        .arg(&json)
        .status()
        .unwrap();
    assert!(status.success());
    let content = std::fs::read_to_string(&csv).unwrap();
    assert!(content.starts_with("breakpoint,value\n0,4\n"));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(parsed["values"][0], 4.0);
}

#[test]
fn oscillation_reports_seminorm() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_grid(dir.path());
    let out = dir.path().join("osc.json");
    let status = oscbound()
        .args(["oscillation", "--basis", "cubes", "--refine", "--input"])
        .arg(&input)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // Best interval for (4,0,0,0) is [0, 1/2) with oscillation 2.
    assert!((parsed["seminorm"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(parsed["shapes_scanned"], 10);
}

#[test]
fn czd_validates_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_grid(dir.path());
    for method in ["dyadic", "bisection", "risingsun"] {
        let out = dir.path().join(format!("czd_{method}.json"));
        let status = oscbound()
            .args(["czd", "--method", method, "--t", "0.5", "--input"])
            .arg(&input)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success(), "{method} failed");
        let parsed: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(
            parsed["validation"]["first_violation"],
            serde_json::Value::Null
        );
        assert!((parsed["gamma"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    }
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("ratios.csv");
    let status = oscbound()
        .args([
            "verify",
            "--suite",
            "hardy-littlewood",
            "--dim",
            "1",
            "--grid",
            "64",
            "--trials",
            "10",
            "--seed",
            "3",
        ])
        .arg("--out")
        .arg(&out)
        .arg("--csv")
        .arg(&csv)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(parsed["verdict"], "pass");
    assert_eq!(parsed["trials"].as_array().unwrap().len(), 10);
    assert!(std::fs::read_to_string(&csv)
        .unwrap()
        .starts_with("trial,lhs,rhs,ratio,pass"));

    // Unknown suites are usage errors: exit code 2.
    let status = oscbound()
        .args(["verify", "--suite", "nonsense", "--out"])
        .arg(dir.path().join("x.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn corpus_generates_loadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let status = oscbound()
        .args([
            "corpus", "--dim", "1", "--grid", "32", "--seed", "4", "--count", "3",
        ])
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let n = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(n, 3);
}

#[test]
fn constants_table_prints() {
    let output = oscbound()
        .args(["constants", "--dim", "2"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(parsed[0]["rearrangement_bound"], 6.0);
}
