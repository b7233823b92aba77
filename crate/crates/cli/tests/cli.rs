use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fidelity_bounds::io::read_state;
use serde_json::Value;
use tempfile::TempDir;

fn fidbounds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fidbounds"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

const ZERO: &str = r#"{"dim": 2, "vector": [[1.0, 0.0], [0.0, 0.0]]}"#;
const MIXED: &str = r#"{"dim": 2, "matrix": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]}"#;

#[test]
fn compute_same_state() {
    let dir = TempDir::new().unwrap();
    let rho = write(dir.path(), "rho.json", MIXED);
    let p = rho.to_str().unwrap();
    let out = fidbounds(&["compute", p, p]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    let m = &report["details"]["metrics"];
    assert!((m["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((m["lambda0"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    for rec in report["records"].as_array().unwrap() {
        assert!(rec["gap"].as_f64().unwrap() >= -1e-12, "{rec}");
    }
}

#[test]
fn compute_pure_against_maximally_mixed() {
    let dir = TempDir::new().unwrap();
    let rho = write(dir.path(), "zero.json", ZERO);
    let sigma = write(dir.path(), "mixed.json", MIXED);
    let out = fidbounds(&["compute", rho.to_str().unwrap(), sigma.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    let m = &report["details"]["metrics"];
    assert!((m["fidelity"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((m["lambda0"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    let smax = report["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["bound_id"] == "smax_lower")
        .unwrap();
    assert!(smax["gap"].as_f64().unwrap().abs() < 1e-8);
    assert!(report["details"]["decomposition"]["sigma_hat"].is_object());
    assert_eq!(report["config"]["seed"], fidelity_bounds_cli::DEFAULT_SEED);
    assert!(report["config"]["tolerances"]["proved"].is_number());
}

#[test]
fn compute_rejects_bad_files() {
    let dir = TempDir::new().unwrap();
    let good = write(dir.path(), "good.json", MIXED);
    let ragged = write(
        dir.path(),
        "ragged.json",
        r#"{"dim": 2, "matrix": [[[0.5, 0.0], [0.0, 0.0]], [[0.5, 0.0]]]}"#,
    );
    let out = fidbounds(&["compute", ragged.to_str().unwrap(), good.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 1"));

    let three = write(
        dir.path(),
        "three.json",
        r#"{"dim": 3, "vector": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]}"#,
    );
    let out = fidbounds(&["compute", three.to_str().unwrap(), good.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension mismatch"));

    let out = fidbounds(&[
        "compute",
        good.to_str().unwrap(),
        good.to_str().unwrap(),
        "--lambda-grid",
        "1.5",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_clean_run_writes_csv() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("report.csv");
    let out = fidbounds(&[
        "verify",
        "--samples",
        "200",
        "--all-samples",
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "bound_id,dim,lambda,lhs,rhs,gap,satisfied"
    );
    let per_dim = 200 * (13 + 13 + 2);
    assert_eq!(lines.count(), 3 * per_dim);
}

#[test]
fn verify_fault_injection_exits_two() {
    let out = fidbounds(&["verify", "--samples", "20", "--dim", "2", "--inject-fault"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_candidate_exits_three_and_serializes_states() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("report.json");
    let out = fidbounds(&[
        "verify",
        "--bound",
        "conjecture_path",
        "--dim",
        "3",
        "--samples",
        "500",
        "--tol-candidate",
        "1e-300",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["exit_status"], 3);
    let cand = &report["details"]["candidates"][0];
    for f in cand["files"].as_array().unwrap() {
        let state = read_state::<f64>(f.as_str().unwrap()).unwrap();
        assert_eq!(state.dim(), 3);
    }
}

#[test]
fn verify_rejects_bad_config() {
    for args in [
        &["verify", "--samples", "0"][..],
        &["verify", "--tol-proved", "-1"],
        &["verify", "--lambda-grid", "0.5,2"],
        &["verify", "--bound", "nonsense"],
        &["verify", "--ensemble", "ginibre_full_rank"],
        &["verify", "--format", "xml"],
        &["verify", "--seed", "1", "--random-seed"],
    ] {
        assert_eq!(code(&fidbounds(args)), 1, "{args:?}");
    }
}

#[test]
fn verify_is_reproducible_and_randomizable() {
    let args = [
        "verify",
        "--samples",
        "30",
        "--dim",
        "2,3",
        "--workers",
        "1",
    ];
    let a = json(&fidbounds(&args));
    let mut more = args.to_vec();
    more[6] = "3";
    let b = json(&fidbounds(&more));
    assert_eq!(a["details"]["summaries"], b["details"]["summaries"]);

    let r = json(&fidbounds(&[
        "verify",
        "--samples",
        "5",
        "--dim",
        "2",
        "--random-seed",
    ]));
    assert_eq!(r["config"]["seed_randomized"], true);
    assert!(r["config"]["seed"].is_u64());
}

#[test]
fn search_commands() {
    assert_eq!(code(&fidbounds(&["search", "--restarts", "0"])), 1);
    assert_eq!(code(&fidbounds(&["search", "--bound", "fvdg_lower"])), 1);

    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("search.json");
    let out = fidbounds(&[
        "search",
        "--bound",
        "smax_lower",
        "--dim",
        "3",
        "--restarts",
        "4",
        "--max-iters",
        "300",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let result = &report["details"]["results"][0];
    assert_eq!(result["restarts"], 4);
    assert!(result["best_gap"].as_f64().unwrap() >= -1e-9);
    assert_eq!(result["argmin"]["rho"]["dim"], 3);
}

#[test]
fn landscape_csv_has_overlap_column() {
    let out = fidbounds(&[
        "landscape",
        "--points",
        "11",
        "--lambda",
        "0.3",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "bound_id,dim,lambda,lhs,rhs,gap,satisfied,r");
    assert_eq!(lines.len(), 12);
    assert!(lines[11].ends_with(",1"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&fidbounds(&["--help"])), 0);
    assert_eq!(code(&fidbounds(&["--version"])), 0);
    assert_eq!(code(&fidbounds(&[])), 1);
}
