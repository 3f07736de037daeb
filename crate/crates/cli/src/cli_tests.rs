//! Whole-command-line runs through [`run_command_line`], writing into temp dirs.

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::report::sibling;
use crate::run_command_line;

fn run(args: &[&str]) -> i32 {
    let mut v = vec!["collectikit"];
    v.extend_from_slice(args);
    run_command_line(v)
}

fn run_to(dir: &Path, file: &str, args: &[&str]) -> (i32, PathBuf) {
    let out = dir.join(file);
    let mut v: Vec<&str> = args.to_vec();
    let out_s = out.to_str().unwrap().to_string();
    v.extend_from_slice(&["--out", &out_s]);
    (run(&v), out)
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["--version"]), 0);
}

#[test]
fn invalid_input_exits_one() {
    for bad in [
        &["nonsense"][..],
        &["table1", "--P", "2"],
        &["table1", "--P", "-0.5"],
        &["table1", "--state", "werner:1.5"],
        &["table1", "--state", "ghz"],
        &["table1", "--policy", "max"],
        &["setup-sim", "--setup", "fig9"],
        &["simulate-counts", "--bootstrap", "1"],
        &["simulate-counts", "--pairs", "0"],
        &["table1", "--format", "xml"],
    ] {
        assert_eq!(run(bad), 1, "{bad:?}");
    }
}

#[test]
fn io_failures_exit_three() {
    assert_eq!(run(&["table1", "--config", "/nonexistent/run.json"]), 3);
    let code = run(&[
        "table1",
        "--pairs",
        "100",
        "--out",
        "/nonexistent/dir/out.csv",
    ]);
    assert_eq!(code, 3);
}

#[test]
fn werner_sweep_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(
        dir.path(),
        "sweep.csv",
        &["werner-sweep", "--pairs", "1000", "--bootstrap", "20"],
    );
    assert_eq!(code, 0);
    let rows = lines(&out);
    assert_eq!(
        rows[0],
        "p,W_exact,W_interp,W_sim,sigma,sigma_kind,n_pairs,published_w_th,published_w,published_sigma"
    );
    assert_eq!(rows.len(), 102);
    assert!(rows[101].starts_with("1,-0.25,-0.25,"));
    assert!(std::fs::read(&out).unwrap().ends_with(b"\n"));
    let threshold = lines(&sibling(&out, "threshold"));
    assert_eq!(threshold[0], "source,w_bell,w_mixed,p_star");
    assert_eq!(threshold[2], "published,-0.25,0.75,0.8660254037844386");
}

#[test]
fn quality_scan_writes_inf() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "q.csv", &["quality-scan"]);
    assert_eq!(code, 0);
    let rows = lines(&out);
    let r_col = rows[0].split(',').position(|c| c == "R_dephased").unwrap();
    let pure: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(&pure[..2], &["pure", "pure"]);
    assert_eq!(pure[r_col], "inf");
    let scan = lines(&sibling(&out, "phase_scan"));
    assert_eq!(scan[0], "rho_p,rho_s,phi,cc");
    assert_eq!(scan.len(), 1 + 4 * 64);
    assert!(sibling(&out, "ratio_curve").exists());
}

#[test]
fn json_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(
        dir.path(),
        "q.json",
        &["quality-scan", "--format", "json", "--visibility", "0.5"],
    );
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["experiment"], "quality-scan");
    assert_eq!(v["config"]["visibility"], 0.5);
    let quality = &v["tables"][0];
    assert_eq!(quality["name"], "quality");
    let r = quality["columns"]
        .as_array()
        .unwrap()
        .iter()
        .position(|c| c == "R_dephased")
        .unwrap();
    assert_eq!(quality["rows"][0][r], "inf");
    let three = quality["rows"][1][r].as_f64().unwrap();
    assert!((three - 3.0).abs() < 1e-9);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": "table1", "seed": 11, "pairs": 500, "bootstrap": 30, "format": "json"}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let (code, out) = run_to(
        dir.path(),
        "a.json",
        &["table1", "--config", cfg, "--seed", "12"],
    );
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 12);
    assert_eq!(v["config"]["pairs"], 500);
    assert_eq!(v["config"]["bootstrap"], 30);
    let notes = v["notes"].as_array().unwrap();
    assert!(notes
        .iter()
        .any(|n| n.as_str().unwrap().starts_with("mixed")));
}

#[test]
fn replays_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate-counts",
        "--state",
        "werner:0.9",
        "--pairs",
        "20000",
        "--seed",
        "3",
    ];
    let (_, a) = run_to(dir.path(), "a.csv", &args);
    let (_, b) = run_to(dir.path(), "b.csv", &args);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(sibling(&a, "estimate")).unwrap(),
        std::fs::read(sibling(&b, "estimate")).unwrap()
    );
    let (_, c) = run_to(
        dir.path(),
        "c.csv",
        &[
            "simulate-counts",
            "--state",
            "werner:0.9",
            "--pairs",
            "20000",
            "--seed",
            "4",
        ],
    );
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn setup_sim_separable_is_dark() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "s.csv", &["setup-sim", "--state", "separable"]);
    assert_eq!(code, 0);
    for row in &lines(&out)[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        let optical: f64 = cells[1].parse().unwrap();
        assert!(optical.abs() < 1e-12, "{row}");
    }
}

#[test]
fn table1_single_state() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(
        dir.path(),
        "t.csv",
        &[
            "table1",
            "--state",
            "bell",
            "--pairs",
            "1000",
            "--bootstrap",
            "10",
        ],
    );
    assert_eq!(code, 0);
    let rows = lines(&out);
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("bell,0.5,cond-sym,-0.25,"));
}
