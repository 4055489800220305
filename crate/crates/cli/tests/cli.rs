// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cayleylab"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .env_remove("CAYLEYLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, cmd: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{cmd}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn group_info_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["group-info", "--family", "sl2", "--q", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "group-info");
    assert_eq!(r["result"]["order"], "120");
    assert_eq!(r["config"]["q"], 5);
    assert!(r["version"].as_str().is_some_and(|v| !v.is_empty()));
}

#[test]
fn cyclic_sweep_is_bipartite() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["spectral-sweep", "--family", "cyclic", "--n", "6"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "spectral-sweep");
    let row = &r["result"][0];
    assert!((row["lambda_abs"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(row["bipartite"], true);
    assert!(dir.path().join("spectral-sweep.csv").exists());
    assert!(std::fs::read_to_string(dir.path().join("spectral-sweep.svg")).unwrap().contains("<polyline"));
    // a demanded gap that the bipartite graph cannot have is a verdict failure
    let out = run(&["spectral-sweep", "--family", "cyclic", "--n", "6", "--min-epsilon", "0.1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pingpong_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["pingpong-cert", "--max-len", "8", "--samples", "100"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "pingpong-cert");
    assert_eq!(r["result"]["certificate"]["all_nontrivial"], true);
    assert_eq!(r["result"]["certificate"]["words_checked"], 4 * (3u64.pow(8) - 1) / 2);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["group-info", "--family", "sl2", "--q", "6"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["group-info", "--family", "e8", "--q", "5"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["nonsense"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["walk-trace", "--q", "5", "--kappa", "1.5"], dir.path()).status.code(), Some(1));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"family": "sl2", "q": 7, "seed": 4}"#).unwrap();
    let out = run(&["group-info", "--config", cfg.to_str().unwrap(), "--q", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "group-info");
    assert_eq!(r["result"]["order"], "120");
    assert_eq!(r["seed"], 4);
}

#[test]
fn reports_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let args = ["spectral-sweep", "--family", "sl2", "--q", "13", "--n-pairs", "3", "--seed", "5", "--max-iter", "300"];
    let mut one = args.to_vec();
    one.extend(["--thread-count", "1"]);
    let mut three = args.to_vec();
    three.extend(["--thread-count", "3"]);
    assert_eq!(run(&one, a.path()).status.code(), Some(0));
    assert_eq!(run(&one, b.path()).status.code(), Some(0));
    assert_eq!(run(&three, c.path()).status.code(), Some(0));
    let csv = |d: &Path| std::fs::read_to_string(d.join("spectral-sweep.csv")).unwrap();
    assert_eq!(csv(a.path()), csv(b.path()));
    let (ra, rc) = (report(a.path(), "spectral-sweep"), report(c.path(), "spectral-sweep"));
    for (x, y) in ra["result"].as_array().unwrap().iter().zip(rc["result"].as_array().unwrap()) {
        for key in ["lambda_abs", "lambda_upper", "residual"] {
            assert!((x[key].as_f64().unwrap() - y[key].as_f64().unwrap()).abs() <= 1e-9);
        }
    }
}

#[test]
fn other_commands_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(&["walk-trace", "--family", "sl2", "--q", "7", "--n-max", "60"], d).status.code(), Some(0));
    let r = report(d, "walk-trace");
    assert!(r["result"]["n1"].as_u64().is_some());
    assert!(d.join("walk-trace.svg").exists());

    assert_eq!(run(&["bsg-audit", "--family", "sl2", "--q", "5", "--radius", "2"], d).status.code(), Some(0));
    assert_eq!(report(d, "bsg-audit")["result"].as_array().unwrap().len(), 2);

    assert_eq!(run(&["sz-audit", "--samples", "50"], d).status.code(), Some(0));
    let csv = std::fs::read_to_string(d.join("sz-audit.csv")).unwrap();
    assert!(csv.starts_with("poly_id,D,q,count,bound,ratio"));

    let corpus = d.join("corpus.json");
    std::fs::write(&corpus, r#"{"p": 7, "k": 1, "polys": [{"variables": 2, "terms": [[1, [1, 1]], [6, [0, 0]]]}]}"#)
        .unwrap();
    let out = run(&["sz-audit", "--corpus", corpus.to_str().unwrap(), "--d", "2"], d);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(d.join("sz-audit.csv")).unwrap().contains("0,2,7,6,"));

    let out = run(&["nonconc", "--family", "sl2", "--q", "7", "--n-pairs", "1", "--samples", "500"], d);
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    assert!(report(d, "nonconc")["result"][0].as_array().is_some());
}
