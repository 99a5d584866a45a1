use std::path::Path;
use std::process::{Command, Output};

use clap::Parser;
use euclid_cli::args::Cli;
use euclid_cli::config::{Command as Cmd, RunConfig};
use euclid_cli::output::{read_config, CONFIG_PREFIX};

fn euclid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_euclid")).args(args).output().unwrap()
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, String, Vec<String>) {
    let path = dir.join(name);
    let path = path.to_str().unwrap().to_string();
    let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    full.extend(["--out".into(), path.clone()]);
    let refs: Vec<&str> = full.iter().map(String::as_str).collect();
    let out = euclid(&refs);
    let text = std::fs::read_to_string(&path).unwrap_or_default();
    (out, text, full)
}

fn csv_body(text: &str) -> Vec<Vec<String>> {
    let body = text.lines().skip(1).collect::<Vec<_>>().join("\n");
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

fn cell(text: &str, row: usize, col: &str) -> String {
    let body = text.lines().skip(1).collect::<Vec<_>>().join("\n");
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let idx = rdr.headers().unwrap().iter().position(|h| h == col).unwrap();
    rdr.records().nth(row).unwrap().unwrap()[idx].to_string()
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["moments", "--grid", "100,400", "--kind", "all", "--workers", "2"],
        &["spectrum", "--s", "1:1.5:0.25", "--t", "0,0.5", "--workers", "2"],
        &["constants", "--seed", "7", "--workers", "2"],
        &["census", "--n", "300", "--pmax", "6", "--workers", "2", "--format", "json"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let (a, first, _) = run_to(dir.path(), &format!("{i}.a"), args);
        let (b, second, _) = run_to(dir.path(), &format!("{i}.a"), args);
        assert!(a.status.success() && b.status.success(), "{args:?}");
        assert!(!first.is_empty());
        assert_eq!(first.as_bytes(), second.as_bytes(), "{args:?}");
    }
}

#[test]
fn worker_count_only_changes_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["moments", "--grid", "50,300", "--pmax", "6"];
    let (_, one, _) = run_to(dir.path(), "w1.csv", &[&base[..], &["--workers", "1"]].concat());
    let (_, three, _) = run_to(dir.path(), "w3.csv", &[&base[..], &["--workers", "3"]].concat());
    assert_eq!(csv_body(&one), csv_body(&three));
    assert_ne!(one.lines().next(), three.lines().next());
}

#[test]
fn header_echo_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let cost = dir.path().join("cost.json");
    std::fs::write(&cost, r#"{"table": [2.0, 0.5], "tail": 1.0}"#).unwrap();
    let cost = cost.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["constants", "--cost", cost, "--M", "24", "--nmax", "5000", "--workers", "1"],
        vec!["moments", "--n", "200", "--kind", "all", "--pmax", "3", "--workers", "1", "--format", "json"],
        vec!["verify", "depth", "--s", "1.3+0.2i", "--omega", "-0.05", "--digit-bound", "6", "--workers", "1"],
        vec!["spectrum", "--s", "1.1", "--omega", "-0.1,0.1", "--radius", "0.45", "--workers", "1"],
        vec!["census", "--grid", "20,40", "--reference", "log-v-over-gcd", "--cost", r#"{"tail":2}"#, "--workers", "1"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let (status, text, full) = run_to(dir.path(), &format!("echo{i}"), args);
        assert!(status.status.success(), "{args:?}: {}", String::from_utf8_lossy(&status.stderr));
        let echoed = read_config(&text).unwrap();
        let expected = RunConfig::resolve(&Cli::parse_from(std::iter::once("euclid").chain(full.iter().map(String::as_str)))).unwrap();
        assert_eq!(echoed, expected, "{args:?}");
        assert_eq!(echoed.log_base, "e");
    }
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["census", "--grid", "30,90", "--pmax", "3", "--workers", "1"];
    let (_, csv_text, _) = run_to(dir.path(), "c.csv", &args);
    let (_, json_text, _) = run_to(dir.path(), "c.json", &[&args[..], &["--format", "json"]].concat());
    assert!(csv_text.starts_with(CONFIG_PREFIX));
    let doc: serde_json::Value = serde_json::from_str(&json_text).unwrap();
    let result = doc["result"].as_array().unwrap();
    assert_eq!(result.len(), 2);
    for (i, acc) in result.iter().enumerate() {
        assert_eq!(acc["count"].as_u64().unwrap().to_string(), cell(&csv_text, i, "count"));
        let s2 = acc["power_sums"][2].as_f64().unwrap();
        assert_eq!(s2, cell(&csv_text, i, "S_2").parse::<f64>().unwrap());
    }
}

#[test]
fn constants_examples() {
    let out = euclid(&["constants", "--format", "csv", "--workers", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let value = |name: &str| -> f64 {
        let row = csv_body(&text).into_iter().find(|r| r[0] == name).unwrap();
        row[1].parse().unwrap()
    };
    assert!((value("mu") - 0.8427659).abs() < 1e-7);
    assert!((value("entropy") - 2.3731382).abs() < 1e-7);
    assert!((value("sigma2") - 0.516062).abs() < 1e-5);
    let ind = euclid(&["constants", "--cost", r#"{"table":[1],"tail":0}"#, "--workers", "1"]);
    let doc: serde_json::Value = serde_json::from_slice(&ind.stdout).unwrap();
    assert!((doc["result"]["mu"].as_f64().unwrap() - 0.3497795).abs() < 1e-7);
}

#[test]
fn failures_exit_nonzero() {
    let zero = euclid(&["constants", "--cost", r#"{"table":[0,0],"tail":0}"#]);
    assert!(!zero.status.success());
    assert!(String::from_utf8_lossy(&zero.stderr).contains("cost identically zero"));
    let missing = euclid(&["constants", "--cost", "/nonexistent/cost.json"]);
    assert!(!missing.status.success());
    let bad_p = euclid(&["verify", "dp", "--p", "3", "--n", "100"]);
    assert!(!bad_p.status.success());
    // a four-term basis cannot meet the depth identity tolerance
    let coarse = euclid(&["verify", "depth", "--M", "4", "--format", "csv"]);
    assert_eq!(coarse.status.code(), Some(1));
    let text = String::from_utf8(coarse.stdout).unwrap();
    assert_eq!(cell(&text, 0, "passed"), "false");
    assert!(String::from_utf8_lossy(&coarse.stderr).contains("FAIL"));
    let small = euclid(&["moments", "--grid", "2,100"]);
    assert!(!small.status.success());
}

#[test]
fn verify_examples() {
    let depth = euclid(&["verify", "depth", "--depth", "2", "--digit-bound", "10", "--format", "csv"]);
    assert!(depth.status.success());
    let text = String::from_utf8(depth.stdout).unwrap();
    assert!(cell(&text, 0, "abs_gap").parse::<f64>().unwrap() < 1e-10);
    let series = euclid(&["verify", "series", "--s", "1.01", "--n", "2000", "--format", "csv"]);
    assert!(series.status.success(), "{}", String::from_utf8_lossy(&series.stderr));
}

#[test]
fn spectrum_examples() {
    let out = euclid(&["spectrum", "--s", "0.9:2:0.1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = csv_body(&text);
    assert_eq!(rows.len(), 12);
    let l1: Vec<f64> = (0..rows.len()).map(|i| cell(&text, i, "lambda1_abs").parse().unwrap()).collect();
    assert!(l1.windows(2).all(|w| w[1] < w[0]));
    assert!(l1[0] > 1.0 && (l1[1] - 1.0).abs() < 1e-8 && l1[2] < 1.0);
    let critical = euclid(&["spectrum", "--s", "1", "--t", "0.1:2:0.1"]);
    let text = String::from_utf8(critical.stdout).unwrap();
    let n = csv_body(&text).len();
    assert_eq!(n, 20);
    for i in 0..n {
        assert!(cell(&text, i, "lambda1_abs").parse::<f64>().unwrap() < 1.0);
        assert_eq!(cell(&text, i, "status"), "ok");
    }
    let empty = euclid(&["spectrum", "--s", ""]);
    let text = String::from_utf8(empty.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("s_re,"));
}

#[test]
fn moments_layout() {
    let out = euclid(&["moments", "--grid", "100,1000", "--pmax", "8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().nth(1).unwrap();
    let expected: Vec<String> = ["n", "count", "mean", "variance", "ks_distance"]
        .into_iter()
        .map(String::from)
        .chain((1..=8).map(|p| format!("m_{p}")))
        .collect();
    assert_eq!(header, expected.join(","));
    let cfg = read_config(&text).unwrap();
    assert!(matches!(cfg.command, Cmd::Moments { p_max: 8, .. }));
}
