use std::process::{Command, Output};

use serde_json::Value;

fn polya(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polya")).args(args).output().expect("run polya")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn analyze_imaginary_quadratic() {
    let o = polya(&["analyze", "--field", "Q(sqrt -5)", "--base", "Q", "--S", "oo"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["field"], "Q(sqrt -5)");
    assert_eq!(v["S"], "oo");
    assert_eq!(v["groups"]["po"]["order"], 2);
    assert_eq!(v["groups"]["po"]["invariant_factors"], serde_json::json!([2]));
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["verdict"] == "pass"));
    assert!(checks.iter().any(|c| c["name"] == "brz_exact" && c["lhs"] == 4 && c["rhs"] == 4));
}

#[test]
fn analyze_relative_extension() {
    let o = polya(&["analyze", "--field", "Q(sqrt -1, sqrt 5)", "--base", "sub=-5", "--S", "oo"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["base"], "Q(sqrt -5)");
    assert_eq!(v["groups"]["ost"]["order"], 1);
    assert_eq!(v["groups"]["ker_eps"]["invariant_factors"], serde_json::json!([2]));
}

#[test]
fn analyze_rejects_bad_fields() {
    let o = polya(&["analyze", "--field", "Q(sqrt 12)"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("squarefree"));
    let o = polya(&["analyze", "--field", "Q(sqrt -5)", "--S", "oo,(2,3)"]);
    assert_eq!(o.status.code(), Some(2));
    let o = polya(&["analyze", "--field", "Q(sqrt -5)", "--nosuchflag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_csv_and_out_file() {
    let dir = std::env::temp_dir().join(format!("polya-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.csv");
    let o = polya(&["analyze", "--field", "Q(sqrt 3)", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# polya-checks v1\n"));
    assert!(text.contains("brz_exact,\"4\",\"4\",pass"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scan_small_range() {
    let o = polya(&["scan", "--range", "50", "--S", "oo"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# polya-scan v1\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 61);
    assert!(rows[0].starts_with("-47,"));
    assert!(rows.iter().all(|r| r.ends_with("pass,pass,n/a,pass,pass")));
    // byte-identical on a rerun
    assert_eq!(polya(&["scan", "--range", "50", "--S", "oo"]).stdout, o.stdout);
}

#[test]
fn scan_with_two_in_s() {
    let a = stdout(&polya(&["scan", "--range", "-10..10", "--S", "oo"]));
    let b = stdout(&polya(&["scan", "--range", "-10..10", "--S", "oo,2"]));
    let (ra, rb) = (data_rows(&a), data_rows(&b));
    assert_eq!(ra.len(), rb.len());
    let ds = |rows: &[&str]| rows.iter().map(|r| r.split(',').next().unwrap().to_string()).collect::<Vec<_>>();
    assert_eq!(ds(&ra), ds(&rb));
    // d = -5: 2 ramifies, so the S-class group and the S-Polya group shrink
    let row = rb.iter().find(|r| r.starts_with("-5,")).unwrap();
    assert!(row.starts_with("-5,\"oo,2\",2,1,2,2,1,"));
    let row = ra.iter().find(|r| r.starts_with("-5,")).unwrap();
    assert!(row.starts_with("-5,\"oo\",2,2,2,4,2,"));
}

#[test]
fn scan_empty_range_is_header_only() {
    let o = polya(&["scan", "--range", "4..4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(data_rows(&text).is_empty());
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn verify_suites() {
    let o = polya(&["verify", "golden"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("checks pass"));
    let o = polya(&["verify", "boundary", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o).as_array().is_some_and(|a| !a.is_empty()));
    let o = polya(&["verify", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
}
