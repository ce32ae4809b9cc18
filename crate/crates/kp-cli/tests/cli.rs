use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kp(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kp"))
        .args(args)
        .env("KP_CACHE_DIR", cache)
        .env("RUST_LOG", "warn")
        .output()
        .expect("kp runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(cache: &Path, args: &[&str]) -> String {
    let o = kp(cache, args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    stdout(&o)
}

#[test]
fn correlator_examples() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ok(dir.path(), &["correlator", "2"]), "1/24 + 1/2*N^2\n");
    assert_eq!(ok(dir.path(), &["correlator", "0", "1"]), "N\n");
    assert_eq!(ok(dir.path(), &["correlator", "1"]), "0\n");
    assert_eq!(ok(dir.path(), &["correlator", "--no-stability", "1", "0"]), "N\n");
    let v: Value = serde_json::from_str(&ok(dir.path(), &["correlator", "2", "2", "--format", "json"])).unwrap();
    assert_eq!(v["d"], serde_json::json!([2, 2]));
    assert_eq!(v["value"]["coeffs"], serde_json::json!([["1", "24"], ["0", "1"], ["1", "2"]]));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["correlator"][..],
        &["correlator", "-1"],
        &["table", "7", "3"],
        &["ppoly", "2", "0", "1"],
        &["check", "--suite", "nope"],
        &["frobnicate"],
    ] {
        assert_eq!(kp(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn compute_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = kp(dir.path(), &["correlator", "0", "0", "0", "0", "0", "0", "0", "0", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not computed"));
}

#[test]
fn table_formats_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    ok(dir.path(), &["table", "3", "4", "--out", out.to_str().unwrap()]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["schema"], "kp-open-intersection/v1");
    assert_eq!(doc["n"], 3);
    let entries = doc["entries"].as_array().unwrap();
    let ds: Vec<Vec<u64>> = entries
        .iter()
        .map(|e| e["d"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect())
        .collect();
    let mut sorted = ds.clone();
    sorted.sort();
    assert_eq!(ds, sorted);
    assert_eq!(ds[0], vec![0, 0, 0]);
    let mut names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["ppoly-v1.json", "t.json"]);

    let csv = ok(dir.path(), &["table", "3", "4", "--format", "csv"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("d1,d2,d3,value"));
    assert_eq!(lines.count(), entries.len());
    assert!(csv.contains("\n0,0,0,1\n"));

    let md = ok(dir.path(), &["table", "3", "4", "--format", "markdown"]);
    assert_eq!(md.lines().count(), entries.len() + 2);
    assert!(md.contains("| 0, 0, 0 | 1 |"));
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok(dir.path(), &["--no-cache", "table", "4", "3"]);
    let b = ok(dir.path(), &["--jobs", "1", "--no-cache", "table", "4", "3"]);
    assert_eq!(a, b);
}

#[test]
fn ppoly_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    for (a, b) in [("-1", "-1"), ("0", "1"), ("1", "-1")] {
        let p = ok(dir.path(), &["ppoly", a, b, "6"]);
        let h = ok(dir.path(), &["ppoly", a, b, "6", "--method", "hypergeom"]);
        assert_eq!(p, h);
    }
    assert_eq!(ok(dir.path(), &["ppoly", "0", "0", "1"]), "-N\n");
}

#[test]
fn amatrix_and_series_render() {
    let dir = tempfile::tempdir().unwrap();
    let v: Value = serde_json::from_str(&ok(dir.path(), &["amatrix", "4", "--format", "json"])).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 9);
    assert_eq!(ok(dir.path(), &["amatrix", "4"]).lines().count(), 9);
    let series = ok(dir.path(), &["series", "2", "2"]);
    assert!(series.lines().any(|l| l == "2,3: -N"));
    let v: Value = serde_json::from_str(&ok(dir.path(), &["series", "2", "2", "--format", "json"])).unwrap();
    assert_eq!(v["cap"], 8);
}

#[test]
fn check_suites_report() {
    let dir = tempfile::tempdir().unwrap();
    let human = ok(dir.path(), &["check", "--suite", "ppoly"]);
    assert!(human.contains("PASS ppoly product vs hypergeometric"));
    let v: Value = serde_json::from_str(&ok(dir.path(), &["check", "--suite", "amatrix", "--format", "json"])).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"][0]["suite"], "amatrix");
}

#[test]
fn cold_and_warm_cache_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cold = ok(dir.path(), &["table", "2", "12"]);
    let file = dir.path().join("ppoly-v1.json");
    let cache: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(cache["schema"], "kp-ppoly-cache/v1");
    assert!(!cache["entries"].as_array().unwrap().is_empty());
    let warm = kp(dir.path(), &["table", "2", "12"]);
    assert_eq!(stdout(&warm), cold);
    assert!(stderr(&warm).is_empty(), "{}", stderr(&warm));
}

#[test]
fn tampered_cache_is_discarded() {
    let dir = tempfile::tempdir().unwrap();
    let clean = ok(dir.path(), &["ppoly", "1", "0", "4"]);
    let file = dir.path().join("ppoly-v1.json");
    let mut cache: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let entries = cache["entries"].as_array_mut().unwrap();
    assert!(entries.len() <= 3);
    entries[0]["poly"] = serde_json::json!({"coeffs": [["12345", "1"]]});
    std::fs::write(&file, serde_json::to_string(&cache).unwrap()).unwrap();
    let o = kp(dir.path(), &["ppoly", "1", "0", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), clean);
    assert!(stderr(&o).contains("verification failed"), "{}", stderr(&o));
}

#[test]
fn corrupt_or_missing_cache_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ppoly-v1.json"), "{not json").unwrap();
    let o = kp(dir.path(), &["ppoly", "0", "0", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("ignoring cache"));
    let fresh = tempfile::tempdir().unwrap();
    let o = kp(&fresh.path().join("absent"), &["ppoly", "0", "0", "2"]);
    assert_eq!(stdout(&o), "5/32 + 15/8*N^2\n");
    assert!(stderr(&o).is_empty());
}

#[test]
fn no_cache_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--no-cache", "ppoly", "0", "0", "3"]);
    assert!(!dir.path().join("ppoly-v1.json").exists());
}
