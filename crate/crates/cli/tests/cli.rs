use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn repfam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repfam")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn schema_for(sub: &str) -> jsonschema::Validator {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "schemas", &format!("{sub}.schema.json")].iter().collect();
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(v: &Value) {
    let sub = v["subcommand"].as_str().unwrap();
    let validator = schema_for(sub);
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{sub}: {errors:?}\n{v:#}");
}

#[test]
fn pcover_example_needs_three_sets() {
    let out = repfam(&["pcover", &data("pcover_k4.txt")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["answer"], 3);
    assert_valid(&v);
}

#[test]
fn kiob_on_a_star_says_no() {
    let out = repfam(&["kiob", &data("star4.graph"), "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["answer"], false);
    assert_valid(&v);
    let out = repfam(&["kiob", &data("star4.graph"), "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bounds_reproduce_the_golden_base() {
    let out = repfam(&["bounds", "--k", "40", "--p-frac", "0.55277", "--c", "1.447", "--shape", "pc"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["base"].as_f64().unwrap() - 2.618).abs() < 1e-3);
    assert!((v["kiob_base"].as_f64().unwrap() - 6.854).abs() < 1e-3);
    assert_valid(&v);
}

#[test]
fn every_report_matches_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let outfile = dir.path().join("rep.fam");
    let outfile = outfile.to_str().unwrap();
    let runs: Vec<Vec<String>> = vec![
        vec!["repfam".into(), data("pairs.fam"), "--skip-threshold".into(), "0".into(), "--debug-verify".into()],
        vec!["repfam".into(), data("pairs.fam"), "-o".into(), outfile.into()],
        vec!["separator".into(), "--n".into(), "8".into(), "--k".into(), "3".into(), "--p".into(), "1".into(), "--verify".into()],
        vec!["pcover".into(), data("pcover_k4.txt"), "--debug-verify".into(), "--skip-threshold".into(), "0".into()],
        vec!["kds".into(), data("p4.graph"), "--k".into(), "4".into()],
        vec!["kttree".into(), data("path3.graph"), "--root".into(), "0".into(), "--k".into(), "2".into(), "--t".into(), "1".into(), "--debug-verify".into()],
        vec!["kiob".into(), data("path3.graph"), "--k".into(), "2".into()],
        vec!["kpath".into(), data("triangle.wgraph"), "--k".into(), "3".into(), "--debug-verify".into()],
        vec!["bounds".into(), "--k".into(), "6".into(), "--p".into(), "6".into(), "--c".into(), "1".into()],
        vec!["bench".into(), "pcover".into(), "--instances".into(), "2".into(), "--debug-verify".into()],
        vec!["bench".into(), "empty".into()],
        vec!["verify".into(), data("pairs.fam"), data("pairs_subset.fam")],
    ];
    for args in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = repfam(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_valid(&json(&out));
    }
    // the sidecar is the same report
    let sidecar: Value = serde_json::from_str(&fs::read_to_string(format!("{outfile}.json")).unwrap()).unwrap();
    assert_valid(&sidecar);
    assert_eq!(sidecar["output_size"], 4);
}

#[test]
fn filtered_family_is_written_in_the_input_format() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.fam");
    let out = repfam(&["repfam", &data("pairs.fam"), "--skip-threshold", "0", "-o", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = repfam(&["verify", &data("pairs.fam"), out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["answer"], true);
}

#[test]
fn verify_reports_a_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two.fam");
    fs::write(&two, "5 2 4 2\n1 4\n1 3\n").unwrap();
    let out = repfam(&["verify", &data("pairs.fam"), two.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verification"]["counterexample"]["y"], serde_json::json!([3, 4]));
    assert_valid(&v);
}

#[test]
fn bench_suites() {
    let out = repfam(&["bench", "empty"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["rows"], serde_json::json!([]));

    let out = repfam(&["bench", "pcover", "--instances", "3", "--debug-verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["verification"] == "pass"));

    let out = repfam(&["bench", "c-sweep", "--instances", "5", "--budget-ms", "0"]);
    let v = json(&out);
    assert_eq!(v["truncated"], true);
    assert_eq!(v["rows"], serde_json::json!([]));

    assert_eq!(repfam(&["bench", "nonsense"]).status.code(), Some(2));
}

#[test]
fn text_format() {
    let out = repfam(&["--format", "text", "pcover", &data("pcover_k4.txt")]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "answer: 3"));
    assert!(text.lines().any(|l| l.starts_with("timings.ms: ")));
}

#[test]
fn input_errors_exit_two() {
    let out = repfam(&["pcover", &data("pcover_k4.txt"), "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    assert_eq!(repfam(&["pcover", "/definitely/missing"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.fam");
    fs::write(&bad, "5 1 4 2\n0 0 1\n").unwrap();
    let out = repfam(&["repfam", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(repfam(&["separator", "--n", "5", "--k", "2", "--p", "3"]).status.code(), Some(2));
    assert_eq!(repfam(&["pcover", &data("pcover_k4.txt"), "--c", "0.5"]).status.code(), Some(2));
}

#[test]
fn separator_cap_is_a_resource_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_repfam"))
        .args(["separator", "--n", "12", "--k", "4", "--p", "2"])
        .env("REPFAM_MAX_SEPARATOR", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_repfam"))
        .args(["separator", "--n", "12", "--k", "4", "--p", "2"])
        .env("REPFAM_MAX_SEPARATOR", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_answers() {
    let one = json(&repfam(&["--threads", "1", "kttree", &data("star4.graph"), "--root", "0", "--k", "1", "--t", "4", "--skip-threshold", "0"]));
    let many = json(&repfam(&["--threads", "6", "kttree", &data("star4.graph"), "--root", "0", "--k", "1", "--t", "4", "--skip-threshold", "0"]));
    assert_eq!(one["answer"], true);
    assert_eq!(one["stats"], many["stats"]);
}
