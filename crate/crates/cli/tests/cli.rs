use std::process::Command;

use bmquad_cli::{run, EXIT_HYPOTHESIS, EXIT_INPUT, EXIT_OK};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bmquad").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn schema() -> jsonschema::Validator {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/analysis_report.schema.json");
    let raw: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&raw).unwrap()
}

fn assert_valid(report: &Value) {
    let v = schema();
    let errors: Vec<String> = v.iter_errors(report).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

#[test]
fn hilbert_factor_and_search_wrappers() {
    assert_eq!(call(&["hilbert", "3", "2", "2"]).1.trim(), "1/2");
    assert_eq!(call(&["hilbert", "-3", "2", "2"]).1.trim(), "1/2");
    assert_eq!(call(&["hilbert", "2", "2", "real"]).1.trim(), "0");
    let (code, out, _) = call(&["factor", "4t^4-4t^2+1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "c=4, (t^2-1/2)^2");
    let (_, json, _) = call(&["factor", "4t^4-4t^2+1", "--json"]);
    let v: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["c"], "4");
    assert_eq!(v["factors"][0]["multiplicity"], 2);

    let (code, out, _) = call(&["search", "--q", "1,1,1", "--p", "3", "--bound", "2"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let (rows, summary) = lines.split_at(lines.len() - 1);
    assert_eq!(rows.len(), 8 * 5);
    for r in rows {
        assert!(r["x"].as_array().unwrap().iter().all(|c| c.as_i64().unwrap().abs() == 1));
    }
    assert_eq!(summary[0]["count"], 40);
}

#[test]
fn exit_code_matrix() {
    let cases: &[(&[&str], i32)] = &[
        (&["analyze", "--q", "1,1,1", "--p", "t", "--S", "real"], EXIT_HYPOTHESIS),
        (&["analyze", "--q", "1,1,", "--p", "t"], EXIT_INPUT),
        (&["analyze", "--q", "1,1,1", "--p", "t^^2"], EXIT_INPUT),
        (&["analyze", "--q", "1,1,1", "--p", "t", "--S", "real,4"], EXIT_INPUT),
        (&["analyze", "--q", "1,1,1", "--p", "0"], EXIT_INPUT),
        (&["analyze", "--q", "1,1", "--p", "t"], EXIT_INPUT),
        (&["hilbert", "0", "2", "2"], EXIT_INPUT),
        (&["factor", "0"], EXIT_INPUT),
        (&["search", "--q", "1/2,1,1", "--p", "t", "--bound", "2"], EXIT_HYPOTHESIS),
        (&["frobnicate"], EXIT_INPUT),
        (&["--help"], EXIT_OK),
    ];
    for (args, want) in cases {
        let (code, _, err) = call(args);
        assert_eq!(code, *want, "{args:?}: {err}");
    }
    let (_, _, err) = call(&["analyze", "--q", "1,1,1", "--p", "t"]);
    assert!(err.contains("no place of S where q is isotropic"), "{err}");
}

#[test]
fn binary_honours_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_bmquad");
    let st = Command::new(bin).args(["analyze", "--q", "1,1,1", "--p", "t"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_HYPOTHESIS));
    let st = Command::new(bin).args(["hilbert", "3", "2", "2"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&st.stdout).trim(), "1/2");
    let st = Command::new(bin).args(["hilbert", "3"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_INPUT));
}

#[test]
fn reports_validate_and_are_deterministic() {
    let args = [
        "analyze", "--q", "1,1,-1", "--p", "(t-1)^2*(t+2)", "--S", "real,3", "--bound", "6", "--central-places",
        "real,2,3",
    ];
    let (code, a, err) = call(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    let (_, b, _) = call(&args);
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_valid(&v);
    assert_eq!(v["classification"]["case"], "(i)");
    // the rank-four path
    let (code, four, err) = call(&["analyze", "--q", "1,1,1,-1", "--p", "t^2+1", "--bound", "3"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: Value = serde_json::from_str(&four).unwrap();
    assert_valid(&v);
    assert_eq!(v["sa_verdict_rank4"]["sa_xtilde"], "holds");
    // non-integral inputs skip the integral sections
    let (code, frac, err) = call(&["analyze", "--q", "1,-1/2,3", "--p", "t^2/3+1", "--bound", "3"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: Value = serde_json::from_str(&frac).unwrap();
    assert_valid(&v);
    assert!(v["search"].is_null());
}

#[test]
fn golden_reports_validate() {
    for name in ["example1", "example2"] {
        let path = bmquad_cli::default_golden_dir().join(format!("{name}.json"));
        let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_valid(&v);
    }
}

#[test]
fn reproduce_examples_passes_and_detects_corruption() {
    let (code, out, _) = call(&["reproduce-examples"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(out.lines().filter(|l| l.ends_with("PASS")).count(), 2);

    let dir = tempfile::tempdir().unwrap();
    for name in ["example1", "example2"] {
        let src = bmquad_cli::default_golden_dir().join(format!("{name}.json"));
        std::fs::copy(src, dir.path().join(format!("{name}.json"))).unwrap();
    }
    let target = dir.path().join("example1.json");
    let text = std::fs::read_to_string(&target).unwrap();
    std::fs::write(&target, text.replacen("\"(iv)\"", "\"(ii)\"", 1)).unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, out, _) = call(&["reproduce-examples", "--golden-dir", d]);
    assert_ne!(code, EXIT_OK);
    assert!(out.contains("example1: FAIL"));
    assert!(out.contains("-    \"case\": \"(ii)\""), "{out}");
    assert!(out.contains("example2: PASS"));

    let (_, json, _) = call(&["reproduce-examples", "--golden-dir", d, "--json"]);
    let v: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v[0]["status"], "FAIL");
    assert_eq!(v[1]["status"], "PASS");
    assert!(v[0]["diff"].as_str().unwrap().contains("(iv)"));
}

#[test]
fn central_subcommand() {
    let (code, out, _) = call(&["central", "--q", "1,1,1", "--p", "-t^2", "--central-places", "real,2,3", "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    let defects: Vec<bool> = v["central_points"].as_array().unwrap().iter().map(|r| r["defect"].as_bool().unwrap()).collect();
    assert_eq!(defects, vec![true, true, false]);
}
