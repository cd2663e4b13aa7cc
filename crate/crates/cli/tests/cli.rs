mod support;

use std::f64::consts::PI;
use std::path::Path;

use serde_json::{json, Value};
use support::{chordmink, chordmink_with_env, read_json, schema, validate, write};

fn triangle() -> Value {
    let s = 3f64.sqrt() / 2.0;
    json!({"dim": 2, "atoms": [
        {"v": [0.0, 1.0], "alpha": 1.0},
        {"v": [-s, -0.5], "alpha": 1.0},
        {"v": [s, -0.5], "alpha": 1.0},
    ]})
}

fn axes() -> Value {
    json!({"dim": 2, "atoms": [
        {"v": [1.0, 0.0], "alpha": 1.0},
        {"v": [-1.0, 0.0], "alpha": 1.0},
        {"v": [0.0, 1.0], "alpha": 1.0},
        {"v": [0.0, -1.0], "alpha": 1.0},
    ]})
}

fn square() -> Value {
    json!({
        "dim": 2,
        "normals": [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
        "support": [1.0, 1.0, 1.0, 1.0],
        "vertices": [],
        "facets": [],
    })
}

/// An irregular pentagon containing the origin.
fn pentagon() -> Value {
    let angles: [f64; 5] = [10.0, 85.0, 160.0, 230.0, 300.0];
    let normals: Vec<Value> = angles.iter().map(|a| json!([a.to_radians().cos(), a.to_radians().sin()])).collect();
    json!({"dim": 2, "normals": normals, "support": [1.0, 0.8, 1.3, 0.9, 1.1], "vertices": [], "facets": []})
}

fn assert_schema(name: &str, report: &Value) {
    let errors = validate(&schema(name), report);
    assert!(errors.is_empty(), "{name} schema violations: {errors:#?}");
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_equilateral_triangle_converges() {
    let dir = tempfile::tempdir().unwrap();
    let measure = write(dir.path(), "tri.json", &triangle());
    let out = dir.path().join("report.json");
    let run = chordmink(&["solve", "--measure", path_str(&measure), "--p", "-1", "--q", "1", "--out", path_str(&out)]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.is_empty());
    let report = read_json(&out);
    assert_eq!(report["converged"], json!(true));
    assert!(report["max_residual"].as_f64().unwrap() <= 1e-2);
    assert_eq!(report["manifest"]["subcommand"], json!("solve"));
    assert_eq!(report["manifest"]["config"]["p"].as_f64(), Some(-1.0));
    assert_schema("solve", &report);

    // Regular triangle with unit weights: h = (1 / (2 sqrt 3))^{1/(2-p)} on each facet for q = 1.
    let expected = (1.0 / (2.0 * 3f64.sqrt())).powf(1.0 / 3.0);
    for h in report["polytope"]["support"].as_array().unwrap() {
        assert!((h.as_f64().unwrap() - expected).abs() < 1e-6, "{h} vs {expected}");
    }
}

#[test]
fn check_gp_rejects_coordinate_axes() {
    let dir = tempfile::tempdir().unwrap();
    let measure = write(dir.path(), "axes.json", &axes());
    let out = dir.path().join("gp.json");
    let run = chordmink(&["check-gp", "--measure", path_str(&measure), "--out", path_str(&out)]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("dependent_subset"), "stderr: {}", run.stderr);
    let report = read_json(&out);
    assert_eq!(report["in_general_position"], json!(false));
    assert_schema("check-gp", &report);
}

#[test]
fn check_gp_accepts_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let measure = write(dir.path(), "tri.json", &triangle());
    let run = chordmink(&["check-gp", "--measure", path_str(&measure)]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let report: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(report["in_general_position"], json!(true));
    assert_schema("check-gp", &report);
}

#[test]
fn integrals_of_square_match_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let poly = write(dir.path(), "square.json", &square());
    let run = chordmink(&["integrals", "--polytope", path_str(&poly), "--q", "0,1,3"]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let report: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_schema("integrals", &report);
    for (q, exact) in [("0", 8.0 / PI), ("1", 4.0), ("3", 48.0 / PI)] {
        let entry = &report["integrals"][q];
        let estimate = entry["estimate"].as_f64().unwrap();
        let reference = entry["reference"].as_f64().unwrap();
        assert!((reference - exact).abs() <= 1e-12 * exact, "q={q} reference {reference}");
        assert!((estimate - exact).abs() <= 1e-3 * exact, "q={q} estimate {estimate}");
        assert!(entry["error"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn integrals_without_closed_form_report_null_reference() {
    let dir = tempfile::tempdir().unwrap();
    let poly = write(dir.path(), "square.json", &square());
    let run = chordmink(&["integrals", "--polytope", path_str(&poly), "--q", "2", "--budget", "256,32,3"]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let report: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(report["integrals"]["2"]["reference"], Value::Null);
    assert_eq!(report["manifest"]["config"]["scheme"]["directions"], json!(256));
    assert_schema("integrals", &report);
}

#[test]
fn forward_measure_solve_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let poly = write(dir.path(), "pentagon.json", &pentagon());
    let measure = dir.path().join("mu.json");
    let run = chordmink(&[
        "gen-measure",
        "--polytope",
        path_str(&poly),
        "--p",
        "-1",
        "--q",
        "2",
        "--out",
        path_str(&measure),
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert_schema("measure", &read_json(&measure));

    let solution = dir.path().join("solution.json");
    let run =
        chordmink(&["solve", "--measure", path_str(&measure), "--p", "-1", "--q", "2", "--out", path_str(&solution)]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert_schema("solve", &read_json(&solution));

    let run = chordmink(&[
        "verify",
        "--polytope",
        path_str(&solution),
        "--measure",
        path_str(&measure),
        "--p",
        "-1",
        "--q",
        "2",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let report: Value = serde_json::from_str(&run.stdout).unwrap();
    assert!(report["max_residual"].as_f64().unwrap() <= 1e-2);
    assert_eq!(report["manifest"]["inputs"].as_array().unwrap().len(), 2);
    assert_schema("verify", &report);
}

#[test]
fn verify_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let poly = write(dir.path(), "square.json", &square());
    let measure = write(dir.path(), "axes.json", &axes());
    let run =
        chordmink(&["verify", "--polytope", path_str(&poly), "--measure", path_str(&measure), "--p", "-1", "--q", "1"]);
    assert_eq!(run.code, 2);
    let report: Value = serde_json::from_str(&run.stdout).unwrap();
    // F_{-1,1} of the unit square is h^2 * area = 2 per facet against alpha = 1.
    assert!((report["max_residual"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_schema("verify", &report);
}

#[test]
fn random_measure_is_in_general_position() {
    let dir = tempfile::tempdir().unwrap();
    let measure = dir.path().join("random.json");
    let run = chordmink(&["gen-measure", "--dim", "3", "--count", "9", "--seed", "4", "--out", path_str(&measure)]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let m = read_json(&measure);
    assert_eq!(m["atoms"].as_array().unwrap().len(), 9);
    assert_schema("measure", &m);
    let run = chordmink(&["check-gp", "--measure", path_str(&measure)]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
}

#[test]
fn iteration_cap_reports_non_convergence_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let measure = dir.path().join("random.json");
    chordmink(&["gen-measure", "--dim", "2", "--count", "7", "--seed", "11", "--out", path_str(&measure)]);
    let out = dir.path().join("report.json");
    let run = chordmink(&[
        "solve",
        "--measure",
        path_str(&measure),
        "--p",
        "-2",
        "--q",
        "2",
        "--max-iter",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(run.code, 2, "stderr: {}", run.stderr);
    assert!(run.stderr.contains("not converged"));
    let report = read_json(&out);
    assert_eq!(report["converged"], json!(false));
    assert_eq!(report["termination"], json!("iteration-cap"));
    assert_schema("solve", &report);
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let measure = dir.path().join("random.json");
    chordmink(&["gen-measure", "--dim", "2", "--count", "6", "--seed", "5", "--out", path_str(&measure)]);
    let mut reports = Vec::new();
    for jobs in ["1", "1", "2"] {
        let run = chordmink(&["solve", "--measure", path_str(&measure), "--p", "-0.5", "--q", "2", "--jobs", jobs]);
        assert!(run.code == 0 || run.code == 2, "stderr: {}", run.stderr);
        reports.push(run.stdout);
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let poly = write(dir.path(), "square.json", &square());
    let run = chordmink(&["integrals", "--polytope", path_str(&poly), "--q", "1"]);
    assert!(run.stdout.contains("\"reference\": 4.0000000000000000e0"), "{}", run.stdout);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let measure = write(dir.path(), "tri.json", &triangle());
    let m = path_str(&measure);

    let missing = chordmink(&["solve", "--measure", "/nonexistent/m.json", "--p", "-1", "--q", "1"]);
    assert_eq!(missing.code, 1);
    assert!(missing.stderr.contains("cannot read"));

    let positive_p = chordmink(&["solve", "--measure", m, "--p", "0.5", "--q", "1"]);
    assert_eq!(positive_p.code, 1);
    assert!(positive_p.stderr.contains("p must be negative"));

    let small_q = chordmink(&["solve", "--measure", m, "--p", "-1", "--q", "0.5"]);
    assert_eq!(small_q.code, 1);
    assert!(small_q.stderr.contains("q"));

    let unknown = chordmink(&["solve", "--measure", m, "--p", "-1", "--q", "1", "--frobnicate"]);
    assert_eq!(unknown.code, 1);

    let bad_budget = chordmink(&["solve", "--measure", m, "--p", "-1", "--q", "1", "--budget", "10,2"]);
    assert_eq!(bad_budget.code, 1);

    let malformed = write(dir.path(), "bad.json", &json!({"dim": 2, "atoms": [{"v": [1.0, 0.0]}]}));
    let run = chordmink(&["check-gp", "--measure", path_str(&malformed)]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("malformed"), "{}", run.stderr);
    for run in [missing, positive_p, small_q, run] {
        assert!(run.stdout.is_empty());
    }
}

#[test]
fn log_level_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let measure = write(dir.path(), "tri.json", &triangle());
    let args = ["solve", "--measure", path_str(&measure), "--p", "-1", "--q", "1"];
    let quiet = chordmink(&args);
    assert!(quiet.stderr.is_empty(), "{}", quiet.stderr);
    let chatty = chordmink_with_env(&args, &[("CHORDMINK_LOG", "info")]);
    assert!(chatty.stderr.contains("converged"), "{}", chatty.stderr);
    assert_eq!(quiet.stdout, chatty.stdout);
}

#[test]
fn validator_flags_missing_and_mistyped_fields() {
    let dir = tempfile::tempdir().unwrap();
    let measure = write(dir.path(), "tri.json", &triangle());
    let run = chordmink(&["solve", "--measure", path_str(&measure), "--p", "-1", "--q", "1"]);
    let mut report: Value = serde_json::from_str(&run.stdout).unwrap();
    report.as_object_mut().unwrap().remove("converged");
    report["termination"] = json!("finished");
    report["manifest"]["inputs"][0]["sha256"] = json!("abc");
    let errors = validate(&schema("solve"), &report);
    assert_eq!(errors.len(), 3, "{errors:#?}");
}
