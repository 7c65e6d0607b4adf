use std::process::Command;

use isomer::cli::run;
use isomer::conditions::{Tableau, LoadOptions};
use isomer::ode::parse_convergence_csv;
use isomer::stumps::{count_by_recurrence, parse_count_table_tsv};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("isomer").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = call(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

fn text_field<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
        .unwrap_or_else(|| panic!("no {key} in\n{report}"))
}

#[test]
fn count_rows() {
    let out = ok(&["count", "--max-order", "8", "--method", "both"]);
    assert!(out.lines().any(|l| l == "8\t115\t200\t51\t110"));
    let out = ok(&["count", "--max-order", "20", "--method", "recurrence"]);
    assert_eq!(out.lines().last().unwrap(), "20\t12826228\t20247374\t23824\t63338");
    let out = ok(&["count", "--max-order", "1"]);
    assert_eq!(out, "p\tm_p\tM_p\tn_p\tN_p\n1\t1\t1\t1\t1\n");
}

#[test]
fn count_formats_round_trip() {
    let rows = count_by_recurrence(12);
    let tsv = ok(&["count", "--max-order", "12", "--method", "enumerate"]);
    assert_eq!(parse_count_table_tsv(&tsv).unwrap(), rows);
    let json: Value = serde_json::from_str(&ok(&["count", "--max-order", "12", "--format", "json"])).unwrap();
    let rows_json = json["rows"].as_array().unwrap();
    assert_eq!(rows_json.len(), 12);
    assert_eq!(rows_json[11]["n_p"], 475);
    assert_eq!(rows_json[11]["M_p"], 7813);
}

#[test]
fn count_budget_exhaustion_fails() {
    let (code, _, err) = call(&["count", "--max-order", "22", "--method", "enumerate", "--budget-seconds", "0"]);
    assert_eq!(code, 1);
    assert!(err.contains("budget"), "{err}");
}

#[test]
fn verify_builtins() {
    for (name, p, v, s, amb) in [("fake5", "6", "4", "5", "true"), ("fake6", "7", "5", "6", "true"), ("rk4", "6", "4", "4", "false")] {
        let out = ok(&["verify", "--builtin", name, "--max-order", p]);
        assert_eq!(text_field(&out, "vector_order"), v, "{name}");
        assert_eq!(text_field(&out, "scalar_order"), s, "{name}");
        assert_eq!(text_field(&out, "ambiguous"), amb, "{name}");
    }
    let out = ok(&["verify", "--builtin", "fake5", "--max-order", "6"]);
    assert!(text_field(&out, "d1").starts_with("failed"));
}

#[test]
fn verify_json_report() {
    let json: Value = serde_json::from_str(&ok(&["verify", "--builtin", "fake5", "--max-order", "6", "--format", "json", "--approx"])).unwrap();
    assert_eq!(json["vector_order"], 4);
    assert_eq!(json["scalar_order"], 5);
    assert_eq!(json["ambiguous"], true);
    assert_eq!(json["d1"], "failed");
    assert_eq!(json["g"], "-1/160");
    let first = &json["failing"][0];
    assert_eq!(first["order"], 5);
    assert!(first["approx"].is_f64());
}

#[test]
fn verify_tableau_file_and_builtin_round_trip() {
    let dir = std::env::temp_dir().join(format!("isomer-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fake6.json");
    let path_str = path.to_str().unwrap();
    ok(&["builtin", "fake6", "--output", path_str]);
    let text = std::fs::read_to_string(&path).unwrap();
    let tab = Tableau::from_json_str(&text, LoadOptions::default()).unwrap();
    assert_eq!(tab.discriminant(), 415);
    let out = ok(&["verify", "--tableau", path_str, "--max-order", "7"]);
    assert_eq!(text_field(&out, "scalar_order"), "6");

    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"s": 2, "c": ["0", "1/2"], "A": [[], ["1/3"]], "b": ["0", "1"]}"#).unwrap();
    let (code, _, err) = call(&["verify", "--tableau", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("row 2"), "{err}");
    let out = ok(&["verify", "--tableau", bad.to_str().unwrap(), "--allow-inconsistent-rows", "--max-order", "3"]);
    assert_eq!(text_field(&out, "scalar_order"), "refused");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn builtin_listing() {
    assert_eq!(ok(&["builtin"]), "euler\nrk4\nfake5\nfake6\n");
    assert_eq!(call(&["builtin", "dopri"]).0, 1);
}

#[test]
fn residuals_follow_filter() {
    let json: Value = serde_json::from_str(&ok(&["residuals", "--builtin", "fake5", "--order", "5", "--degree", "3", "--format", "json"])).unwrap();
    let rows = json["residuals"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["order"].as_u64().unwrap() <= 5 && r["degree"].as_u64().unwrap() <= 3));
    let nonzero: Vec<&Value> = rows.iter().filter(|r| r["zero"] == false).collect();
    assert_eq!(nonzero.len(), 2);
    let mut values: Vec<&str> = nonzero.iter().map(|r| r["value"].as_str().unwrap()).collect();
    values.sort();
    assert_eq!(values, ["-1/160", "1/160"]);
    let text = ok(&["residuals", "--builtin", "fake5", "--order", "4", "--degree", "2"]);
    assert!(text.lines().all(|l| l.ends_with("residual=0")));
}

#[test]
fn classes_listing_and_audit() {
    let json: Value = serde_json::from_str(&ok(&["classes", "--order", "6"])).unwrap();
    let classes = json["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 15);
    let sizes: usize = classes.iter().map(|c| c["members"].as_array().unwrap().len()).sum();
    assert_eq!(sizes, 20);

    let json: Value = serde_json::from_str(&ok(&["classes", "--order", "7", "--d1-audit"])).unwrap();
    let flagged: Vec<&Value> = json["classes"].as_array().unwrap().iter().filter(|c| c["flagged"] == true).collect();
    assert!(flagged.iter().any(|c| c["signature"] == serde_json::json!([[1, 0], [1, 0], [0, 1], [0, 1], [0, 2]])));
    assert!(flagged.iter().all(|c| c["order"] == 7));
}

#[test]
fn convergence_slopes() {
    for (name, problem, target, tol) in [
        ("fake5", "spiral-scalar", 4.99, 0.2),
        ("fake6", "spiral-vector", 5.0, 0.2),
        ("rk4", "spiral-vector", 4.0, 0.3),
    ] {
        let (code, out, err) = call(&["convergence", "--builtin", name, "--problem", problem, "--grid", "0.0316,0.178,4"]);
        assert_eq!(code, 0, "{err}");
        let (rows, slope) = parse_convergence_csv(&out).unwrap();
        assert_eq!(rows.len(), 4);
        assert!((slope - target).abs() <= tol, "{name} {problem}: {slope}");
        assert!(err.starts_with("slope="), "{err}");
    }
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["count", "--max-order", "10", "--method", "both"][..],
        &["classes", "--order", "7"],
        &["verify", "--builtin", "fake6", "--max-order", "7", "--format", "json"],
        &["convergence", "--builtin", "fake5", "--problem", "spiral-vector"],
    ] {
        assert_eq!(ok(args), ok(args), "{args:?}");
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_isomer");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code().unwrap();
    assert_eq!(status(&["count", "--max-order", "3"]), 0);
    assert_eq!(status(&["verify", "--builtin", "nope"]), 1);
    assert_eq!(status(&["count", "--max-order", "zero"]), 2);
    assert_eq!(status(&[]), 2);
}
