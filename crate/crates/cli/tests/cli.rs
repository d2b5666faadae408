use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn entloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entloc"))
        .args(args)
        .output()
        .expect("spawn entloc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn schema(name: &str) -> Value {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "schema", name].iter().collect();
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let validator = jsonschema::validator_for(&schema(schema_name)).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:#?}");
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn cell(rows: &[Vec<String>], r: usize, c: usize) -> f64 {
    rows[r][c].parse().unwrap()
}

#[test]
fn sweep_header_and_shape() {
    let out = entloc(&["sweep", "--steps", "11"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["T", "stage_I", "stage_II", "stage_III_eps", "stage_III_limit"]);
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.len() == 5));
}

#[test]
fn sweep_endpoints() {
    let out = entloc(&["sweep", "--steps", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "0,0,0,nan,0");
    assert_eq!(lines[2], "1,1,1,1,1");
}

#[test]
fn sweep_is_deterministic_across_runs_and_executors() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "sweep".to_owned(),
            "--var".into(),
            "p".into(),
            "--T".into(),
            "0.3".into(),
            "--steps".into(),
            "57".into(),
            "--out".into(),
            p.display().to_string(),
        ]
    };
    let par: Vec<String> = args(&a);
    let mut seq: Vec<String> = vec!["--sequential".into()];
    seq.extend(args(&b));
    assert!(entloc(&par.iter().map(String::as_str).collect::<Vec<_>>()).status.success());
    assert!(entloc(&seq.iter().map(String::as_str).collect::<Vec<_>>()).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let again = entloc(&par.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(again.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn eps_sweep_approaches_sqrt_q() {
    let out = entloc(&["sweep", "--var", "eps", "--min", "1e-6", "--max", "1", "--steps", "40"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0][0], "eps");
    let col: Vec<f64> = (1..rows.len()).map(|r| cell(&rows, r, 3)).collect();
    assert!(col.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    let last = *col.last().unwrap();
    assert!((last - 0.5547001962).abs() < 1e-6, "{last}");
    assert!((cell(&rows, 1, 4) - 0.5547001962).abs() < 1e-9);
}

#[test]
fn fixed_filter_flags() {
    let out = entloc(&["sweep", "--min", "0.3", "--max", "0.5", "--steps", "3", "--aa", "0.33", "--ab", "1"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert!((cell(&rows, 2, 3) - 0.408).abs() < 1e-3);

    let lone = entloc(&["sweep", "--aa", "0.33"]);
    assert_eq!(lone.status.code(), Some(2));
}

#[test]
fn reproduce_tables_validate() {
    for table in ["I", "II", "III"] {
        let out = entloc(&["reproduce", "--table", table]);
        assert_eq!(out.status.code(), Some(0), "table {table}");
        let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_valid("report.schema.json", &doc);
        let rows = doc.as_array().unwrap();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r["table"] == table));
    }
}

#[test]
fn reproduce_table_ii_values() {
    let out = entloc(&["reproduce", "--table", "II"]);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let find = |id: &str| {
        doc.as_array()
            .unwrap()
            .iter()
            .find(|r| r["id"] == id)
            .unwrap_or_else(|| panic!("{id}"))
            .clone()
    };
    assert_eq!(find("C_I")["value"].as_f64(), Some(0.0));
    assert!((find("C_II")["value"].as_f64().unwrap() - 0.3076923077).abs() < 1e-9);
    assert_eq!(find("P_III")["value"].as_f64(), Some(0.17));
    assert_eq!(find("P_III_first_principles")["gated"], false);
}

#[test]
fn reproduce_closed_form_off_default() {
    let out = entloc(&["reproduce", "--table", "I", "--T", "0.45", "--eps", "0.5"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_valid("report.schema.json", &doc);
    let c1 = doc
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["id"] == "C_I")
        .unwrap()["value"]
        .as_f64()
        .unwrap();
    assert!((c1 - 0.1025 / 1.01).abs() < 1e-9);
}

#[test]
fn verify_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    let out = entloc(&["verify", "--grid", "6", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_valid("verify.schema.json", &doc);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["points_checked"], 24);
    assert_eq!(doc["skipped"].as_array().unwrap().len(), 12);
}

#[test]
fn verify_corners_only() {
    let out = entloc(&["verify", "--grid", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_valid("verify.schema.json", &doc);
    assert_eq!(doc["points_checked"], 0);
    assert_eq!(doc["skipped"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_tolerance_failure_exits_one() {
    // round-off alone exceeds this
    let out = entloc(&["verify", "--grid", "4", "--tolerance", "1e-300"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_valid("verify.schema.json", &doc);
    assert_eq!(doc["pass"], false);
}

#[test]
fn hom_balanced_visibility_equals_overlap() {
    let out = entloc(&["hom", "--steps", "11"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["p", "coincidence", "visibility"]);
    for r in 1..rows.len() {
        let p = cell(&rows, r, 0);
        assert!((cell(&rows, r, 2) - p).abs() < 1e-9);
        assert!((cell(&rows, r, 1) - (1.0 - p) / 2.0).abs() < 1e-9);
    }
}

#[test]
fn hom_full_transmission() {
    let out = entloc(&["hom", "--T", "1", "--steps", "3"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    for r in 1..rows.len() {
        assert_eq!(cell(&rows, r, 1), 1.0);
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "T = 0.3\np = 0.85\nsteps = 3\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = entloc(&["--config", cfg, "sweep", "--var", "p"]);
    assert!(from_file.status.success());
    let rows = csv_rows(&stdout(&from_file));
    assert_eq!(rows.len(), 4);

    let flagged = entloc(&["--config", cfg, "sweep", "--var", "p", "--steps", "5"]);
    assert_eq!(csv_rows(&stdout(&flagged)).len(), 6);

    let at_table_iii_point = entloc(&["--config", cfg, "sweep", "--var", "T", "--min", "0.2", "--max", "0.3", "--steps", "2"]);
    let rows = csv_rows(&stdout(&at_table_iii_point));
    assert!((cell(&rows, 2, 2) - 0.2204).abs() < 5e-4);
}

#[test]
fn bad_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "temperature = 3\n").unwrap();
    let out = entloc(&["--config", cfg.to_str().unwrap(), "hom"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = entloc(&["--config", "/nonexistent/entloc.toml", "hom"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["sweep", "--min", "0.6", "--max", "0.4"],
        &["sweep", "--T", "1.5"],
        &["sweep", "--steps", "1"],
        &["sweep", "--var", "eps", "--min", "0"],
        &["reproduce"],
        &["reproduce", "--table", "IV"],
        &["verify", "--grid", "1"],
        &["verify", "--tolerance", "-1"],
        &["hom", "--steps", "1"],
        &["frobnicate"],
        &[],
    ];
    for args in cases {
        let out = entloc(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_two() {
    let out = entloc(&["hom", "--out", "/nonexistent/dir/hom.csv"]);
    assert_eq!(out.status.code(), Some(2));
}
