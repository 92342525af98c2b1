use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steinpsd")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path: PathBuf = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn table1_check_passes() {
    let o = run(&["table1", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("0.344694") && s.contains("0.398900") && s.contains("0.733832") && s.contains("0.880482"));
    assert_eq!(s.lines().filter(|l| l.starts_with(|c: char| c == ' ' || c.is_ascii_digit())).count(), 19);
}

#[test]
fn table1_csv_and_json() {
    let csv = stdout(&run(&["table1", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 19);
    assert!(csv.contains("25,0.07,0.446997,0.513008"));
    let json: serde_json::Value = serde_json::from_str(&stdout(&run(&["table1", "--format", "json"]))).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 18);
    assert_eq!(json[13]["closed_form"], "0.693072");
}

#[test]
fn table1_check_catches_perturbation() {
    let o = run(&["table1", "--check", "--perturb", "1e-5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("MISMATCH"));
}

#[test]
fn closed_form_bound_from_fit() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", r#"{"model":"two-runs","n":20,"p":0.05}"#);
    let o = run(&["bound", "--model", &model, "--fit", "nb", "--variant", "closed-form"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(format!("{:.6}", v["total"].as_f64().unwrap()), "0.344694");
    assert_eq!(v["variant"], "closed-form");
}

#[test]
fn zero_probabilities_give_zero() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", r#"{"model":"two-runs","n":10,"p":0.0}"#);
    for variant in ["d1", "d2", "min", "theorem"] {
        let o = run(&["bound", "--model", &model, "--fit", "poisson", "--variant", variant]);
        assert_eq!(o.status.code(), Some(0), "{variant}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["total"].as_f64(), Some(0.0));
    }
}

#[test]
fn k1k2_theorem_exceeds_oracle_distance() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", r#"{"model":"k1k2-runs","k1":1,"k2":2,"n":9,"p":0.3}"#);
    let o = run(&["bound", "--model", &model, "--fit", "poisson", "--variant", "theorem", "--compare-tv"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["exact_tv"]["hi"].as_f64().unwrap() <= v["total"].as_f64().unwrap());
}

#[test]
fn target_file_and_mismatch() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", r#"{"model":"custom-bernoulli-product","n":10,"p":0.2}"#);
    let good = write(&dir, "t.json", r#"{"family":"panjer","a":2.0,"b":0.0}"#);
    let bad = write(&dir, "u.json", r#"{"family":"panjer","a":3.0,"b":0.0}"#);
    assert_eq!(run(&["bound", "--model", &model, "--target", &good, "--variant", "d2"]).status.code(), Some(0));
    let o = run(&["bound", "--model", &model, "--target", &bad, "--variant", "d2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("first moments differ"));
}

#[test]
fn preconditions_are_surfaced() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", r#"{"model":"two-runs","n":7,"p":0.2}"#);
    let o = run(&["bound", "--model", &model, "--fit", "nb", "--variant", "closed-form"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n ≥ 8"));
}

#[test]
fn verify_suite() {
    let dir = TempDir::new().unwrap();
    let runs = write(&dir, "r.json", r#"{"model":"two-runs","n":8,"p":0.3}"#);
    let o = run(&["verify", "--model", &runs]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!stdout(&o).contains("FAIL"));

    let o = run(&["verify", "--model", &runs, "--corrupt-abar2", "1.01"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL closed-form-moments"));

    let k = write(&dir, "k.json", r#"{"model":"k1k2-runs","k1":1,"k2":1,"n":6,"p":0.4}"#);
    assert_eq!(run(&["verify", "--model", &k]).status.code(), Some(0));
}

#[test]
fn oracle_output() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", r#"{"model":"two-runs","n":8,"p":0.4}"#);
    let o = run(&["oracle", "--model", &model, "--conditional", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let total: f64 = v["law"]["masses"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(v["conditional"]["n1n2"].as_array().unwrap().iter().all(|l| l["d"].as_f64().unwrap() <= 4.0));
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", r#"{"model":"two-runs","n":30,"p":0.2}"#);
    let args = ["bound", "--model", &model, "--fit", "nb", "--variant", "min", "--seed", "7"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["bound"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--model", "/nonexistent.json", "--fit", "nb"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", r#"{"model":"two-runs","n":9,"p":0.2}"#);
    assert_eq!(run(&["bound", "--model", &model, "--fit", "gamma"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--model", &model, "--fit", "nb", "--variant", "bogus"]).status.code(), Some(2));
}
