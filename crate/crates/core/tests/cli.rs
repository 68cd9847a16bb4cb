use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_clutter-forge");

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], extra: &[&Path]) -> Output {
    Command::new(BIN).args(args).args(extra).output().expect("binary runs")
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

#[test]
fn malformed_config_exits_2_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = dir.path().join("t");
    let o = run(&["simulate", "-c", bad.to_str().unwrap(), "-o"], &[&out]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn unknown_override_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = run(&["simulate", "-c", config("example1.json").to_str().unwrap(), "--pade.Q=3", "-o"], &[&out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_changes_samples_not_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("example1.json");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (seed, p) in [("1", &a), ("2", &b)] {
        let o = run(&["simulate", "-c", cfg.to_str().unwrap(), "--seed", seed, "--simulate.length=500", "-o"], &[p]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_ne!(std::fs::read(a.with_extension("csv")).unwrap(), std::fs::read(b.with_extension("csv")).unwrap());
    let (ja, jb) = (read_json(&a.with_extension("json")), read_json(&b.with_extension("json")));
    let keys = |v: &serde_json::Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    assert_eq!(keys(&ja), keys(&jb));
    assert_eq!(ja["seed"], 1);
    assert_eq!(ja["length"], 500);
    assert_eq!(ja["overrides"][0], "simulate.length=500");
}

#[test]
fn binary_format_holds_all_samples() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t");
    let o = run(&["simulate", "-c", config("clutter.json").to_str().unwrap(), "--simulate.format=binary", "--simulate.length", "300", "-o"], &[&p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(p.with_extension("bin")).unwrap();
    assert_eq!(bytes.len(), 300 * 3 * 8);
    let side = read_json(&p.with_extension("json"));
    assert_eq!(side["columns"].as_array().unwrap().len(), 3);
}

#[test]
fn validate_writes_report_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r");
    let o = run(
        &["validate", "-c", config("example1.json").to_str().unwrap(), "--validate.trials=2", "--simulate.length=2000", "--plot-data", "-o"],
        &[&p],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&p.with_extension("json"));
    assert_eq!(report["report"]["trial_count"], 2);
    assert!(report["report"]["pdf_mae"].as_f64().unwrap() > 0.0);
    let acf = std::fs::read_to_string(dir.path().join("r_acf.csv")).unwrap();
    assert_eq!(acf.lines().count(), 1 + 201);
    assert!(dir.path().join("r_pdf.csv").exists());
}

#[test]
fn diagnose_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d");
    let o = run(&["diagnose", "-c", config("gamma_diagnose.json").to_str().unwrap(), "--points", "21", "-o"], &[&p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(dir.path().join("d_lt.csv")).unwrap().lines().count(), 22);
    assert!(dir.path().join("d_pdf.csv").exists());
    assert_eq!(read_json(&p.with_extension("json"))["cumulant_path_ok"], true);
}

#[test]
fn schema_file_is_current() {
    let o = run(&["schema"], &[]);
    assert!(o.status.success());
    let live: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/run_config.schema.json");
    assert_eq!(read_json(&file), live);
    assert_eq!(live, clutter_forge::config::schema());
}

#[test]
fn shipped_configs_load() {
    for name in ["example1.json", "example2.json", "gamma_diagnose.json", "clutter.json"] {
        clutter_forge::config::RunConfig::load(&config(name), &[]).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
