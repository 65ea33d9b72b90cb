use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_degenkit"))
}

fn kuramoto_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/kuramoto.json")
}

fn write_config(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, value.to_string()).unwrap();
    p
}

fn run(config: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg("--config").arg(config).args(extra).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_config(k2: &str, probe: &str, params: Value) -> Value {
    json!({
        "grid": {"n": 16},
        "kernels": {"k2": k2},
        "probe": {"name": probe, "params": params},
        "seed": 3
    })
}

#[test]
fn kuramoto_example_witnesses_degeneracy() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("curve.csv");
    let o = run(&kuramoto_config(), &["--out", out.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["verdict"], "DEGENERACY_WITNESSED");
    let last = report["bounds"]["final_ratio"].as_f64().unwrap();
    assert!((last - 0.3633).abs() < 5e-5, "{last}");
    assert_eq!(report["digest"].as_str().unwrap().len(), 64);
    assert_eq!(report["config"]["probe"]["params"]["floor"], 1e-3);
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 13);
    assert!(rows.starts_with("parameter,value\n0.5,"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("DEGENERACY_WITNESSED"));
}

#[test]
fn undeclared_variable_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let mut c = small_config("sin(u - v)", "frechet_residual", json!({"amplitude": 1, "levels": 3}));
    c["kernels"] = json!({"k0": "sin(x)"});
    let o = run(&write_config(&dir, "bad.json", &c), &[]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("`x`") && msg.contains("k0") && msg.contains("byte"), "{msg}");
}

#[test]
fn unknown_probe_lists_available_ones() {
    let dir = TempDir::new().unwrap();
    let c = small_config("sin(u - v)", "nosuch", json!({}));
    let o = run(&write_config(&dir, "c.json", &c), &[]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("nosuch") && msg.contains("frechet_residual") && msg.contains("darbo_growth"), "{msg}");
}

#[test]
fn malformed_json_reports_its_location() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("c.json");
    fs::write(&p, "{\n  \"grid\": {\"n\": 4},\n  \"kernels\": oops\n}").unwrap();
    let o = run(&p, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn bad_probe_parameters_exit_2() {
    let dir = TempDir::new().unwrap();
    let c = small_config("sin(u - v)", "local_mnc_ratio", json!({"radii": [0.1, 0.2]}));
    let o = run(&write_config(&dir, "c.json", &c), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("radii"));
}

#[test]
fn evaluation_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let c = small_config("ln(u - 1)", "lipschitz_local", json!({"r": 0.5, "trials": 10}));
    let o = run(&write_config(&dir, "c.json", &c), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("lipschitz_local"));
}

#[test]
fn list_probes_has_one_row_per_probe() {
    let o = bin().arg("list-probes").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), degenkit_cli::PROBES.len());
    assert!(text.lines().any(|l| l.starts_with("frechet_residual ")));
    assert!(text.lines().any(|l| l.starts_with("darbo_growth ")));
    let frechet = text.lines().find(|l| l.starts_with("frechet_residual")).unwrap();
    assert!(frechet.ends_with("amplitude,levels"));
}

#[test]
fn rerun_from_report_reproduces_csv() {
    let dir = TempDir::new().unwrap();
    let params = json!({"radii": [0.5, 0.1], "trials": 48, "k_budget": 4, "tolerance": 0.05});
    let cfg = write_config(&dir, "c.json", &small_config("sin(u - v)", "darbo_growth", params));
    let path = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let first = run(&cfg, &["--out", &path("r1.json"), "--csv", &path("a.csv"), "--quiet"]);
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(first.stdout.is_empty());
    let again = run(Path::new(&path("r1.json")), &["--out", &path("r2.json"), "--csv", &path("b.csv")]);
    assert!(again.status.success(), "{}", stderr(&again));
    let a = fs::read_to_string(path("a.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(path("b.csv")).unwrap());
    assert!(a.starts_with("parameter,value\n"));
    let r1: Value = serde_json::from_str(&fs::read_to_string(path("r1.json")).unwrap()).unwrap();
    let r2: Value = serde_json::from_str(&fs::read_to_string(path("r2.json")).unwrap()).unwrap();
    assert_eq!(r1["digest"], r2["digest"]);
    assert_eq!(r1["bounds"], r2["bounds"]);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let params = json!({"radii": [1.0, 0.5], "samples": 64, "k_budget": 4});
    let cfg = write_config(&dir, "c.json", &small_config("sin(u - v)", "local_mnc_ratio", params));
    let mut csvs = Vec::new();
    for threads in ["1", "4"] {
        let csv = dir.path().join(format!("t{threads}.csv"));
        let o = bin()
            .env("DEGENKIT_THREADS", threads)
            .args(["run", "--quiet", "--config"])
            .arg(&cfg)
            .arg("--csv")
            .arg(&csv)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        csvs.push(fs::read_to_string(csv).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert!(csvs[0].starts_with("parameter,value,k,upper,lower\n"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = bin()
        .env("DEGENKIT_THREADS", "zero")
        .args(["run", "--config"])
        .arg(kuramoto_config())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn overrides_change_the_effective_config() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let o = run(
        &kuramoto_config(),
        &["--grid-n", "8", "--refinements", "1", "--seed", "11", "--quiet", "--out", out.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r["config"]["grid"]["n"], 8);
    assert_eq!(r["config"]["grid"]["refinements"], 1);
    assert_eq!(r["seed"], 11);
}

#[test]
fn every_probe_runs_from_the_command_line() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("lipschitz_local", json!({"r": 1.0, "trials": 30, "bound": 1.0})),
        ("lipschitz_pointwise", json!({"y1": {"expr": "t"}, "y2": {"step": {"lo": 0, "hi": 0.5, "value": 1}}, "l1": 2.0})),
        ("lipschitz_transfer", json!({"tau": 3, "ell": 4, "r": 0.5, "trials": 30})),
        ("compactness", json!({"trials": 64, "k_budget": 4})),
        ("mixture_mnc", json!({"y1": {"constant": 1}, "y2": {"constant": 0}, "mode": {"sample": {"count": 64}}, "k_max": 3})),
    ];
    for (name, params) in cases {
        let cfg = write_config(&dir, &format!("{name}.json"), &small_config("sin(u - v)", name, params));
        let csv = dir.path().join(format!("{name}.csv"));
        let o = run(&cfg, &["--csv", csv.to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).starts_with(name));
        assert!(fs::read_to_string(csv).unwrap().lines().count() >= 2, "{name}");
    }
}
