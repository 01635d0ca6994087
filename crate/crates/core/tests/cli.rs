//! The qsdlab binary: exit codes, artifacts and flag overrides.
use std::path::Path;
use std::process::{Command, Output};

fn qsdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsdlab")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const POLY: &str = "alpha = 1.5\nsigma.kind = \"polynomial\"\nsigma.gamma = 2.0\n";

#[test]
fn analyze_writes_entrance_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", POLY);
    let out = dir.path().join("out");
    let o = qsdlab(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("entrance.csv")).unwrap();
    assert!(csv.starts_with("quantity,r,value,status,reason\n"));
    assert!(csv.contains("entrance_integral,,7.85398163397449"));
    assert!(out.join("analyze.json").exists());
}

#[test]
fn analyze_reports_divergence_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "alpha = 1.5\nsigma.kind = \"polynomial\"\nsigma.gamma = 0.5\n");
    let out = dir.path().join("out");
    let o = qsdlab(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("entrance.csv")).unwrap();
    assert!(csv.contains("entrance_integral,,,DIVERGENT,INFINITE_MASS"));
}

#[test]
fn config_errors_exit_two_and_list_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "alpha = 2.5\nsim.nope = 1\nsim.dt = \"x\"\n");
    let o = qsdlab(&["analyze", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for code in ["ALPHA_RANGE", "UNKNOWN_KEY", "TYPE_MISMATCH", "MISSING_KEY"] {
        assert!(err.contains(code), "{code} missing from {err}");
    }
}

#[test]
fn simulate_refused_with_infinite_mass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "alpha = 1.5\nsigma.kind = \"polynomial\"\nsigma.gamma = 0.5\n");
    let o = qsdlab(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectral_run_refused_without_entrance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "alpha = 1.5\nsigma.kind = \"polynomial\"\nsigma.gamma = 0.8\ngrid.n = 64\n");
    let o = qsdlab(&["spectrum", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ENTRANCE_FAIL"));
}

#[test]
fn spectrum_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("{POLY}grid.n = 96\ngrid.refine = false\n"));
    let out = dir.path().join("out");
    let o = qsdlab(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["spectrum.csv", "qsd.csv", "decay.csv", "spectrum.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let qsd = std::fs::read_to_string(out.join("qsd.csv")).unwrap();
    assert_eq!(qsd.lines().next(), Some("x,weight,psi0,qsd_density,qed_density"));
}

#[test]
fn seed_flag_overrides_config_and_threads_do_not_matter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("{POLY}sim.n_paths = 3000\nsim.horizon = 2.0\nsim.seed = 1\n"),
    );
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["simulate", "--config", &cfg, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = qsdlab(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.join("hits.csv")).unwrap()
    };
    let base = run("a", &["--threads", "1"]);
    assert_eq!(base, run("b", &["--threads", "4"]));
    assert_ne!(base, run("c", &["--seed", "2"]));
    assert_eq!(run("d", &["--seed", "2", "--threads", "3"]), run("e", &["--seed", "2"]));
}

#[test]
fn validate_exits_one_on_failure_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    // Kernel suite includes a check that fails for this model.
    let cfg = write(dir.path(), "c.toml", &format!("{POLY}validate.suites = [\"kernel\"]\n"));
    let out = dir.path().join("out");
    let o = qsdlab(&["validate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["checks"].as_array().unwrap().len(), 18);
    assert_eq!(report["checks"][0]["status"], "PASS");
    assert_eq!(report["checks"][5]["status"], "SKIPPED");
}
