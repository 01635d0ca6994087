//! One test per acceptance check, all sharing a single validate run of the
//! polynomial example (alpha 1.5, sigma = (1+|x|)^2).
use std::path::PathBuf;
use std::sync::OnceLock;

use qsdlab::commands::{cmd_validate, Status, ValidateHooks, ValidationReport};
use qsdlab::config::ExperimentConfig;

struct Run {
    report: ValidationReport,
    out: PathBuf,
    _dir: tempfile::TempDir,
}

fn run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let cfg = ExperimentConfig::polynomial(1.5, 2.0);
        let report = cmd_validate(&cfg, &out, ValidateHooks::default()).expect("validate runs");
        Run { report, out, _dir: dir }
    })
}

fn check(id: u32) {
    let r = run();
    let c = r.report.check(id);
    let status = match c.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skipped => "SKIPPED",
        Status::Refused => "REFUSED",
    };
    println!(
        "{status} [{id:>2}] {}: measured {:?}, tolerance {:?}",
        c.name, c.measured, c.tolerance
    );
    for m in &c.measurements {
        println!("    {} = {:.6e} {} {:?}", m.name, m.value, m.relation, m.tolerance);
    }
    if !c.note.is_empty() {
        println!("    note: {}", c.note);
    }
    assert!(r.out.join("report.json").exists());
    assert_eq!(c.status, Status::Pass, "{} did not pass", c.name);
}

#[test]
fn kernel_identities() {
    check(1);
}

#[test]
fn exterior_kernel_limit() {
    check(2);
}

#[test]
fn exterior_kernel_scaling() {
    check(3);
}

#[test]
fn entrance_quantities() {
    check(4);
}

#[test]
fn entrance_dichotomy() {
    check(5);
}

#[test]
fn hilbert_schmidt_bound() {
    check(6);
}

#[test]
fn spectrum() {
    check(7);
}

#[test]
fn qsd_qed_normalization() {
    check(8);
}

#[test]
fn qsd_exit_law() {
    check(9);
}

#[test]
fn yaglom_rate() {
    check(10);
}

#[test]
fn uniform_decay_rate() {
    check(11);
}

#[test]
fn mc_decay_rate() {
    check(12);
}

#[test]
fn mc_yaglom_limit() {
    check(13);
}

#[test]
fn mc_qed() {
    check(14);
}

#[test]
fn mc_exponential_moments() {
    check(15);
}

#[test]
fn hitting_time_closure() {
    check(16);
}

#[test]
fn hitting_probability_ratio() {
    check(17);
}

#[test]
fn determinism() {
    check(18);
}
