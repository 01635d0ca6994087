//! Validate on profiles that must be refused, and a perturbed ground state
//! that must be caught.
use qsdlab::commands::{cmd_validate, Status, ValidateHooks};
use qsdlab::config::{ExperimentConfig, Suite};

#[test]
fn no_entrance_refuses_spectral_and_mc_checks() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::polynomial(1.5, 0.8);
    cfg.validate.suites = vec![Suite::Entrance, Suite::Spectral, Suite::Mc, Suite::Hitting];
    let r = cmd_validate(&cfg, dir.path(), ValidateHooks::default()).unwrap();
    for id in 6..=16 {
        assert_eq!(r.check(id).status, Status::Refused, "check {id}");
        assert!(r.check(id).note.contains("ENTRANCE_FAIL"));
    }
    assert_eq!(r.check(1).status, Status::Skipped);
    assert!(r.spectrum.is_none());
}

#[test]
fn perturbed_ground_state_fails_the_residual() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::polynomial(1.5, 2.0);
    cfg.grid.n = 96;
    cfg.grid.refine = false;
    cfg.validate.suites = vec![Suite::Spectral];
    let clean = cmd_validate(&cfg, dir.path(), ValidateHooks::default()).unwrap();
    assert_eq!(clean.check(7).status, Status::Pass, "{:?}", clean.check(7));
    let hooks = ValidateHooks { psi0_perturbation: Some(1e-3) };
    let bad = cmd_validate(&cfg, dir.path(), hooks).unwrap();
    let c = bad.check(7);
    assert_eq!(c.status, Status::Fail);
    let residual = c.measurements.iter().find(|m| m.name == "ground state residual").unwrap();
    assert_eq!(residual.pass, Some(false));
}
