//! Survival curve and decay rate of the killed process from x0 = 1.
use std::time::Instant;

use qsdlab::model_measure::SigmaProfile;
use qsdlab::simulation::{fit_decay_rate, run_ensemble, SimConfig};
use qsdlab::stable_kernels::Alpha;

fn main() -> qsdlab::Result<()> {
    let profile = SigmaProfile::polynomial(Alpha::new(1.5)?, 2.0)?;
    let n_paths = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20_000);
    for eps in [1e-2, 1e-3, 10f64.powf(-3.5)] {
        let cfg = SimConfig { n_paths, eps, ..SimConfig::default() };
        let start = Instant::now();
        let stats = run_ensemble(&profile, &cfg)?;
        let fit = fit_decay_rate(&stats, (0.5, 2.5))?;
        println!(
            "eps {eps:.2e}: lambda {:.4} +- {:.4}, substeps/path {:.0}, escaped {}, crossings {}, {:.1}s",
            fit.lambda_hat,
            fit.std_error,
            stats.flags.substeps as f64 / n_paths as f64,
            stats.flags.escaped,
            stats.flags.crossings,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
