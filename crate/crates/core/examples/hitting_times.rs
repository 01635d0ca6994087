//! Mean hitting time of [-R, R]: quadrature, bound and Monte Carlo.
use qsdlab::model_measure::{hitting_time_upper_bound, mean_hitting_time, SigmaProfile};
use qsdlab::simulation::{interval_hitting_mc, SimConfig};
use qsdlab::stable_kernels::{Alpha, StableKernel};

fn main() -> qsdlab::Result<()> {
    let alpha = Alpha::new(1.5)?;
    let profile = SigmaProfile::polynomial(alpha, 2.0)?;
    let n_paths = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let (r, x0) = (1.0, 2.0);
    let quad = mean_hitting_time(&profile, r, x0)?;
    let bound = hitting_time_upper_bound(&profile, r)?;
    let cfg = SimConfig { n_paths, horizon: 50.0, ..SimConfig::default() };
    let mc = interval_hitting_mc(&profile, r, x0, &cfg)?;
    println!("E_{x0}[T] quadrature {quad:.5}, MC {:.5} +- {:.5}, bound {bound}", mc.mean, mc.std_error);

    let k = StableKernel::new(alpha)?;
    for r in [1.0, 10.0, 100.0, 1000.0] {
        println!("P_0.5[hit 0 before leaving (-{r}, {r})] = {:.6}", k.hitting_zero_probability(r, 0.5)?);
    }
    Ok(())
}
