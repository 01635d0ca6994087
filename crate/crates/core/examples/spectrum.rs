//! Leading eigenvalues of the killed generator and their grid convergence.
use qsdlab::model_measure::SigmaProfile;
use qsdlab::spectral::{compare, solve, Extent};
use qsdlab::stable_kernels::Alpha;

fn main() -> qsdlab::Result<()> {
    let profile = SigmaProfile::polynomial(Alpha::new(1.5)?, 2.0)?;
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200);
    let coarse = solve(&profile, n, Extent::Auto)?;
    let fine = solve(&profile, 2 * n, Extent::Fixed(coarse.grid().truncation()))?;
    println!("truncation L = {:.4e}, retained {}", coarse.grid().truncation(), coarse.retained());
    for (k, l) in coarse.eigenvalues().iter().take(6).enumerate() {
        println!("lambda_{k} = {l:.8}");
    }
    let r = compare(&profile, &coarse, &fine)?;
    println!("relative change n={n} -> {}: {:.3e}", 2 * n, r.relative_change[0]);
    println!("ground state residual {:.2e}", coarse.ground_state_residual());
    println!("Hilbert-Schmidt norm {:.6}", coarse.hs_norm());
    Ok(())
}
