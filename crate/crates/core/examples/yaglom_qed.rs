//! Quasi-stationary and quasi-ergodic laws, and convergence of the
//! conditioned law toward the QSD.
use qsdlab::model_measure::SigmaProfile;
use qsdlab::spectral::{solve, Extent};
use qsdlab::stable_kernels::Alpha;

fn main() -> qsdlab::Result<()> {
    let profile = SigmaProfile::polynomial(Alpha::new(1.5)?, 2.0)?;
    let dec = solve(&profile, 200, Extent::Auto)?;
    let grid = dec.grid();
    let qsd = dec.qsd()?;
    let qed = dec.qed();
    println!("nu mass {:.10}, m mass {:.10}", qsd.mass(grid), qed.mass(grid));
    println!("{:>10} {:>12} {:>12}", "x", "nu", "m");
    for x in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let i = grid.nearest_node(x);
        println!("{:>10.4} {:>12.5e} {:>12.5e}", grid.nodes()[i], qsd.density[i], qed.density[i]);
    }
    let node = grid.nearest_node(1.0);
    let times: Vec<f64> = (1..=8).map(|k| 0.25 * k as f64).collect();
    let curve = dec.yaglom_tv_curve(node, &times)?;
    for (t, tv) in &curve.points {
        println!("t {t:.2}: TV(law given survival, nu) = {tv:.3e}");
    }
    let rate = dec.yaglom_rate(node, 21)?;
    println!("fitted TV slope {:.4}, gap {:.4}", rate.slope, rate.gap);
    Ok(())
}
