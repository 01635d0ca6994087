//! Green functions of the killed stable process at a few points.
use qsdlab::stable_kernels::{Alpha, StableKernel};

fn main() -> qsdlab::Result<()> {
    for a in [1.2, 1.5, 1.8] {
        let k = StableKernel::new(Alpha::new(a)?)?;
        println!("alpha {a}: omega {:.6}, limit constant {:.6}", k.omega_alpha(), k.exterior_limit_constant());
        for (x, y) in [(1.0, 1.0), (1.0, -1.0), (2.0, 0.5), (10.0, 3.0)] {
            println!("  G0({x}, {y}) = {:.6}", k.green_point_killed(x, y));
        }
        // Exterior of [-1, 1]: G(x, y) / h(y) flattens out as x grows.
        let y = 2.0;
        for x in [10.0, 1e2, 1e3, 1e4] {
            println!("  G_ext({x:e}, {y}) / h({y}) = {:.6}", k.green_exterior_unit(x, y)? / k.h(y)?);
        }
    }
    Ok(())
}
