//! Entrance from infinity for σ(x) = (1+|x|)^γ across γ.
use qsdlab::model_measure::{polynomial_entrance, SigmaProfile, hitting_time_upper_bound};
use qsdlab::stable_kernels::Alpha;

fn main() -> qsdlab::Result<()> {
    let alpha = Alpha::new(1.5)?;
    for gamma in [0.5, 0.8, 1.0, 1.5, 2.0, 4.0] {
        let d = polynomial_entrance(alpha, gamma)?;
        let bound = d.lambda0_lower.map(|b| format!("{b:.5}")).unwrap_or_else(|| "-".into());
        println!("gamma {gamma}: I {}, delta {}, lambda0 >= {bound}", d.entrance_integral, d.delta);
    }
    let p = SigmaProfile::polynomial(alpha, 2.0)?;
    for r in [0.1, 1.0, 10.0, 100.0] {
        println!("sup_x E_x[T_[-{r},{r}]] <= {}", hitting_time_upper_bound(&p, r)?);
    }
    Ok(())
}
