//! Property tests over random inputs.
use proptest::prelude::*;

use qsdlab::model_measure::{polynomial_entrance, SigmaProfile};
use qsdlab::simulation::{run_ensemble, SimConfig};
use qsdlab::stable_kernels::{Alpha, StableKernel};

fn signed(m: f64, neg: bool) -> f64 {
    if neg { -m } else { m }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn point_kernel_symmetric_and_bounded(
        a in 1.05f64..1.95, lx in -3.0f64..3.0, ly in -3.0f64..3.0, nx: bool, ny: bool,
    ) {
        let k = StableKernel::new(Alpha::new(a).unwrap()).unwrap();
        let (x, y) = (signed(10f64.powf(lx), nx), signed(10f64.powf(ly), ny));
        let g = k.green_point_killed(x, y);
        prop_assert!((g - k.green_point_killed(y, x)).abs() <= 1e-12 * g.abs().max(1.0));
        prop_assert!(g > 0.0);
        prop_assert!(g <= k.omega_alpha() * x.abs().min(y.abs()).powf(a - 1.0) * (1.0 + 1e-12));
    }

    #[test]
    fn exterior_kernel_scales(
        lr in -1.5f64..1.5, lx in 0.01f64..1.2, ly in 0.01f64..1.2, nx: bool, ny: bool,
    ) {
        let k = StableKernel::new(Alpha::new(1.5).unwrap()).unwrap();
        let r = 10f64.powf(lr);
        let (x, y) = (signed(r * 10f64.powf(lx), nx), signed(r * 10f64.powf(ly), ny));
        prop_assume!((x - y).abs() > 1e-9 * r);
        let direct = k.green_exterior(r, x, y).unwrap();
        let scaled = r.sqrt() * k.green_exterior_unit(x / r, y / r).unwrap();
        prop_assert!((direct - scaled).abs() <= 1e-10 * scaled.abs());
    }

    #[test]
    fn hitting_probability_is_a_probability(a in 1.1f64..1.9, x in 0.01f64..0.99, lr in 0.0f64..3.0) {
        let k = StableKernel::new(Alpha::new(a).unwrap()).unwrap();
        let r = 10f64.powf(lr);
        let p = k.hitting_zero_probability(r, x * r).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn entrance_follows_gamma(a in 1.1f64..1.9, g in 1.05f64..4.0) {
        let d = polynomial_entrance(Alpha::new(a).unwrap(), g).unwrap();
        prop_assert!(d.entrance_integral.is_finite());
        prop_assert!(d.delta.is_finite());
        let lower = polynomial_entrance(Alpha::new(a).unwrap(), g / (1.0 + a * g)).unwrap();
        prop_assert!(!lower.entrance_integral.is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn survival_is_monotone_and_bounded(seed: u64, x0 in 0.2f64..4.0) {
        let profile = SigmaProfile::polynomial(Alpha::new(1.5).unwrap(), 2.0).unwrap();
        let cfg = SimConfig { n_paths: 400, horizon: 1.0, x0, seed, checkpoints: vec![0.5], ..SimConfig::default() };
        let stats = run_ensemble(&profile, &cfg).unwrap();
        let curve = stats.survival_curve();
        prop_assert!(curve.windows(2).all(|w| w[1].fraction <= w[0].fraction));
        prop_assert!(curve.iter().all(|p| (0.0..=1.0).contains(&p.fraction)));
        let f = stats.flags;
        prop_assert_eq!(f.killed + f.killed_crossing + f.censored + f.escaped, 400);
    }
}
