//! Numerical integration: fixed Gauss–Legendre rules for panel grids and an
//! adaptive Gauss–Kronrod (7/15) integrator for everything evaluated to
//! tolerance.
//!
//! Integrands with algebraic endpoint behaviour `(x - a)^p` are handled by
//! the power substitution `x = a + t^m`, which turns them into smooth (or at
//! least much smoother) functions of `t` before the panels ever see them.
//! Half-lines are mapped onto `[0, 1)` with `y = a + u / (1 - u)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights affinely mapped onto `[a, b]`, in increasing order.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// Kronrod 15-point abscissae and weights, with the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Kronrod 15 / Gauss 7 pair on `[a, b]`: (kronrod, |kronrod - gauss|).
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive Gauss–Kronrod integrator: the segment with the largest
/// error estimate is bisected until the summed estimate meets the tolerance.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_segments: 4000,
        }
    }
}

impl Adaptive {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// Integral of `f` over the finite interval `[a, b]` (either orientation).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
            });
        }
        if b < a {
            let e = self.integrate(f, b, a)?;
            return Ok(Estimate {
                value: -e.value,
                error: e.error,
            });
        }
        let (v, e) = gauss_kronrod_15(&f, a, b);
        let mut heap = BinaryHeap::new();
        heap.push(Segment {
            a,
            b,
            value: v,
            error: e,
        });
        let mut total = v;
        let mut total_err = e;
        loop {
            if !total.is_finite() || !total_err.is_finite() {
                return Err(Error::Quadrature {
                    estimate: total,
                    error: total_err,
                });
            }
            if total_err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                break;
            }
            if heap.len() >= self.max_segments {
                // Accept when remaining error is pure roundoff.
                if total_err <= 1e3 * f64::EPSILON * heap.iter().map(|s| s.value.abs()).sum::<f64>() {
                    break;
                }
                return Err(Error::Quadrature {
                    estimate: total,
                    error: total_err,
                });
            }
            let worst = heap.pop().expect("heap is never empty here");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Cannot split further in floating point; keep it and stop refining.
                heap.push(worst);
                if total_err <= 1e-8 * total.abs().max(self.abs_tol) {
                    break;
                }
                return Err(Error::Quadrature {
                    estimate: total,
                    error: total_err,
                });
            }
            let (v1, e1) = gauss_kronrod_15(&f, worst.a, mid);
            let (v2, e2) = gauss_kronrod_15(&f, mid, worst.b);
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.error;
            heap.push(Segment {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
        }
        // Resum to shed accumulated update roundoff.
        let value = heap.iter().map(|s| s.value).sum();
        let error = heap.iter().map(|s| s.error).sum();
        Ok(Estimate { value, error })
    }

    /// `∫_a^b f` for `f` behaving like `(x - a)^p` near `a`, via
    /// `x = a + t^m`. `m = 1/(1+p)` makes a pure power flat.
    pub fn integrate_left_power<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        m: f64,
    ) -> Result<Estimate> {
        debug_assert!(b >= a && m > 0.0);
        let upper = (b - a).powf(1.0 / m);
        self.integrate(
            |t| {
                if t <= 0.0 {
                    return 0.0;
                }
                let x = (a + t.powf(m)).min(b);
                f(x) * m * t.powf(m - 1.0)
            },
            0.0,
            upper,
        )
    }

    /// Mirror image of [`Adaptive::integrate_left_power`] for the right endpoint.
    pub fn integrate_right_power<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        m: f64,
    ) -> Result<Estimate> {
        debug_assert!(b >= a && m > 0.0);
        let upper = (b - a).powf(1.0 / m);
        self.integrate(
            |t| {
                if t <= 0.0 {
                    return 0.0;
                }
                let x = (b - t.powf(m)).max(a);
                f(x) * m * t.powf(m - 1.0)
            },
            0.0,
            upper,
        )
    }

    /// `∫_a^b f` with power substitutions at both ends (split at the midpoint).
    pub fn integrate_both_power<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        m_left: f64,
        m_right: f64,
    ) -> Result<Estimate> {
        let mid = 0.5 * (a + b);
        Ok(self.integrate_left_power(&f, a, mid, m_left)?
            + self.integrate_right_power(&f, mid, b, m_right)?)
    }

    /// `∫_a^∞ f` through `y = a + τ^{-m} - 1`, `τ ∈ (0, 1]`. With `m = 1` this is
    /// the map `y = a + u/(1 - u)` written in `τ = 1 - u`, which keeps full
    /// relative precision far out. An `f` decaying like `y^{-s}` becomes
    /// `τ^{m(s-1)-1}`, so `m = 2/(s-1)` leaves a smooth integrand.
    pub fn integrate_tail_power<F: Fn(f64) -> f64>(&self, f: F, a: f64, m: f64) -> Result<Estimate> {
        debug_assert!(m > 0.0);
        self.integrate(
            |tau| {
                if tau <= 0.0 {
                    return 0.0;
                }
                let jump = tau.powf(-m);
                let y = a + (jump - 1.0);
                let v = f(y) * m * jump / tau;
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
        )
    }

    /// `∫_a^∞ f` through `y = a + u/(1 - u)`.
    pub fn integrate_tail<F: Fn(f64) -> f64>(&self, f: F, a: f64) -> Result<Estimate> {
        self.integrate(
            |u| {
                let one_minus = 1.0 - u;
                if one_minus <= 0.0 {
                    return 0.0;
                }
                let y = a + u / one_minus;
                let v = f(y) / (one_minus * one_minus);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1usize, 2, 5, 8, 16, 33] {
            let rule = GaussLegendre::new(n);
            let wsum: f64 = rule.weights().iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n = {n}");
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = rule.integrate(|x| x.powi(deg as i32), -1.0, 1.0);
                assert!((got - exact).abs() < 1e-13, "n = {n}, degree {deg}");
            }
        }
    }

    #[test]
    fn gauss_legendre_nodes_sorted_and_symmetric() {
        let rule = GaussLegendre::new(9);
        let xs = rule.nodes();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        for i in 0..xs.len() {
            assert!((xs[i] + xs[xs.len() - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn kronrod_pair_exactness() {
        // Kronrod 15 integrates degree 22 exactly, Gauss 7 degree 13.
        for deg in 0..=22 {
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let (k, e) = gauss_kronrod_15(&|x: f64| x.powi(deg), -1.0, 1.0);
            assert!((k - exact).abs() < 1e-14, "degree {deg}");
            if deg <= 13 {
                assert!(e < 1e-14, "degree {deg}");
            }
        }
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let q = Adaptive::default();
        let e = q.integrate(|x| x.sqrt(), 0.0, 1.0).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() < 1e-11);
        let e = q
            .integrate_left_power(|x: f64| x.powf(-0.25), 0.0, 1.0, 1.0 / 0.75)
            .unwrap();
        assert!((e.value - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tail_map() {
        let q = Adaptive::default();
        let e = q.integrate_tail(|y| (-y).exp(), 2.0).unwrap();
        assert!((e.value - (-2.0f64).exp()).abs() < 1e-12);
        let e = q.integrate_tail(|y| 1.0 / (y * y), 1.0).unwrap();
        assert!((e.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let q = Adaptive::default();
        let a = q.integrate(|x| x * x, 0.0, 3.0).unwrap().value;
        let b = q.integrate(|x| x * x, 3.0, 0.0).unwrap().value;
        assert!((a - 9.0).abs() < 1e-12 && (a + b).abs() < 1e-15);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let q = Adaptive {
            max_segments: 8,
            ..Adaptive::default()
        };
        let err = q.integrate(|x| (1.0 / x).sin(), 1e-6, 1.0).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
