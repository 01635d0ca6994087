//! Closed-form Green functions of the driving symmetric α-stable process.
//!
//! The process `X` is normalized so that `E exp(iuX_t) = exp(-t|u|^α)`. With
//! that normalization the Green function of `X` killed on hitting the origin
//! is
//!
//! ```text
//! G⁰(x, y) = (ω_α / 2) (|x|^{α-1} + |y|^{α-1} - |x - y|^{α-1}),
//! ω_α = -1 / (cos(πα/2) Γ(α)),
//! ```
//!
//! and the Green function of `X` killed on entering `[-1, 1]` is
//!
//! ```text
//! G(x, y) = c_α (|x - y|^{α-1} h(|xy - 1| / |x - y|) - (α - 1) h(x) h(y)),
//! c_α = 2^{1-α} / Γ(α/2)²,   h(x) = ∫_1^{|x|} (z² - 1)^{α/2 - 1} dz.
//! ```
//!
//! Everything here is a pure function of its arguments; a [`StableKernel`]
//! caches the α-dependent constants and is freely shareable between threads.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::Adaptive;
use crate::special::gamma;

/// Stability index, restricted to the open interval (1, 2).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 1.0 && value < 2.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::AlphaRange(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// α/2 - 1, the exponent inside h.
    #[inline]
    fn h_exponent(self) -> f64 {
        0.5 * self.0 - 1.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

/// ω_α = -1/(cos(πα/2) Γ(α)).
pub fn omega_alpha(alpha: Alpha) -> f64 {
    let a = alpha.value();
    -1.0 / ((0.5 * PI * a).cos() * gamma(a))
}

/// c_α = 2^{1-α}/Γ(α/2)².
pub fn c_alpha(alpha: Alpha) -> f64 {
    let a = alpha.value();
    let g = gamma(0.5 * a);
    2f64.powf(1.0 - a) / (g * g)
}

/// `J_α = ∫_1^∞ h'(v)/(1+v) dv`, the integral shared by the exterior limit constants.
///
/// `[1, 2]` uses `v = 1 + t^{2/α}`; `[2, ∞)` uses `v = w^{-1/(2-α)}`, after
/// which both integrands are bounded and smooth.
fn exterior_tail_integral(alpha: Alpha) -> Result<f64> {
    let a = alpha.value();
    let beta = alpha.h_exponent();
    let m = 2.0 / a;
    let q = 1.0 / (2.0 - a);
    let quad = Adaptive::with_tol(1e-15, 1e-13);
    let near = quad.integrate(|t| m * (2.0 + t.powf(m)).powf(beta - 1.0), 0.0, 1.0)?;
    let w_max = 2f64.powf(-(2.0 - a));
    let far = quad.integrate(
        |w| {
            let wq = w.powf(q);
            q * (1.0 - wq * wq).powf(beta) / (1.0 + wq)
        },
        0.0,
        w_max,
    )?;
    Ok(near.value + far.value)
}

/// `K_α = 2c_α(1-α/2)Γ(α/2)/Γ(1-α/2) · ∫_1^∞ h'(v)/(1+v) dv`.
///
/// This is the constant as commonly stated for the limit of the exterior
/// Green function. See [`StableKernel::exterior_limit_constant`] for the
/// value the exterior kernel formula actually converges to.
pub fn k_alpha_constant(alpha: Alpha) -> Result<f64> {
    let a = alpha.value();
    let prefactor = 2.0 * c_alpha(alpha) * (1.0 - 0.5 * a) * gamma(0.5 * a) / gamma(1.0 - 0.5 * a);
    Ok(prefactor * exterior_tail_integral(alpha)?)
}

/// The α-dependent constants of the kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelConstants {
    pub omega_alpha: f64,
    pub c_alpha: f64,
    pub k_alpha: f64,
}

/// Above this argument h switches from quadrature to its binomial tail series.
const H_SERIES_START: f64 = 3.0;

/// Exact kernels for one stability index.
#[derive(Debug, Clone)]
pub struct StableKernel {
    alpha: Alpha,
    constants: KernelConstants,
    exterior_limit: f64,
    h_at_series_start: f64,
    // (coefficient, exponent) pairs of the tail expansion of h.
    h_series: Vec<(f64, f64)>,
}

impl StableKernel {
    pub fn new(alpha: Alpha) -> Result<Self> {
        let a = alpha.value();
        let beta = alpha.h_exponent();
        let omega = omega_alpha(alpha);
        let c = c_alpha(alpha);
        let j = exterior_tail_integral(alpha)?;
        let k = 2.0 * c * (1.0 - 0.5 * a) * gamma(0.5 * a) / gamma(1.0 - 0.5 * a) * j;

        // (s² - 1)^β = Σ_k binom(β, k)(-1)^k s^{2β - 2k}, valid for s > 1.
        let mut h_series = Vec::new();
        let mut coef = 1.0;
        for k in 0..200 {
            if k > 0 {
                coef *= -(beta - (k as f64 - 1.0)) / k as f64;
            }
            let exponent = 2.0 * beta - 2.0 * k as f64 + 1.0;
            let term = coef / exponent;
            h_series.push((term, exponent));
            if k > 2 && (term * H_SERIES_START.powf(exponent)).abs() < 1e-19 {
                break;
            }
        }
        let h_at_series_start = h_by_quadrature(alpha, H_SERIES_START)?;
        // h(x) - x^{α-1}/(α-1) → C_h; every other series term vanishes at infinity.
        let h_offset = h_at_series_start
            - h_series
                .iter()
                .map(|&(coef, e)| coef * H_SERIES_START.powf(e))
                .sum::<f64>();

        Ok(Self {
            alpha,
            constants: KernelConstants {
                omega_alpha: omega,
                c_alpha: c,
                k_alpha: k,
            },
            exterior_limit: -(a - 1.0) * c * h_offset,
            h_at_series_start,
            h_series,
        })
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn constants(&self) -> KernelConstants {
        self.constants
    }

    pub fn omega_alpha(&self) -> f64 {
        self.constants.omega_alpha
    }

    pub fn c_alpha(&self) -> f64 {
        self.constants.c_alpha
    }

    pub fn k_alpha(&self) -> f64 {
        self.constants.k_alpha
    }

    /// The constant `lim_{x→∞} G(x, y) / h(y)` of the exterior kernel formula,
    /// `-(α-1) c_α C_h` with `C_h = lim (h(x) - x^{α-1}/(α-1))`. It coincides
    /// with `(α-1)ω_α/2`.
    pub fn exterior_limit_constant(&self) -> f64 {
        self.exterior_limit
    }

    /// Green function of X killed at the origin. Defined for all reals.
    #[inline]
    pub fn green_point_killed(&self, x: f64, y: f64) -> f64 {
        let p = self.alpha.value() - 1.0;
        0.5 * self.constants.omega_alpha * (y.abs().powf(p) + x.abs().powf(p) - (y - x).abs().powf(p))
    }

    /// `h(x) = ∫_1^{|x|} (z² - 1)^{α/2 - 1} dz`, for `|x| >= 1`.
    pub fn h(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        if !(ax >= 1.0) {
            return Err(Error::Domain(format!("h requires |x| >= 1, got {x}")));
        }
        Ok(self.h_unchecked(ax))
    }

    fn h_unchecked(&self, ax: f64) -> f64 {
        if ax <= 1.0 {
            return 0.0;
        }
        if ax <= H_SERIES_START {
            // Tolerances here are far below anything the callers resolve.
            return h_by_quadrature(self.alpha, ax).unwrap_or(f64::NAN);
        }
        let mut acc = self.h_at_series_start;
        for &(coef, e) in &self.h_series {
            acc += coef * (ax.powf(e) - H_SERIES_START.powf(e));
        }
        acc
    }

    /// Green function of X killed on entering `[-1, 1]`.
    ///
    /// Requires `|x| > 1`, `|y| > 1` and `x != y`.
    pub fn green_exterior_unit(&self, x: f64, y: f64) -> Result<f64> {
        if !(x.abs() > 1.0 && y.abs() > 1.0) {
            return Err(Error::Domain(format!(
                "exterior kernel needs |x| > 1 and |y| > 1, got ({x}, {y})"
            )));
        }
        if x == y {
            return Err(Error::Domain(format!("exterior kernel diagonal x = y = {x}")));
        }
        Ok(self.exterior_unit_unchecked(x, y))
    }

    fn exterior_unit_unchecked(&self, x: f64, y: f64) -> f64 {
        let a = self.alpha.value();
        let d = (x - y).abs();
        let z = (x * y - 1.0).abs() / d;
        let v = self.constants.c_alpha
            * (d.powf(a - 1.0) * self.h_unchecked(z)
                - (a - 1.0) * self.h_unchecked(x.abs()) * self.h_unchecked(y.abs()));
        v.max(0.0)
    }

    /// Green function of X killed on entering `[-R, R]`, evaluated directly
    /// from the R-form
    /// `c_α(|x-y|^{α-1} h(|xy - R²|/(R|x-y|)) - (α-1) R^{α-1} h(x/R) h(y/R))`.
    pub fn green_exterior(&self, r: f64, x: f64, y: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        if !(x.abs() > r && y.abs() > r) {
            return Err(Error::Domain(format!(
                "exterior kernel needs |x| > R and |y| > R, got R = {r}, ({x}, {y})"
            )));
        }
        if x == y {
            return Err(Error::Domain(format!("exterior kernel diagonal x = y = {x}")));
        }
        Ok(self.exterior_unchecked(r, x, y))
    }

    pub(crate) fn exterior_unchecked(&self, r: f64, x: f64, y: f64) -> f64 {
        let a = self.alpha.value();
        let d = (x - y).abs();
        let z = (x * y - r * r).abs() / (r * d);
        let v = self.constants.c_alpha
            * (d.powf(a - 1.0) * self.h_unchecked(z)
                - (a - 1.0) * r.powf(a - 1.0) * self.h_unchecked(x.abs() / r) * self.h_unchecked(y.abs() / r));
        v.max(0.0)
    }

    /// `G^{(-R,R)}(0, 0) = c_α R^{α-1} / (α - 1)`.
    pub fn green_interval_origin(&self, r: f64) -> f64 {
        let a = self.alpha.value();
        self.constants.c_alpha * r.powf(a - 1.0) / (a - 1.0)
    }

    /// `G^{(-R,R)}(x, 0) = c_α |x|^{α-1} ∫_1^{R/|x|} (s+1)^{α/2-1}(s-1)^{α/2-1} ds`
    /// for `|x| < R`; the origin uses the closed form.
    pub fn green_interval_at_zero(&self, r: f64, x: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        if !(x.abs() < r) {
            return Err(Error::Domain(format!("interval kernel needs |x| < R, got x = {x}, R = {r}")));
        }
        if x == 0.0 {
            return Ok(self.green_interval_origin(r));
        }
        let a = self.alpha.value();
        let ax = x.abs();
        Ok(self.constants.c_alpha * ax.powf(a - 1.0) * self.h_unchecked(r / ax))
    }

    /// `P_x[T_0 < exit time of (-R, R)]` as the ratio of interval Green values.
    pub fn hitting_zero_probability(&self, r: f64, x: f64) -> Result<f64> {
        let num = self.green_interval_at_zero(r, x)?;
        Ok((num / self.green_interval_origin(r)).clamp(0.0, 1.0))
    }
}

/// h by adaptive quadrature after `z = 1 + t^{2/α}`, which removes the
/// `(z - 1)^{α/2-1}` endpoint singularity:
/// `h(x) = (2/α) ∫_0^{(|x|-1)^{α/2}} (2 + t^{2/α})^{α/2-1} dt`.
fn h_by_quadrature(alpha: Alpha, ax: f64) -> Result<f64> {
    if ax <= 1.0 {
        return Ok(0.0);
    }
    let a = alpha.value();
    let beta = alpha.h_exponent();
    let m = 2.0 / a;
    let upper = (ax - 1.0).powf(0.5 * a);
    let e = Adaptive::with_tol(1e-16, 1e-14).integrate(|t| (2.0 + t.powf(m)).powf(beta), 0.0, upper)?;
    Ok(m * e.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(a: f64) -> StableKernel {
        StableKernel::new(Alpha::new(a).unwrap()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn alpha_range_is_open() {
        for bad in [1.0, 2.0, 0.5, 2.3, f64::NAN, f64::INFINITY] {
            assert!(matches!(Alpha::new(bad), Err(Error::AlphaRange(_))), "{bad}");
        }
        assert!(Alpha::new(1.0001).is_ok());
        assert!(Alpha::new(1.9999).is_ok());
    }

    // Reference values below come from 30-digit mpmath evaluations of the
    // same closed forms (independent of the Lanczos gamma used here).
    #[test]
    fn omega_reference_values() {
        assert!(rel(omega_alpha(Alpha::new(1.5).unwrap()), 1.595_769_121_605_730_7) < 1e-13);
        assert!(rel(omega_alpha(Alpha::new(1.2).unwrap()), 3.524_480_662_499_879_7) < 1e-13);
        assert!(rel(omega_alpha(Alpha::new(1.1).unwrap()), 6.719_344_140_956_743_5) < 1e-13);
        assert!(rel(omega_alpha(Alpha::new(1.9).unwrap()), 1.052_714_800_420_875_8) < 1e-13);
    }

    #[test]
    fn omega_tends_to_one_near_two() {
        let w = omega_alpha(Alpha::new(2.0 - 1e-9).unwrap());
        assert!((w - 1.0).abs() < 1e-6);
    }

    #[test]
    fn point_kernel_examples() {
        let k = kernel(1.5);
        let w = k.omega_alpha();
        assert_eq!(k.green_point_killed(1.0, 0.0), 0.0);
        assert!(rel(k.green_point_killed(1.0, 1.0), w) < 1e-15);
        assert!(rel(k.green_point_killed(1.0, 2.0), 0.5 * w * 2f64.sqrt()) < 1e-15);
        assert!(rel(k.green_point_killed(1.0, 2.0), 1.128_379_167_095_512_6) < 1e-13);
    }

    #[test]
    fn h_examples() {
        let k = kernel(1.5);
        assert_eq!(k.h(1.0).unwrap(), 0.0);
        assert_eq!(k.h(-2.0).unwrap(), k.h(2.0).unwrap());
        assert!(rel(k.h(2.0).unwrap(), 1.070_574_134_457_089_9) < 1e-12);
        assert!(k.h(0.5).is_err());
    }

    #[test]
    fn h_series_and_quadrature_agree() {
        for a in [1.1, 1.5, 1.9] {
            let k = kernel(a);
            for x in [3.0001, 3.5, 7.0, 40.0, 1e4] {
                let series = k.h(x).unwrap();
                let direct = h_by_quadrature(k.alpha(), x).unwrap();
                assert!(rel(series, direct) < 1e-11, "alpha {a}, x {x}: {series} vs {direct}");
            }
        }
    }

    #[test]
    fn h_strictly_increasing() {
        let k = kernel(1.3);
        let xs: Vec<f64> = (0..200).map(|i| 1.0 + 0.07 * i as f64 * (1.0 + 0.1 * i as f64)).collect();
        let hs: Vec<f64> = xs.iter().map(|&x| k.h(x).unwrap()).collect();
        assert!(hs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn k_alpha_reference_values() {
        assert!(rel(k_alpha_constant(Alpha::new(1.5).unwrap()).unwrap(), 0.134_838_150_297_094_84) < 1e-10);
        assert!(rel(k_alpha_constant(Alpha::new(1.2).unwrap()).unwrap(), 0.236_620_909_368_584_34) < 1e-10);
        let k18 = k_alpha_constant(Alpha::new(1.8).unwrap()).unwrap();
        assert!(rel(k18, 0.050_723_727_438_963_143) < 1e-10, "{k18}");
        for a in [1.05, 1.3, 1.7, 1.95] {
            let k = k_alpha_constant(Alpha::new(a).unwrap()).unwrap();
            assert!(k > 0.0 && k.is_finite());
        }
    }

    #[test]
    fn exterior_limit_constant_matches_omega_route() {
        // Two routes: -(α-1)c_α C_h from the h expansion and (α-1)ω_α/2 in closed form.
        for a in [1.1, 1.2, 1.5, 1.8, 1.95] {
            let k = kernel(a);
            let closed = (a - 1.0) * k.omega_alpha() / 2.0;
            assert!(rel(k.exterior_limit_constant(), closed) < 1e-10, "alpha {a}");
        }
    }

    #[test]
    fn exterior_unit_examples() {
        let k = kernel(1.5);
        assert!(k.green_exterior_unit(3.0, 1.0 + 1e-12).unwrap() < 1e-5);
        assert_eq!(k.green_exterior_unit(2.0, 3.0).unwrap(), k.green_exterior_unit(3.0, 2.0).unwrap());
        assert!(rel(k.green_exterior_unit(2.0, 3.0).unwrap(), 0.863_167_802_889_312_66) < 1e-11);
        assert!(k.green_exterior_unit(0.5, 3.0).is_err());
        assert!(k.green_exterior_unit(2.0, 2.0).is_err());
    }

    #[test]
    fn exterior_vanishes_at_boundary() {
        let k = kernel(1.5);
        let vals: Vec<f64> = [1e-2, 1e-4, 1e-6, 1e-8]
            .iter()
            .map(|d| k.green_exterior_unit(3.0, 1.0 + d).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(vals[3] < 1e-5);
    }

    #[test]
    fn exterior_r_form_examples() {
        let k = kernel(1.5);
        let unit = k.green_exterior_unit(2.0, 3.0).unwrap();
        assert!(rel(k.green_exterior(1.0, 2.0, 3.0).unwrap(), unit) < 1e-13);
        assert!(rel(k.green_exterior(2.0, 4.0, 6.0).unwrap(), 2f64.sqrt() * unit) < 1e-12);
    }

    #[test]
    fn interval_examples() {
        let k = kernel(1.5);
        assert!(rel(k.green_interval_at_zero(1.0, 0.0).unwrap(), 0.941_775_540_443_748_95) < 1e-13);
        assert!(rel(k.green_interval_at_zero(1.0, 0.5).unwrap(), 0.356_466_859_351_696_90) < 1e-12);
        assert!(k.green_interval_at_zero(1.0, 1.0 - 1e-12).unwrap() < 1e-5);
        assert!(k.green_interval_at_zero(1.0, 1.0).is_err());
    }

    #[test]
    fn hitting_probability_reference_curve() {
        let k = kernel(1.5);
        assert_eq!(k.hitting_zero_probability(3.0, 0.0).unwrap(), 1.0);
        let reference = [
            (1.0, 0.378_505_115_118_763_49),
            (10.0, 0.810_348_922_088_367_14),
            (100.0, 0.940_090_904_915_935_99),
            (1000.0, 0.981_055_718_676_398_97),
        ];
        let mut prev = 0.0;
        for (r, want) in reference {
            let p = k.hitting_zero_probability(r, 0.5).unwrap();
            assert!((p - want).abs() < 1e-11, "R = {r}: {p}");
            assert!(p >= prev);
            prev = p;
        }
        assert!(k.hitting_zero_probability(1.0, 1.0 - 1e-12).unwrap() < 1e-5);
    }
}
