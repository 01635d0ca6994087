//! The coefficient σ, the speed measure `μ(dx) = σ(x)^{-α} dx` and the
//! entrance-from-infinity functionals built on it.
//!
//! Divergence of the tail functionals is decided analytically from the tail
//! exponent of σ; quadrature is only ever asked for finite quantities.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{Adaptive, Estimate};
use crate::stable_kernels::{Alpha, StableKernel};

/// A tail functional that is finite, provably infinite, or not classifiable
/// from the available data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Finite { value: f64 },
    Divergent,
    Indeterminate { partial: f64, truncation: f64 },
}

impl Outcome {
    pub fn finite(self) -> Option<f64> {
        match self {
            Outcome::Finite { value } => Some(value),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Outcome::Finite { .. })
    }

    pub fn status(self) -> &'static str {
        match self {
            Outcome::Finite { .. } => "FINITE",
            Outcome::Divergent => "DIVERGENT",
            Outcome::Indeterminate { .. } => "INDETERMINATE",
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Finite { value } => write!(f, "FINITE({value})"),
            Outcome::Divergent => f.write_str("DIVERGENT"),
            Outcome::Indeterminate { partial, truncation } => {
                write!(f, "INDETERMINATE(partial {partial} up to {truncation})")
            }
        }
    }
}

/// Sampled σ with log-linear interpolation and power-law extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTable {
    xs: Vec<f64>,
    log_sigma: Vec<f64>,
    // Table given on x >= 0 only: σ is extended as an even function.
    mirrored: bool,
    left_slope: Option<f64>,
    right_slope: Option<f64>,
}

impl SigmaTable {
    pub fn new(xs: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if xs.len() != sigma.len() {
            return Err(Error::Table("x and sigma columns differ in length".into()));
        }
        if xs.len() < 2 {
            return Err(Error::Table("need at least two samples".into()));
        }
        if let Some(w) = xs.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::Table(format!("x must be strictly increasing ({} then {})", w[0], w[1])));
        }
        if let Some(s) = sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::Table(format!("sigma must be positive and finite, got {s}")));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::Table("x must be finite".into()));
        }
        let log_sigma: Vec<f64> = sigma.iter().map(|s| s.ln()).collect();
        let mirrored = xs[0] >= 0.0;
        let n = xs.len();
        let slope = |i: usize, j: usize| -> Option<f64> {
            let (a, b) = (xs[i], xs[j]);
            if a == 0.0 || b == 0.0 || a.signum() != b.signum() || a.abs().max(b.abs()) < 1.0 {
                return None;
            }
            Some((log_sigma[j] - log_sigma[i]) / (b.abs().ln() - a.abs().ln()))
        };
        let right_slope = slope(n - 2, n - 1);
        let left_slope = if mirrored { right_slope } else { slope(1, 0) };
        Ok(Self {
            xs,
            log_sigma,
            mirrored,
            left_slope,
            right_slope,
        })
    }

    /// Reads a two-column text file `x sigma(x)`; columns may be separated by
    /// whitespace or commas, `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ss = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::Table(format!("line {}: expected two columns", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Table(format!("line {}: not a number: {s}", lineno + 1)))
            };
            xs.push(parse(cols[0])?);
            ss.push(parse(cols[1])?);
        }
        Self::new(xs, ss)
    }

    fn log_sigma_at(&self, x: f64) -> f64 {
        let x = if self.mirrored { x.abs() } else { x };
        let n = self.xs.len();
        if x <= self.xs[0] {
            return match self.left_slope {
                Some(s) if !self.mirrored => self.log_sigma[0] + s * (x.abs() / self.xs[0].abs()).ln(),
                _ => self.log_sigma[0],
            };
        }
        if x >= self.xs[n - 1] {
            return match self.right_slope {
                Some(s) => self.log_sigma[n - 1] + s * (x / self.xs[n - 1]).ln(),
                None => self.log_sigma[n - 1],
            };
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.log_sigma[i] + t * (self.log_sigma[i + 1] - self.log_sigma[i])
    }

    fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.xs.clone();
        if self.mirrored {
            k.extend(self.xs.iter().filter(|x| **x > 0.0).map(|x| -x));
        }
        k.push(0.0);
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    fn outer_knot(&self, right: bool) -> f64 {
        if right {
            self.xs[self.xs.len() - 1]
        } else if self.mirrored {
            -self.xs[self.xs.len() - 1]
        } else {
            self.xs[0]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SigmaKind {
    /// σ(x) = scale · (1 + |x|)^γ.
    Polynomial { gamma: f64 },
    Tabulated(SigmaTable),
}

/// σ together with the normalization that makes μ a probability measure.
#[derive(Debug, Clone)]
pub struct SigmaProfile {
    alpha: Alpha,
    kind: SigmaKind,
    scale: f64,
    kernel: Arc<StableKernel>,
}

/// Power-law tail exponents (σ ~ |x|^p) on each side, when known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailExponents {
    pub left: Option<f64>,
    pub right: Option<f64>,
}

/// σ(x) = (2/(αγ-1))^{1/α} (1+|x|)^γ, whose speed measure has unit mass.
pub fn polynomial_sigma(alpha: Alpha, gamma: f64) -> Result<SigmaProfile> {
    SigmaProfile::polynomial(alpha, gamma)
}

impl SigmaProfile {
    pub fn polynomial(alpha: Alpha, gamma: f64) -> Result<Self> {
        let a = alpha.value();
        if !(gamma.is_finite() && a * gamma > 1.0) {
            return Err(Error::Domain(format!(
                "polynomial sigma needs alpha*gamma > 1 for a finite speed measure, got {}",
                a * gamma
            )));
        }
        let scale = (2.0 / (a * gamma - 1.0)).powf(1.0 / a);
        Ok(Self {
            alpha,
            kind: SigmaKind::Polynomial { gamma },
            scale,
            kernel: Arc::new(StableKernel::new(alpha)?),
        })
    }

    /// Tabulated σ, rescaled so that μ(ℝ) = 1.
    pub fn tabulated(alpha: Alpha, table: SigmaTable) -> Result<Self> {
        let a = alpha.value();
        let mut raw = Self {
            alpha,
            kind: SigmaKind::Tabulated(table),
            scale: 1.0,
            kernel: Arc::new(StableKernel::new(alpha)?),
        };
        let tails = raw.tail_exponents();
        for (side, p) in [("left", tails.left), ("right", tails.right)] {
            match p {
                None => {
                    return Err(Error::Table(format!(
                        "{side} tail exponent undetermined: need two samples with |x| >= 1 on that side"
                    )))
                }
                Some(p) if a * p <= 1.0 => {
                    return Err(Error::Table(format!(
                        "{side} tail sigma ~ |x|^{p} gives an infinite speed measure (need alpha*p > 1)"
                    )))
                }
                _ => {}
            }
        }
        let mass = raw.integrate_measure(|_| 1.0, f64::NEG_INFINITY, f64::INFINITY, &[])?;
        raw.scale = mass.value.powf(1.0 / a);
        Ok(raw)
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn kind(&self) -> &SigmaKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn kernel(&self) -> &StableKernel {
        &self.kernel
    }

    pub fn omega_alpha(&self) -> f64 {
        self.kernel.omega_alpha()
    }

    /// σ(x).
    #[inline]
    pub fn sigma(&self, x: f64) -> f64 {
        match &self.kind {
            SigmaKind::Polynomial { gamma } => self.scale * (1.0 + x.abs()).powf(*gamma),
            SigmaKind::Tabulated(t) => self.scale * t.log_sigma_at(x).exp(),
        }
    }

    /// Density σ(x)^{-α} of μ.
    #[inline]
    pub fn speed_density(&self, x: f64) -> f64 {
        let a = self.alpha.value();
        match &self.kind {
            SigmaKind::Polynomial { gamma } => 0.5 * (a * gamma - 1.0) * (1.0 + x.abs()).powf(-a * gamma),
            SigmaKind::Tabulated(t) => (-a * (self.scale.ln() + t.log_sigma_at(x))).exp(),
        }
    }

    /// True when σ(-x) = σ(x) for all x.
    pub fn is_even(&self) -> bool {
        match &self.kind {
            SigmaKind::Polynomial { .. } => true,
            SigmaKind::Tabulated(t) => {
                t.mirrored || {
                    let n = t.xs.len();
                    (0..n).all(|i| {
                        let j = n - 1 - i;
                        t.xs[i] == -t.xs[j] && (t.log_sigma[i] - t.log_sigma[j]).abs() < 1e-14
                    })
                }
            }
        }
    }

    pub fn tail_exponents(&self) -> TailExponents {
        match &self.kind {
            SigmaKind::Polynomial { gamma } => TailExponents {
                left: Some(*gamma),
                right: Some(*gamma),
            },
            SigmaKind::Tabulated(t) => TailExponents {
                left: t.left_slope,
                right: t.right_slope,
            },
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            SigmaKind::Polynomial { .. } => vec![0.0],
            SigmaKind::Tabulated(t) => t.knots(),
        }
    }

    /// `∫_lo^hi g(y) μ(dy)`, with `lo`/`hi` possibly infinite. The profile's own
    /// kinks and the caller's `extra` points are used as panel boundaries, and
    /// every finite piece gets a square-root substitution at both ends.
    pub fn integrate_measure<G: Fn(f64) -> f64>(
        &self,
        g: G,
        lo: f64,
        hi: f64,
        extra: &[f64],
    ) -> Result<Estimate> {
        self.integrate_measure_tol(g, lo, hi, extra, Adaptive::default())
    }

    pub fn integrate_measure_tol<G: Fn(f64) -> f64>(
        &self,
        g: G,
        lo: f64,
        hi: f64,
        extra: &[f64],
        quad: Adaptive,
    ) -> Result<Estimate> {
        if !(hi > lo) {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        let f = |y: f64| g(y) * self.speed_density(y);
        let mut pts: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .chain(extra.iter().copied())
            .filter(|p| p.is_finite() && *p > lo && *p < hi)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        if pts.is_empty() {
            // Need at least one finite anchor for the tail maps.
            pts.push(if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            });
        }
        let m = self.tail_map_power();
        let mut total = Estimate { value: 0.0, error: 0.0 };
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if lo.is_finite() {
            if first > lo {
                total = total + quad.integrate_both_power(&f, lo, first, 2.0, 2.0)?;
            }
        } else {
            total = total + left_half_line(&quad, &f, first, m)?;
        }
        for w in pts.windows(2) {
            total = total + quad.integrate_both_power(&f, w[0], w[1], 2.0, 2.0)?;
        }
        if hi.is_finite() {
            if hi > last {
                total = total + quad.integrate_both_power(&f, last, hi, 2.0, 2.0)?;
            }
        } else {
            total = total + right_half_line(&quad, &f, last, m)?;
        }
        Ok(total)
    }

    /// μ(ℝ), by quadrature.
    pub fn total_mass(&self) -> Result<f64> {
        Ok(self
            .integrate_measure(|_| 1.0, f64::NEG_INFINITY, f64::INFINITY, &[])?
            .value)
    }

    /// μ({|y| >= x}) for x >= 0.
    pub fn tail_mass(&self, x: f64) -> Result<f64> {
        let x = x.abs();
        match &self.kind {
            SigmaKind::Polynomial { gamma } => Ok((1.0 + x).powf(1.0 - self.alpha.value() * gamma)),
            SigmaKind::Tabulated(_) => {
                let right = self.integrate_measure(|_| 1.0, x, f64::INFINITY, &[])?.value;
                let left = self.integrate_measure(|_| 1.0, f64::NEG_INFINITY, -x, &[])?.value;
                Ok(left + right)
            }
        }
    }

    /// Power for the tail map, tuned so that `|y|^{α-1} σ(y)^{-α}`, the slowest
    /// integrand used anywhere, becomes smooth at infinity.
    fn tail_map_power(&self) -> f64 {
        let a = self.alpha.value();
        match self.min_tail_exponent() {
            Some(p) if a * p - (a - 1.0) > 1.05 => (2.0 / (a * p - a)).clamp(1.0, 40.0),
            _ => 40.0,
        }
    }

    /// Smallest tail exponent of σ over both sides, or None if either is unknown.
    fn min_tail_exponent(&self) -> Option<f64> {
        let t = self.tail_exponents();
        Some(t.left?.min(t.right?))
    }

    /// The truncation used when a tail cannot be classified.
    fn indeterminate_truncation(&self) -> f64 {
        match &self.kind {
            SigmaKind::Tabulated(t) => t.outer_knot(true).abs().max(t.outer_knot(false).abs()),
            SigmaKind::Polynomial { .. } => f64::INFINITY,
        }
    }
}

fn right_half_line<F: Fn(f64) -> f64>(quad: &Adaptive, f: &F, a: f64, m: f64) -> Result<Estimate> {
    let near = quad.integrate_both_power(f, a, a + 1.0, 2.0, 1.0)?;
    let far = quad.integrate_tail_power(f, a + 1.0, m)?;
    Ok(near + far)
}

fn left_half_line<F: Fn(f64) -> f64>(quad: &Adaptive, f: &F, b: f64, m: f64) -> Result<Estimate> {
    right_half_line(quad, &|y: f64| f(-y), -b, m)
}

/// `I = ∫ σ(x)^{-α} |x|^{α-1} dx`.
pub fn entrance_integral(profile: &SigmaProfile) -> Result<Outcome> {
    let a = profile.alpha.value();
    let g = |y: f64| y.abs().powf(a - 1.0);
    match profile.min_tail_exponent() {
        // Integrand ~ |x|^{α-1-αp}; finite iff α - 1 - αp < -1, i.e. p > 1.
        Some(p) if p <= 1.0 => Ok(Outcome::Divergent),
        Some(_) => Ok(Outcome::Finite {
            value: profile
                .integrate_measure(g, f64::NEG_INFINITY, f64::INFINITY, &[])?
                .value,
        }),
        None => {
            let t = profile.indeterminate_truncation();
            let partial = profile.integrate_measure(g, -t, t, &[])?.value;
            Ok(Outcome::Indeterminate { partial, truncation: t })
        }
    }
}

/// Supremum of `x^{α-1} μ(|y| >= x)` over x > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaBound {
    pub outcome: Outcome,
    /// Maximizer, or None when the supremum is only approached as x → ∞.
    pub argmax: Option<f64>,
}

/// `δ = sup_x |x|^{α-1} ∫_{|y| >= |x|} σ(y)^{-α} dy`.
///
/// Golden-section search in log x, started from every local maximum of a
/// 16-point log-spaced scan; the behaviour at infinity is decided from the
/// tail exponent.
pub fn delta_bound(profile: &SigmaProfile) -> Result<DeltaBound> {
    let a = profile.alpha.value();
    let p = match profile.min_tail_exponent() {
        Some(p) => p,
        None => {
            let t = profile.indeterminate_truncation();
            let partial = profile.tail_mass(t)? * t.powf(a - 1.0);
            return Ok(DeltaBound {
                outcome: Outcome::Indeterminate { partial, truncation: t },
                argmax: None,
            });
        }
    };
    // Objective ~ x^{α-1} · x^{1-αp} = x^{α(1-p)} at infinity.
    if p < 1.0 {
        return Ok(DeltaBound {
            outcome: Outcome::Divergent,
            argmax: None,
        });
    }
    let objective = |x: f64| -> Result<f64> { Ok(x.powf(a - 1.0) * profile.tail_mass(x)?) };
    let limit_at_infinity = if p == 1.0 { Some(tail_limit(profile)?) } else { None };

    const STARTS: usize = 16;
    let (lo, hi) = (1e-6f64.ln(), 1e6f64.ln());
    let grid: Vec<f64> = (0..STARTS)
        .map(|i| lo + (hi - lo) * i as f64 / (STARTS - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&s| objective(s.exp())).collect::<Result<_>>()?;

    let mut best = (f64::NEG_INFINITY, None);
    for i in 0..STARTS {
        let left_ok = i == 0 || vals[i] >= vals[i - 1];
        let right_ok = i == STARTS - 1 || vals[i] >= vals[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let a_br = grid[i.saturating_sub(1)];
        let b_br = grid[(i + 1).min(STARTS - 1)];
        let (s, v) = golden_max(|s| objective(s.exp()), a_br, b_br)?;
        if v > best.0 {
            best = (v, Some(s.exp()));
        }
    }
    if let Some(lim) = limit_at_infinity {
        if lim >= best.0 {
            return Ok(DeltaBound {
                outcome: Outcome::Finite { value: lim },
                argmax: None,
            });
        }
    }
    Ok(DeltaBound {
        outcome: Outcome::Finite { value: best.0 },
        argmax: best.1,
    })
}

/// `lim_{x→∞} x^{α-1} μ(|y| >= x)` for a profile whose tail exponent is exactly 1.
fn tail_limit(profile: &SigmaProfile) -> Result<f64> {
    let a = profile.alpha.value();
    match &profile.kind {
        // x^{α-1} (1+x)^{1-α} → 1.
        SigmaKind::Polynomial { .. } => Ok(1.0),
        SigmaKind::Tabulated(t) => {
            // Each side with exponent exactly 1 contributes σ_end^{-α} |x_end|^α / (α - 1).
            let mut lim = 0.0;
            for right in [true, false] {
                let slope = if right { t.right_slope } else { t.left_slope };
                if slope == Some(1.0) {
                    let xe = t.outer_knot(right);
                    lim += profile.speed_density(xe) * xe.abs().powf(a) / (a - 1.0);
                }
            }
            Ok(lim)
        }
    }
}

fn golden_max<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let s = 0.5 * (a + b);
    Ok((s, f(s)?))
}

/// `(4 ω_α δ)^{-1}`; `None` when δ is not finite.
pub fn lambda0_lower_bound(profile: &SigmaProfile) -> Result<Option<f64>> {
    Ok(delta_bound(profile)?
        .outcome
        .finite()
        .map(|d| 1.0 / (4.0 * profile.omega_alpha() * d)))
}

/// `ω_α ∫_{|y| > R} |y|^{α-1} μ(dy)`, the uniform bound on the mean time to enter `[-R, R]`.
pub fn hitting_time_upper_bound(profile: &SigmaProfile, r: f64) -> Result<Outcome> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("R must be positive, got {r}")));
    }
    let a = profile.alpha.value();
    match profile.min_tail_exponent() {
        Some(p) if p <= 1.0 => Ok(Outcome::Divergent),
        Some(_) => {
            let g = |y: f64| y.abs().powf(a - 1.0);
            let right = profile.integrate_measure(g, r, f64::INFINITY, &[])?.value;
            let left = profile.integrate_measure(g, f64::NEG_INFINITY, -r, &[])?.value;
            Ok(Outcome::Finite {
                value: profile.omega_alpha() * (left + right),
            })
        }
        None => {
            let t = profile.indeterminate_truncation().max(r);
            let g = |y: f64| y.abs().powf(a - 1.0);
            let partial = profile.omega_alpha()
                * (profile.integrate_measure(g, r, t, &[])?.value
                    + profile.integrate_measure(g, -t, -r, &[])?.value);
            Ok(Outcome::Indeterminate { partial, truncation: t })
        }
    }
}

/// `E_x[T_{[-R,R]}] = ∫_{|y|>R} G^{[-R,R]^c}(x, y) μ(dy)` for `|x| > R`.
pub fn mean_hitting_time(profile: &SigmaProfile, r: f64, x: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("R must be positive, got {r}")));
    }
    if !(x.abs() > r) {
        return Err(Error::Domain(format!(
            "mean hitting time needs |x| > R (got x = {x}, R = {r}); the time is 0 inside"
        )));
    }
    let kernel = profile.kernel();
    let a = profile.alpha.value();
    let c = kernel.c_alpha();
    let diag = {
        let hx = kernel.h(x / r)?;
        c * (((x * x - r * r) / r).powf(a - 1.0) / (a - 1.0) - (a - 1.0) * r.powf(a - 1.0) * hx * hx)
    };
    let g = |y: f64| {
        if y == x {
            diag
        } else if y.abs() <= r {
            0.0
        } else {
            kernel.exterior_unchecked(r, x, y)
        }
    };
    let quad = Adaptive::with_tol(1e-12, 1e-10);
    let right = profile.integrate_measure_tol(g, r, f64::INFINITY, &[x], quad)?.value;
    let left = profile.integrate_measure_tol(g, f64::NEG_INFINITY, -r, &[x], quad)?.value;
    Ok(left + right)
}

/// Entrance integral, δ and the resulting λ₀ lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntranceDiagnostics {
    pub entrance_integral: Outcome,
    pub delta: Outcome,
    pub delta_argmax: Option<f64>,
    pub lambda0_lower: Option<f64>,
}

pub fn entrance_diagnostics(profile: &SigmaProfile) -> Result<EntranceDiagnostics> {
    let delta = delta_bound(profile)?;
    Ok(EntranceDiagnostics {
        entrance_integral: entrance_integral(profile)?,
        delta: delta.outcome,
        delta_argmax: delta.argmax,
        lambda0_lower: delta.outcome.finite().map(|d| 1.0 / (4.0 * profile.omega_alpha() * d)),
    })
}

/// Entrance diagnostics for σ(x) = (1+|x|)^γ, including αγ <= 1 where μ
/// has infinite mass, no profile exists and both I and δ are infinite.
pub fn polynomial_entrance(alpha: Alpha, gamma: f64) -> Result<EntranceDiagnostics> {
    if gamma.is_finite() && alpha.value() * gamma <= 1.0 {
        return Ok(EntranceDiagnostics {
            entrance_integral: Outcome::Divergent,
            delta: Outcome::Divergent,
            delta_argmax: None,
            lambda0_lower: None,
        });
    }
    entrance_diagnostics(&SigmaProfile::polynomial(alpha, gamma)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::beta;

    fn omega_alpha_ref() -> f64 {
        // mpmath
        1.595_769_121_605_730_7
    }

    fn poly(a: f64, g: f64) -> SigmaProfile {
        SigmaProfile::polynomial(Alpha::new(a).unwrap(), g).unwrap()
    }

    #[test]
    fn polynomial_family_classification() {
        let a = Alpha::new(1.5).unwrap();
        let d = polynomial_entrance(a, 0.5).unwrap();
        assert_eq!((d.entrance_integral, d.delta), (Outcome::Divergent, Outcome::Divergent));
        let d = polynomial_entrance(a, 0.8).unwrap();
        assert_eq!(d.entrance_integral, Outcome::Divergent);
        assert!(polynomial_entrance(a, 2.0).unwrap().entrance_integral.is_finite());
    }

    #[test]
    fn polynomial_rejects_non_normalizable() {
        let a = Alpha::new(1.5).unwrap();
        assert!(SigmaProfile::polynomial(a, 2.0 / 3.0).is_err());
        assert!(SigmaProfile::polynomial(a, 0.5).is_err());
        assert!(SigmaProfile::polynomial(a, 0.7).is_ok());
    }

    #[test]
    fn polynomial_density_examples() {
        let p = poly(1.5, 2.0);
        assert_eq!(p.speed_density(0.0), 1.0);
        for x in [0.0f64, 1.0, 2.0] {
            let want = (1.0 + x).powi(-3);
            assert!((p.speed_density(x) - want).abs() < 1e-15);
            assert!((p.sigma(x).powf(-1.5) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_mass_is_one() {
        for (a, g) in [(1.5, 2.0), (1.2, 1.0), (1.8, 4.0), (1.5, 0.8), (1.1, 1.2)] {
            let m = poly(a, g).total_mass().unwrap();
            assert!((m - 1.0).abs() < 1e-8, "alpha {a} gamma {g}: {m}");
        }
    }

    #[test]
    fn entrance_integral_polynomial() {
        let i = entrance_integral(&poly(1.5, 2.0)).unwrap().finite().unwrap();
        assert!((i - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
        // Beta identity (αγ-1) B(α, αγ-α) for a second parameter pair.
        let (a, g) = (1.3f64, 2.5f64);
        let i = entrance_integral(&poly(a, g)).unwrap().finite().unwrap();
        let want = (a * g - 1.0) * beta(a, a * g - a);
        assert!((i - want).abs() < 1e-9 * want);
        assert_eq!(entrance_integral(&poly(1.5, 0.8)).unwrap(), Outcome::Divergent);
        assert_eq!(entrance_integral(&poly(1.5, 1.0)).unwrap(), Outcome::Divergent);
    }

    #[test]
    fn entrance_integral_is_twice_half_line() {
        let p = poly(1.7, 1.6);
        let full = entrance_integral(&p).unwrap().finite().unwrap();
        let half = p
            .integrate_measure(|y| y.powf(0.7), 0.0, f64::INFINITY, &[])
            .unwrap()
            .value;
        assert!((full - 2.0 * half).abs() < 1e-10);
    }

    #[test]
    fn delta_polynomial() {
        let d = delta_bound(&poly(1.5, 2.0)).unwrap();
        let (x_star, want) = (1.0 / 3.0f64, (1.0 / 3.0f64).sqrt() * (0.75f64).powi(2));
        assert!((d.outcome.finite().unwrap() - want).abs() < 1e-12);
        assert!((d.argmax.unwrap() - x_star).abs() < 1e-5);
        assert!((want - 0.32476).abs() < 1e-5);
        assert_eq!(delta_bound(&poly(1.5, 0.8)).unwrap().outcome, Outcome::Divergent);
    }

    #[test]
    fn delta_at_critical_exponent_is_the_limit() {
        // x^{α-1}(1+x)^{1-α} increases to 1 without attaining it.
        let d = delta_bound(&poly(1.5, 1.0)).unwrap();
        assert_eq!(d.outcome, Outcome::Finite { value: 1.0 });
        assert_eq!(d.argmax, None);
    }

    #[test]
    fn lambda0_bound_polynomial() {
        let b = lambda0_lower_bound(&poly(1.5, 2.0)).unwrap().unwrap();
        let delta = (1.0 / 3.0f64).sqrt() * 0.5625;
        let omega = omega_alpha_ref();
        assert!((b - 1.0 / (4.0 * omega * delta)).abs() < 1e-12);
        assert!((b - 0.48237).abs() < 1e-4);
        assert!(lambda0_lower_bound(&poly(1.5, 0.8)).unwrap().is_none());
    }

    #[test]
    fn hitting_bound_decreases() {
        let p = poly(1.5, 2.0);
        let vals: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&r| hitting_time_upper_bound(&p, r).unwrap().finite().unwrap())
            .collect();
        // 2ω ∫_1^∞ y^{1/2}(1+y)^{-3} dy, mpmath.
        assert!((vals[0] - 0.626_657_068_657_750_13).abs() < 1e-10);
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(hitting_time_upper_bound(&poly(1.5, 0.8), 1.0).unwrap(), Outcome::Divergent);
    }

    #[test]
    fn mean_hitting_time_is_even_and_bounded() {
        let p = poly(1.5, 2.0);
        let m = mean_hitting_time(&p, 1.0, 2.0).unwrap();
        let mm = mean_hitting_time(&p, 1.0, -2.0).unwrap();
        assert!((m - mm).abs() < 1e-9);
        let bound = hitting_time_upper_bound(&p, 1.0).unwrap().finite().unwrap();
        assert!(m > 0.0 && m <= bound + 1e-6, "{m} vs {bound}");
        assert!(mean_hitting_time(&p, 1.0, 0.5).is_err());
    }

    #[test]
    fn tabulated_matches_polynomial() {
        let a = Alpha::new(1.5).unwrap();
        let xs: Vec<f64> = (0..=400).map(|i| 1e-3 * ((i as f64) * 0.05).exp() - 1e-3).collect();
        let ss: Vec<f64> = xs.iter().map(|x| (1.0 + x).powi(2)).collect();
        let t = SigmaTable::new(xs, ss).unwrap();
        let p = SigmaProfile::tabulated(a, t).unwrap();
        assert!(p.is_even());
        assert!((p.total_mass().unwrap() - 1.0).abs() < 1e-8);
        let reference = poly(1.5, 2.0);
        for x in [-3.0, -0.2, 0.0, 0.7, 5.0, 1e3] {
            let r = p.speed_density(x) / reference.speed_density(x);
            assert!((r - 1.0).abs() < 1e-3, "x = {x}: ratio {r}");
        }
        let i = entrance_integral(&p).unwrap().finite().unwrap();
        assert!((i - std::f64::consts::FRAC_PI_4).abs() < 1e-3);
    }

    #[test]
    fn tabulated_tail_classification() {
        let a = Alpha::new(1.5).unwrap();
        // σ ~ |x|^{0.8}: speed measure finite (1.2 > 1) but entrance integral infinite.
        let xs = vec![-10.0, -2.0, 0.0, 2.0, 10.0];
        let ss: Vec<f64> = xs.iter().map(|x: &f64| x.abs().max(1.0).powf(0.8)).collect();
        let p = SigmaProfile::tabulated(a, SigmaTable::new(xs, ss).unwrap()).unwrap();
        assert_eq!(entrance_integral(&p).unwrap(), Outcome::Divergent);
        assert_eq!(delta_bound(&p).unwrap().outcome, Outcome::Divergent);

        // Table that never leaves |x| < 1 on the left: tails cannot be classified.
        let t = SigmaTable::new(vec![-0.5, 0.0, 2.0, 10.0], vec![1.0, 1.0, 9.0, 121.0]).unwrap();
        assert!(SigmaProfile::tabulated(a, t).is_err());
    }

    #[test]
    fn table_parsing() {
        let t = SigmaTable::parse("# x sigma\n0 1\n1, 4\n2 9 # trailing\n\n5 36\n").unwrap();
        assert!(t.mirrored);
        assert!(SigmaTable::parse("0 1\n0 2\n").is_err());
        assert!(SigmaTable::parse("0 1\n1 -2\n").is_err());
        assert!(SigmaTable::parse("0 1 3\n").is_err());
        assert!(SigmaTable::parse("0 a\n").is_err());
    }
}
