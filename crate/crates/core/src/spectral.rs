//! Nyström discretization of the Green operator of X killed at the origin,
//! acting on `L²(ℝ∖{0}; μ)`.
//!
//! The matrix is `A = W^{1/2} G W^{1/2} + diag(D)` where `W` holds the
//! μ-weights and `D_i` is the difference between the exact row integral
//! `∫_{-L}^{L} G(x_i, y) μ(dy)` and its quadrature sum. The kernel has a
//! `|x - y|^{α-1}` cusp on the diagonal; without the correction λ₀ moves in
//! the third digit between 400 and 800 nodes, with it in the sixth.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model_measure::{entrance_integral, hitting_time_upper_bound, Outcome, SigmaProfile};
use crate::quadrature::{Adaptive, GaussLegendre};

/// Target for `ω_α ∫_{|y|>L} |y|^{α-1} μ(dy)` when L is chosen automatically.
pub const AUTO_TAIL_TOL: f64 = 1e-8;
/// Largest truncation the automatic search will return.
pub const MAX_TRUNCATION: f64 = 1e30;
/// Green eigenvalues at or below this are discarded as discretization noise.
pub const BASE_NOISE_FLOOR: f64 = 1e-10;
pub const MIN_GAP: f64 = 1e-8;

const PANEL_ORDER: usize = 8;
const INNER_FRACTION: f64 = 0.4;
const INNER_START: f64 = 1e-5;

/// How far the grid extends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Extent {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    truncation: f64,
    tail_error: f64,
}

impl QuadratureGrid {
    /// A grid from explicit nodes and μ-weights (no symmetry requirement).
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, truncation: f64, tail_error: f64) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::Domain("nodes and weights must be nonempty and of equal length".into()));
        }
        if nodes.iter().any(|x| *x == 0.0 || !x.is_finite()) {
            return Err(Error::Domain("grid nodes must be finite and nonzero".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Domain("grid weights must be positive".into()));
        }
        Ok(Self {
            nodes,
            weights,
            truncation,
            tail_error,
        })
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

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn tail_error(&self) -> f64 {
        self.tail_error
    }

    /// μ([-L, L]) as seen by the quadrature.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index of the node closest to x.
    pub fn nearest_node(&self, x: f64) -> usize {
        let mut best = 0;
        for (i, &v) in self.nodes.iter().enumerate() {
            if (v - x).abs() < (self.nodes[best] - x).abs() {
                best = i;
            }
        }
        best
    }

    /// Index of the mirror node `-x_i`, if the grid is symmetric.
    pub fn mirror(&self, i: usize) -> usize {
        self.len() - 1 - i
    }
}

/// Smallest L with `ω_α ∫_{|y|>L} |y|^{α-1} μ(dy) < AUTO_TAIL_TOL`, capped at
/// [`MAX_TRUNCATION`]. Returns `(L, tail_error)`.
pub fn auto_truncation(profile: &SigmaProfile) -> Result<(f64, f64)> {
    let bound = |l: f64| -> Result<f64> {
        match hitting_time_upper_bound(profile, l)? {
            Outcome::Finite { value } => Ok(value),
            _ => Err(Error::EntranceFail(
                "tail integral beyond L is not finite; the Green operator is not Hilbert-Schmidt".into(),
            )),
        }
    };
    let top = bound(MAX_TRUNCATION)?;
    if top >= AUTO_TAIL_TOL {
        return Ok((MAX_TRUNCATION, top));
    }
    let at_one = bound(1.0)?;
    if at_one < AUTO_TAIL_TOL {
        return Ok((1.0, at_one));
    }
    let (mut lo, mut hi) = (0.0f64, MAX_TRUNCATION.ln());
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if bound(mid.exp())? < AUTO_TAIL_TOL {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    let l = hi.exp();
    Ok((l, bound(l)?))
}

/// Symmetric composite Gauss–Legendre grid on `[-L, L] ∖ {0}` with `n` nodes.
///
/// Panels of order 8 (the outermost may be shorter). About 40% of the panels
/// on each half-line are geometric on `[1e-5 s, s]`, `s = min(1, L/2)`, plus
/// one panel `[0, 1e-5 s]`; the rest are geometric in `1 + x` from `s` to `L`.
pub fn build_grid(profile: &SigmaProfile, n: usize, extent: Extent) -> Result<QuadratureGrid> {
    if n < 16 || n % 2 != 0 {
        return Err(Error::Domain(format!("grid size must be even and at least 16, got {n}")));
    }
    match entrance_integral(profile)? {
        Outcome::Finite { .. } => {}
        other => {
            return Err(Error::EntranceFail(format!(
                "entrance integral is {}; the Green operator is not Hilbert-Schmidt (requires gamma > 1 for polynomial sigma)",
                other.status()
            )))
        }
    }
    let (l, tail_error) = match extent {
        Extent::Auto => auto_truncation(profile)?,
        Extent::Fixed(l) => {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Domain(format!("truncation must be positive, got {l}")));
            }
            let t = hitting_time_upper_bound(profile, l)?.finite().unwrap_or(f64::INFINITY);
            (l, t)
        }
    };

    let half = n / 2;
    let panels = half.div_ceil(PANEL_ORDER);
    let mut orders = vec![PANEL_ORDER; panels];
    orders[panels - 1] = half - PANEL_ORDER * (panels - 1);
    let n_inner = ((INNER_FRACTION * panels as f64).round() as usize).clamp(1, panels.saturating_sub(1).max(1));
    let n_outer = panels - n_inner;

    let s = if n_outer == 0 { l } else { l.min(1.0).min(0.5 * l).max(f64::MIN_POSITIVE) };
    let mut edges = vec![0.0];
    if n_inner == 1 {
        edges.push(s);
    } else {
        let lo = (INNER_START * s).ln();
        let hi = s.ln();
        for k in 0..n_inner {
            let f = k as f64 / (n_inner - 1) as f64;
            edges.push((lo + f * (hi - lo)).exp());
        }
    }
    if n_outer > 0 {
        let (a, b) = ((1.0 + s).ln(), (1.0 + l).ln());
        for k in 1..=n_outer {
            let f = k as f64 / n_outer as f64;
            edges.push((a + f * (b - a)).exp() - 1.0);
        }
        *edges.last_mut().unwrap() = l;
    }
    debug_assert_eq!(edges.len(), panels + 1);

    let mut pos_nodes = Vec::with_capacity(half);
    let mut pos_weights = Vec::with_capacity(half);
    let mut neg_weights = Vec::with_capacity(half);
    let mut rules: Vec<(usize, GaussLegendre)> = Vec::new();
    for (p, &order) in orders.iter().enumerate() {
        let rule = match rules.iter().find(|(o, _)| *o == order) {
            Some((_, r)) => r.clone(),
            None => {
                let r = GaussLegendre::new(order);
                rules.push((order, r.clone()));
                r
            }
        };
        for (x, w) in rule.mapped(edges[p], edges[p + 1]) {
            pos_nodes.push(x);
            pos_weights.push(w * profile.speed_density(x));
            neg_weights.push(w * profile.speed_density(-x));
        }
    }
    let mut nodes: Vec<f64> = pos_nodes.iter().rev().map(|x| -x).collect();
    let mut weights: Vec<f64> = neg_weights.into_iter().rev().collect();
    nodes.extend_from_slice(&pos_nodes);
    weights.extend_from_slice(&pos_weights);
    QuadratureGrid::from_parts(nodes, weights, l, tail_error)
}

/// The symmetric matrix handed to the eigensolver.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    grid: QuadratureGrid,
    matrix: DMatrix<f64>,
    diag_correction: Vec<f64>,
    row_integral: Vec<f64>,
}

impl DiscretizedOperator {
    /// An operator from an explicit symmetric matrix on a grid. Used for small
    /// analytic test problems.
    pub fn from_matrix(grid: QuadratureGrid, matrix: DMatrix<f64>) -> Result<Self> {
        let n = grid.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Domain("matrix size does not match the grid".into()));
        }
        if matrix != matrix.transpose() {
            return Err(Error::Domain("matrix must be exactly symmetric".into()));
        }
        Ok(Self {
            grid,
            matrix,
            diag_correction: vec![0.0; n],
            row_integral: vec![f64::NAN; n],
        })
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn diag_correction(&self) -> &[f64] {
        &self.diag_correction
    }

    pub fn row_integral(&self) -> &[f64] {
        &self.row_integral
    }

    /// Frobenius norm of A, the discrete Hilbert–Schmidt norm.
    pub fn hs_norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// `√w_i G(x_i, x_j) √w_j` plus the diagonal row-integral correction.
pub fn assemble_operator(grid: &QuadratureGrid, profile: &SigmaProfile) -> Result<DiscretizedOperator> {
    assemble(grid, profile, true)
}

/// The uncorrected symmetric Nyström matrix `√w_i G(x_i, x_j) √w_j`.
pub fn assemble_plain(grid: &QuadratureGrid, profile: &SigmaProfile) -> Result<DiscretizedOperator> {
    assemble(grid, profile, false)
}

fn assemble(grid: &QuadratureGrid, profile: &SigmaProfile, corrected: bool) -> Result<DiscretizedOperator> {
    let kernel = profile.kernel();
    let n = grid.len();
    let x = grid.nodes();
    let w = grid.weights();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = sw[i] * kernel.green_point_killed(x[i], x[j]) * sw[j];
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    let mut diag_correction = vec![0.0; n];
    let mut row_integral = vec![f64::NAN; n];
    if corrected {
        row_integral = exact_row_integrals(grid, profile)?;
        for i in 0..n {
            let discrete: f64 = (0..n).map(|j| kernel.green_point_killed(x[i], x[j]) * w[j]).sum();
            diag_correction[i] = row_integral[i] - discrete;
            matrix[(i, i)] += diag_correction[i];
        }
    }
    Ok(DiscretizedOperator {
        grid: grid.clone(),
        matrix,
        diag_correction,
        row_integral,
    })
}

/// `∫_{-L}^{L} G(x, y) μ(dy)` at every node.
fn exact_row_integrals(grid: &QuadratureGrid, profile: &SigmaProfile) -> Result<Vec<f64>> {
    let integrator = RowIntegrator::new(profile, grid.truncation())?;
    let n = grid.len();
    let even = profile.is_even() && is_symmetric(grid);
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mirror = grid.mirror(i);
        if even && mirror < i {
            out[i] = out[mirror];
        } else {
            out[i] = integrator.at(grid.nodes()[i])?;
        }
    }
    Ok(out)
}

fn is_symmetric(grid: &QuadratureGrid) -> bool {
    let x = grid.nodes();
    (0..x.len()).all(|i| x[i] == -x[grid.mirror(i)])
}

/// Evaluates `∫_{-L}^{L} G(x, y) μ(dy) = (ω/2)(|x|^p M₀ + M₁ - ∫|x-y|^p μ(dy))`.
struct RowIntegrator<'a> {
    profile: &'a SigmaProfile,
    l: f64,
    m0: f64,
    m1: f64,
    quad: Adaptive,
}

impl<'a> RowIntegrator<'a> {
    fn new(profile: &'a SigmaProfile, l: f64) -> Result<Self> {
        let p = profile.alpha().value() - 1.0;
        let quad = Adaptive::with_tol(1e-15, 1e-13);
        let m0 = profile.integrate_measure_tol(|_| 1.0, -l, l, &[], quad)?.value;
        let m1 = profile
            .integrate_measure_tol(|y| y.abs().powf(p), -l, l, &[], quad)?
            .value;
        Ok(Self {
            profile,
            l,
            m0,
            m1,
            quad,
        })
    }

    fn at(&self, x: f64) -> Result<f64> {
        let p = self.profile.alpha().value() - 1.0;
        let j = self
            .profile
            .integrate_measure_tol(|y| (x - y).abs().powf(p), -self.l, self.l, &[x], self.quad)?
            .value;
        let omega = self.profile.omega_alpha();
        Ok(0.5 * omega * (x.abs().powf(p) * self.m0 + self.m1 - j))
    }
}

/// Eigenpairs of the discretized Green operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    grid: QuadratureGrid,
    matrix: DMatrix<f64>,
    diag_correction: Vec<f64>,
    row_integral: Vec<f64>,
    // Green eigenvalues, all modes, descending.
    kappa: Vec<f64>,
    // Generator eigenvalues 1/κ of the retained modes, ascending.
    lambda: Vec<f64>,
    // Grid values ψ_n(x_i), all modes, same order as kappa.
    psi: Vec<Vec<f64>>,
    // ⟨1, ψ_n⟩_μ, all modes.
    inner_one: Vec<f64>,
    noise_floor: f64,
    hs_norm: f64,
}

/// Decomposes `op`.
///
/// Green eigenvalues at or below `1e-10` are dropped from the reported
/// spectrum. Values below `-floor` are an error, where the floor is `1e-10`
/// plus the largest diagonal correction: the uncorrected matrix is positive
/// semidefinite and the correction moves no eigenvalue by more than that.
pub fn eigendecompose(op: &DiscretizedOperator) -> Result<SpectralDecomposition> {
    let n = op.grid.len();
    let eig = SymmetricEigen::new(op.matrix.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let max_corr = op.diag_correction.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let noise_floor = BASE_NOISE_FLOOR + max_corr;
    let kappa: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if !(kappa[0] > 0.0) {
        return Err(Error::NonpositiveSpectrum(kappa[0]));
    }
    if let Some(&bad) = kappa.iter().find(|&&k| k < -noise_floor) {
        return Err(Error::NegativeEigenvalue {
            value: bad,
            floor: noise_floor,
        });
    }
    let lambda: Vec<f64> = kappa.iter().take_while(|&&k| k > BASE_NOISE_FLOOR).map(|k| 1.0 / k).collect();
    if lambda.is_empty() {
        return Err(Error::NonpositiveSpectrum(kappa[0]));
    }
    if lambda.len() >= 2 && lambda[1] - lambda[0] < MIN_GAP {
        return Err(Error::DegenerateGap {
            gap: lambda[1] - lambda[0],
        });
    }

    let w = op.grid.weights();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mut psi = Vec::with_capacity(n);
    let mut inner_one = Vec::with_capacity(n);
    for (mode, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let sign = if mode == 0 {
            // Positive μ-mean of ψ₀: Σ w_i ψ_i = Σ √w_i v_i.
            let mean: f64 = v.iter().zip(&sw).map(|(a, b)| a * b).sum();
            if mean < 0.0 {
                -1.0
            } else {
                1.0
            }
        } else {
            let mut best = 0;
            for i in 1..n {
                if v[i].abs() > v[best].abs() {
                    best = i;
                }
            }
            if v[best] < 0.0 {
                -1.0
            } else {
                1.0
            }
        };
        let values: Vec<f64> = v.iter().zip(&sw).map(|(a, s)| sign * a / s).collect();
        inner_one.push(values.iter().zip(w).map(|(p, q)| p * q).sum());
        psi.push(values);
    }

    Ok(SpectralDecomposition {
        grid: op.grid.clone(),
        matrix: op.matrix.clone(),
        diag_correction: op.diag_correction.clone(),
        row_integral: op.row_integral.clone(),
        kappa,
        lambda,
        psi,
        inner_one,
        noise_floor,
        hs_norm: op.hs_norm(),
    })
}

/// Value of the truncated spectral survival sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalValue {
    pub value: f64,
    /// The last included term exceeds `1e-12` of the sum.
    pub truncation_warning: bool,
}

/// Conditioned-law TV distances along a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YaglomCurve {
    pub node: usize,
    pub points: Vec<(f64, f64)>,
    /// Largest t up to which every value is above roundoff and finite.
    pub last_trustworthy: Option<f64>,
}

/// Fitted log-slope of a TV curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YaglomRate {
    pub slope: f64,
    pub gap: f64,
    pub relative_error: f64,
    pub window: (f64, f64),
    pub points_used: usize,
}

const TV_ROUNDOFF: f64 = 1e-11;

impl SpectralDecomposition {
    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// Generator eigenvalues λ₀ < λ₁ < … of the retained modes.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda[0]
    }

    pub fn lambda1(&self) -> Option<f64> {
        self.lambda.get(1).copied()
    }

    pub fn gap(&self) -> Option<f64> {
        self.lambda1().map(|l1| l1 - self.lambda[0])
    }

    /// Green eigenvalues of every mode, descending (including discarded ones).
    pub fn green_eigenvalues(&self) -> &[f64] {
        &self.kappa
    }

    pub fn retained(&self) -> usize {
        self.lambda.len()
    }

    pub fn noise_floor(&self) -> f64 {
        self.noise_floor
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn diag_correction(&self) -> &[f64] {
        &self.diag_correction
    }

    pub fn row_integral(&self) -> &[f64] {
        &self.row_integral
    }

    /// Grid values of ψ_n.
    pub fn psi(&self, n: usize) -> &[f64] {
        &self.psi[n]
    }

    pub fn inner_one(&self, n: usize) -> f64 {
        self.inner_one[n]
    }

    /// Discrete `⟨ψ_i, ψ_j⟩_μ`.
    pub fn inner(&self, i: usize, j: usize) -> f64 {
        let w = self.grid.weights();
        self.psi[i].iter().zip(&self.psi[j]).zip(w).map(|((a, b), c)| a * b * c).sum()
    }

    /// Largest `|⟨ψ_i, ψ_j⟩_μ - δ_ij|` over the first `k` modes.
    pub fn orthonormality_defect(&self, k: usize) -> f64 {
        let k = k.min(self.psi.len());
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..=i {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.inner(i, j) - target).abs());
            }
        }
        worst
    }

    /// `‖A v - v/λ‖` for grid values `psi` (v = √w ψ), i.e. the discrete
    /// `L²(μ)` norm of `G⁰ψ - ψ/λ`.
    pub fn residual_for(&self, psi: &[f64], lambda: f64) -> f64 {
        let sw: Vec<f64> = self.grid.weights().iter().map(|v| v.sqrt()).collect();
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().zip(&sw).map(|(p, s)| p * s));
        let r = &self.matrix * &v - &v / lambda;
        r.norm()
    }

    /// Residual of the ground-state eigen-identity.
    pub fn ground_state_residual(&self) -> f64 {
        self.residual_for(&self.psi[0], self.lambda[0])
    }

    /// `ψ_n` at an arbitrary point through the Nyström interpolant. Needs the
    /// exact row integral at x, i.e. `∫_{-L}^{L} G(x, y) μ(dy)`.
    pub fn interpolate(&self, profile: &SigmaProfile, n: usize, x: f64, row_integral_at_x: f64) -> f64 {
        let kernel = profile.kernel();
        let nodes = self.grid.nodes();
        let w = self.grid.weights();
        let mut sum = 0.0;
        let mut discrete = 0.0;
        for j in 0..nodes.len() {
            let g = kernel.green_point_killed(x, nodes[j]) * w[j];
            sum += g * self.psi[n][j];
            discrete += g;
        }
        let d = if row_integral_at_x.is_finite() {
            row_integral_at_x - discrete
        } else {
            0.0
        };
        sum / (self.kappa[n] - d)
    }

    /// Per-mode factors `e^{-(λ_n - λ₀)t}`; at t = 0 every mode, including
    /// the discarded ones, gets factor 1 so the expansion is complete.
    fn mode_factors(&self, t: f64, limit: Option<usize>) -> Vec<f64> {
        let n = self.psi.len();
        let cap = limit.unwrap_or(n).min(n);
        (0..n)
            .map(|k| {
                if k >= cap {
                    0.0
                } else if t == 0.0 {
                    1.0
                } else if k < self.lambda.len() {
                    (-(self.lambda[k] - self.lambda[0]) * t).exp()
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `Σ_{n<N} e^{-λ_n t} ⟨1, ψ_n⟩ ψ_n(x_i)`. `modes = None` uses every
    /// retained mode (every mode at t = 0).
    pub fn semigroup_survival(&self, t: f64, node: usize, modes: Option<usize>) -> Result<SurvivalValue> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
        }
        let (scaled, warn) = self.scaled_survival(t, node, modes);
        Ok(SurvivalValue {
            value: scaled * (-self.lambda[0] * t).exp(),
            truncation_warning: warn,
        })
    }

    /// `e^{λ₀ t}` times the survival sum, and the truncation flag.
    fn scaled_survival(&self, t: f64, node: usize, modes: Option<usize>) -> (f64, bool) {
        let f = self.mode_factors(t, modes);
        let mut sum = 0.0;
        let mut last = 0.0;
        for (k, fk) in f.iter().enumerate() {
            if *fk == 0.0 {
                continue;
            }
            let term = fk * self.inner_one[k] * self.psi[k][node];
            sum += term;
            last = term;
        }
        (sum, last.abs() > 1e-12 * sum.abs())
    }

    /// `−(1/t) log max_i P_{x_i}[T₀ > t]`.
    pub fn uniform_decay_rate(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("time must be positive, got {t}")));
        }
        let best = (0..self.grid.len())
            .map(|i| self.scaled_survival(t, i, None).0)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(self.lambda[0] - best.ln() / t)
    }

    /// `max_i P_{x_i}[T₀ > t]`.
    pub fn sup_survival(&self, t: f64) -> f64 {
        let best = (0..self.grid.len())
            .map(|i| self.scaled_survival(t, i, None).0)
            .fold(f64::NEG_INFINITY, f64::max);
        best * (-self.lambda[0] * t).exp()
    }

    /// Cell masses of the law of `Y_t` given survival, started at a node.
    pub fn conditioned_law(&self, node: usize, t: f64) -> Vec<f64> {
        let f = self.mode_factors(t, None);
        let n = self.grid.len();
        let w = self.grid.weights();
        let mut dens = vec![0.0; n];
        for (k, fk) in f.iter().enumerate() {
            if *fk == 0.0 {
                continue;
            }
            let a = fk * self.psi[k][node];
            for (d, p) in dens.iter_mut().zip(&self.psi[k]) {
                *d += a * p;
            }
        }
        let (surv, _) = self.scaled_survival(t, node, None);
        dens.iter().zip(w).map(|(d, wi)| d * wi / surv).collect()
    }

    /// TV distance between the conditioned law from `node` and ν, on grid cells.
    pub fn yaglom_tv_curve(&self, node: usize, times: &[f64]) -> Result<YaglomCurve> {
        let nu = self.qsd()?;
        let w = self.grid.weights();
        let target: Vec<f64> = nu.density.iter().zip(w).map(|(d, wi)| d * wi).collect();
        let mut points = Vec::with_capacity(times.len());
        let mut last_trustworthy = None;
        let mut trusted = true;
        for &t in times {
            let law = self.conditioned_law(node, t);
            let tv = 0.5 * law.iter().zip(&target).map(|(a, b)| (a - b).abs()).sum::<f64>();
            trusted = trusted && tv.is_finite() && tv > TV_ROUNDOFF;
            if trusted {
                last_trustworthy = Some(t);
            }
            points.push((t, tv));
        }
        Ok(YaglomCurve {
            node,
            points,
            last_trustworthy,
        })
    }

    /// Log-slope of the TV curve over `[5/λ₁, 15/λ₁]`, against `λ₁ - λ₀`.
    pub fn yaglom_rate(&self, node: usize, n_points: usize) -> Result<YaglomRate> {
        let l1 = self
            .lambda1()
            .ok_or_else(|| Error::Domain("need two retained modes for a Yaglom rate".into()))?;
        let (lo, hi) = (5.0 / l1, 15.0 / l1);
        let n_points = n_points.max(5);
        let times: Vec<f64> = (0..n_points)
            .map(|i| lo + (hi - lo) * i as f64 / (n_points - 1) as f64)
            .collect();
        let curve = self.yaglom_tv_curve(node, &times)?;
        let cut = curve.last_trustworthy.unwrap_or(f64::NEG_INFINITY);
        let pts: Vec<(f64, f64)> = curve
            .points
            .iter()
            .filter(|(t, _)| *t <= cut)
            .map(|(t, tv)| (*t, tv.ln()))
            .collect();
        if pts.len() < 3 {
            return Err(Error::Domain("TV curve underflows inside the fitting window".into()));
        }
        let slope = crate::stats::ols_slope(&pts);
        let gap = l1 - self.lambda[0];
        Ok(YaglomRate {
            slope,
            gap,
            relative_error: (-slope - gap).abs() / gap,
            window: (lo, hi),
            points_used: pts.len(),
        })
    }

    /// QSD density `ψ₀ / μ(ψ₀)` with respect to μ.
    pub fn qsd(&self) -> Result<QsdResult> {
        let psi0 = &self.psi[0];
        if let Some(i) = psi0.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::Domain(format!(
                "ground state not strictly positive at node {i} (x = {:e}, value {:e})",
                self.grid.nodes()[i],
                psi0[i]
            )));
        }
        let normalizer = self.inner_one[0];
        Ok(QsdResult {
            density: psi0.iter().map(|p| p / normalizer).collect(),
            normalizer,
        })
    }

    /// QED density `ψ₀²` with respect to μ.
    pub fn qed(&self) -> QedResult {
        QedResult {
            density: self.psi[0].iter().map(|p| p * p).collect(),
        }
    }

    /// `Σ_n e^{-λ_n t} ψ_n(x_i)²` maximized over nodes: a truncated proxy for
    /// `sup_x p_t(x, x)`. Reported only.
    pub fn heat_diagonal_proxy(&self, t: f64) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                self.lambda
                    .iter()
                    .enumerate()
                    .map(|(k, l)| (-l * t).exp() * self.psi[k][i] * self.psi[k][i])
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|f(x_i) - s f(-x_i)|` over nodes, for a symmetric grid
    /// (`s = 1` tests evenness, `s = -1` oddness).
    pub fn parity_defect(values: &[f64], grid: &QuadratureGrid, s: f64) -> f64 {
        (0..values.len())
            .map(|i| (values[i] - s * values[grid.mirror(i)]).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QsdResult {
    /// dν/dμ at the nodes.
    pub density: Vec<f64>,
    /// μ(ψ₀).
    pub normalizer: f64,
}

impl QsdResult {
    pub fn mass(&self, grid: &QuadratureGrid) -> f64 {
        self.density.iter().zip(grid.weights()).map(|(d, w)| d * w).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QedResult {
    /// dm/dμ at the nodes.
    pub density: Vec<f64>,
}

impl QedResult {
    pub fn mass(&self, grid: &QuadratureGrid) -> f64 {
        self.density.iter().zip(grid.weights()).map(|(d, w)| d * w).sum()
    }
}

/// Mean and variance of a grid law given by a density against μ.
pub fn grid_moments(density: &[f64], grid: &QuadratureGrid) -> (f64, f64) {
    let w = grid.weights();
    let x = grid.nodes();
    let mass: f64 = density.iter().zip(w).map(|(d, wi)| d * wi).sum();
    let mean: f64 = density.iter().zip(w).zip(x).map(|((d, wi), xi)| d * wi * xi).sum::<f64>() / mass;
    let var: f64 = density
        .iter()
        .zip(w)
        .zip(x)
        .map(|((d, wi), xi)| d * wi * (xi - mean).powi(2))
        .sum::<f64>()
        / mass;
    (mean, var)
}

/// Full pipeline: grid, corrected operator, decomposition.
pub fn solve(profile: &SigmaProfile, n: usize, extent: Extent) -> Result<SpectralDecomposition> {
    let grid = build_grid(profile, n, extent)?;
    let op = assemble_operator(&grid, profile)?;
    eigendecompose(&op)
}

/// Change between the pipeline at n and at 2n nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementReport {
    pub n: usize,
    pub lambda_coarse: Vec<f64>,
    pub lambda_fine: Vec<f64>,
    /// `|λ_k(n) - λ_k(2n)| / λ_k(2n)` for k = 0, 1, 2 (as available).
    pub relative_change: Vec<f64>,
    /// Discrete `L²(μ)` norm on the fine grid of `ψ₀(n)` interpolated minus `ψ₀(2n)`.
    pub psi0_change: f64,
}

pub fn refine_and_compare(profile: &SigmaProfile, n: usize, extent: Extent) -> Result<RefinementReport> {
    let coarse = solve(profile, n, extent)?;
    let fine = solve(profile, 2 * n, extent)?;
    compare(profile, &coarse, &fine)
}

/// Refinement report between two existing decompositions on grids with the same truncation.
pub fn compare(
    profile: &SigmaProfile,
    coarse: &SpectralDecomposition,
    fine: &SpectralDecomposition,
) -> Result<RefinementReport> {
    let k = 3.min(coarse.retained()).min(fine.retained());
    let relative_change = (0..k)
        .map(|i| (coarse.lambda[i] - fine.lambda[i]).abs() / fine.lambda[i])
        .collect();
    let nodes = fine.grid.nodes();
    let w = fine.grid.weights();
    let mut acc = 0.0;
    for i in 0..nodes.len() {
        let v = coarse.interpolate(profile, 0, nodes[i], fine.row_integral[i]);
        acc += w[i] * (v - fine.psi[0][i]).powi(2);
    }
    Ok(RefinementReport {
        n: coarse.grid.len(),
        lambda_coarse: coarse.lambda.iter().take(k).copied().collect(),
        lambda_fine: fine.lambda.iter().take(k).copied().collect(),
        relative_change,
        psi0_change: acc.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable_kernels::Alpha;
    use std::sync::OnceLock;

    fn profile() -> SigmaProfile {
        SigmaProfile::polynomial(Alpha::new(1.5).unwrap(), 2.0).unwrap()
    }

    fn dec200() -> &'static SpectralDecomposition {
        static D: OnceLock<SpectralDecomposition> = OnceLock::new();
        D.get_or_init(|| solve(&profile(), 200, Extent::Auto).unwrap())
    }

    #[test]
    fn grid_shape() {
        let p = profile();
        let g = build_grid(&p, 400, Extent::Auto).unwrap();
        assert_eq!(g.len(), 400);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        for i in 0..g.len() {
            assert_eq!(g.nodes()[i], -g.nodes()[g.mirror(i)]);
            assert!(g.nodes()[i] != 0.0);
        }
        assert!(g.tail_error() < AUTO_TAIL_TOL);
        assert!(g.mass() <= 1.0 + 1e-12);
        // Closed-form tail of (1+|x|)^{-3}: μ(|y| > L) = (1+L)^{-2}.
        let l = g.truncation();
        assert!((g.mass() - (1.0 - (1.0 + l).powi(-2))).abs() < 1e-8);
        assert!(build_grid(&p, 15, Extent::Auto).is_err());
        assert!(build_grid(&p, 18, Extent::Auto).is_ok());
    }

    #[test]
    fn auto_truncation_is_tight() {
        let p = profile();
        let (l, t) = auto_truncation(&p).unwrap();
        assert!(t < AUTO_TAIL_TOL);
        let before = hitting_time_upper_bound(&p, 0.99 * l).unwrap().finite().unwrap();
        assert!(before >= AUTO_TAIL_TOL * 0.99);
    }

    #[test]
    fn refuses_non_entrance_profiles() {
        let p = SigmaProfile::polynomial(Alpha::new(1.5).unwrap(), 0.8).unwrap();
        assert!(matches!(build_grid(&p, 64, Extent::Auto), Err(Error::EntranceFail(_))));
    }

    #[test]
    fn operator_symmetric_with_positive_diagonal() {
        let p = profile();
        let g = build_grid(&p, 64, Extent::Auto).unwrap();
        let op = assemble_operator(&g, &p).unwrap();
        let a = op.matrix();
        assert_eq!(a, &a.transpose());
        assert!((0..g.len()).all(|i| a[(i, i)] > 0.0));
    }

    #[test]
    fn spectrum_basic_properties() {
        let d = dec200();
        assert!(d.lambda0() > 0.0);
        assert!(d.gap().unwrap() > 0.0);
        assert!(d.eigenvalues().windows(2).all(|w| w[1] > w[0]));
        assert!(d.psi(0).iter().all(|v| *v > 0.0));
        assert!(d.orthonormality_defect(10) < 1e-10);
        assert!(d.ground_state_residual() < 1e-8);
        assert!(d.hs_norm() >= d.green_eigenvalues()[0]);
        assert!((d.lambda0() - 2.091_691).abs() < 1e-4, "{}", d.lambda0());
    }

    #[test]
    fn perturbed_ground_state_has_large_residual() {
        let d = dec200();
        let psi: Vec<f64> = d.psi(0).iter().zip(d.psi(1)).map(|(a, b)| a + 0.01 * b).collect();
        let r = d.residual_for(&psi, d.lambda0());
        let k = d.green_eigenvalues();
        assert!((r - 0.01 * (k[0] - k[1])).abs() < 1e-8);
        assert!(r >= 1e-3);
    }

    #[test]
    fn qsd_qed_and_parity() {
        let d = dec200();
        let g = d.grid();
        let nu = d.qsd().unwrap();
        let m = d.qed();
        assert!((nu.mass(g) - 1.0).abs() < 1e-8);
        assert!((m.mass(g) - 1.0).abs() < 1e-8);
        assert!(SpectralDecomposition::parity_defect(d.psi(0), g, 1.0) < 1e-6);
        assert!(SpectralDecomposition::parity_defect(d.psi(1), g, -1.0) < 1e-6);
        // ψ₀ vanishes at 0 and increases with |x|, so m = ψ₀² μ puts more
        // mass far out than ν ∝ ψ₀ μ.
        let (_, var_nu) = grid_moments(&nu.density, g);
        let (_, var_m) = grid_moments(&m.density, g);
        assert!(var_m > var_nu);
    }

    #[test]
    fn survival_expansion() {
        let d = dec200();
        let g = d.grid();
        for i in [0, 50, 100, 150, 199] {
            let s0 = d.semigroup_survival(0.0, i, None).unwrap().value;
            assert!((s0 - 1.0).abs() < 1e-6, "node {i}: {s0}");
        }
        let i = g.nearest_node(1.0);
        let mut prev = 1.0;
        for k in 1..40 {
            let s = d.semigroup_survival(0.05 * k as f64, i, None).unwrap().value;
            assert!(s < prev);
            prev = s;
        }
        let nu = d.qsd().unwrap();
        for t in [0.0, 0.3, 1.0, 4.0] {
            let exit: f64 = (0..g.len())
                .map(|j| g.weights()[j] * nu.density[j] * d.semigroup_survival(t, j, None).unwrap().value)
                .sum();
            assert!((exit - (-d.lambda0() * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn yaglom_and_uniform_rate() {
        let d = dec200();
        let node = d.grid().nearest_node(1.0);
        let rate = d.yaglom_rate(node, 21).unwrap();
        assert!(rate.relative_error < 0.05, "{rate:?}");
        let curve = d.yaglom_tv_curve(node, &[0.0]).unwrap();
        let nu = d.qsd().unwrap();
        let cell = nu.density[node] * d.grid().weights()[node];
        assert!((curve.points[0].1 - (1.0 - cell)).abs() < 1e-9);
        let u = d.uniform_decay_rate(30.0 / d.lambda0()).unwrap();
        assert!((u - d.lambda0()).abs() / d.lambda0() < 0.02);
    }

    #[test]
    fn two_node_toy_rate() {
        // A = diag(1/2, 1/5) with unit weights: λ = {2, 5}.
        let grid = QuadratureGrid::from_parts(vec![-1.0, 1.0], vec![0.5, 0.5], 1.0, 0.0).unwrap();
        // Eigenvectors (1,1)/√2 and (1,-1)/√2.
        let a = DMatrix::from_row_slice(2, 2, &[0.35, 0.15, 0.15, 0.35]);
        let op = DiscretizedOperator::from_matrix(grid, a).unwrap();
        let d = eigendecompose(&op).unwrap();
        assert!((d.lambda0() - 2.0).abs() < 1e-12);
        assert!((d.eigenvalues()[1] - 5.0).abs() < 1e-12);
        // Survival from either node: ψ₀ ≡ 1, ⟨1,ψ₀⟩ = 1, ⟨1,ψ₁⟩ = 0, so e^{-2t} exactly.
        for t in [0.5, 1.0, 3.0] {
            assert!((d.uniform_decay_rate(t).unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn correction_improves_convergence() {
        let p = profile();
        let reference = 2.091_691_3;
        let plain = {
            let g = build_grid(&p, 200, Extent::Auto).unwrap();
            eigendecompose(&assemble_plain(&g, &p).unwrap()).unwrap().lambda0()
        };
        let corrected = dec200().lambda0();
        assert!((corrected - reference).abs() < 0.1 * (plain - reference).abs());
    }
}
