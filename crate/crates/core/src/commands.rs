//! The analyze, spectrum, simulate and validate pipelines.
//!
//! Each command writes its artifacts into an output directory together with
//! a JSON summary, and returns the summary. Nothing written depends on the
//! wall clock or on the number of threads.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, SigmaSpec, Suite};
use crate::error::{Error, Result};
use crate::model_measure::{
    entrance_diagnostics, hitting_time_upper_bound, mean_hitting_time, polynomial_entrance, EntranceDiagnostics,
    Outcome, SigmaProfile,
};
use crate::output::{write_json, Cell, Csv};
use crate::simulation::{
    conditional_law_distance, equal_mass_cuts, exp_moment_probe, extrapolate_rate, fit_decay_rate, grid_bin_masses,
    histogram, interval_hitting_mc, mean_occupation, occupation_distance, run_ensemble, run_ensemble_range,
    DecayFit, ExpMoment, Extrapolation, FlagCounts, HittingEstimate, PathEnsembleStats, SimConfig, TvEstimate,
    MIN_CONDITIONAL_SURVIVORS,
};
use crate::spectral::{compare, solve, Extent, RefinementReport, SpectralDecomposition};
use crate::stable_kernels::{k_alpha_constant, omega_alpha, Alpha, StableKernel};

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";

// ---------------------------------------------------------------- analyze

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusValue {
    pub r: f64,
    pub value: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub alpha: f64,
    pub entrance: EntranceDiagnostics,
    /// `sup_x E_x[T_{[-R,R]}]` bound over the R grid.
    pub hitting_bound: Vec<RadiusValue>,
    pub hitting_bound_decreasing: bool,
    /// `P_x[T_0 < exit of (-R, R)]` at `analyze.x`, for R > |x|.
    pub hitting_probability: Vec<(f64, f64)>,
    pub hitting_probability_x: f64,
}

fn reason(o: &Outcome, infinite_mass: bool) -> &'static str {
    match o {
        Outcome::Finite { .. } => "",
        Outcome::Divergent if infinite_mass => "INFINITE_MASS",
        Outcome::Divergent => "TAIL_EXPONENT",
        Outcome::Indeterminate { .. } => "UNRESOLVED_TAIL",
    }
}

fn outcome_value(o: &Outcome) -> Cell {
    match o {
        Outcome::Finite { value } => Cell::F(*value),
        Outcome::Indeterminate { partial, .. } => Cell::F(*partial),
        Outcome::Divergent => Cell::Empty,
    }
}

fn entrance_of(cfg: &ExperimentConfig) -> Result<(EntranceDiagnostics, Option<SigmaProfile>)> {
    match &cfg.sigma {
        SigmaSpec::Polynomial { gamma } => {
            let a = cfg.alpha()?;
            let d = polynomial_entrance(a, *gamma)?;
            let p = SigmaProfile::polynomial(a, *gamma).ok();
            Ok((d, p))
        }
        SigmaSpec::Table { .. } => {
            let p = cfg.profile()?;
            Ok((entrance_diagnostics(&p)?, Some(p)))
        }
    }
}

/// Entrance integral, δ, the λ₀ lower bound, the hitting-time bound over the
/// R grid and the hitting probability of the origin over the R grid.
/// Writes `entrance.csv` and `analyze.json`.
pub fn cmd_analyze(cfg: &ExperimentConfig, out: &Path) -> Result<AnalyzeReport> {
    let (entrance, profile) = entrance_of(cfg)?;
    let infinite_mass = profile.is_none();
    let mut hitting_bound = Vec::new();
    for &r in &cfg.analyze.r_grid {
        let value = match &profile {
            Some(p) => hitting_time_upper_bound(p, r)?,
            None => Outcome::Divergent,
        };
        hitting_bound.push(RadiusValue { r, value });
    }
    let finite: Vec<f64> = hitting_bound.iter().filter_map(|h| h.value.finite()).collect();
    let hitting_bound_decreasing = finite.len() == hitting_bound.len() && finite.windows(2).all(|w| w[1] < w[0]);
    let kernel = StableKernel::new(cfg.alpha()?)?;
    let x = cfg.analyze.x;
    let mut hitting_probability = Vec::new();
    for &r in cfg.analyze.r_grid.iter().filter(|r| **r > x.abs()) {
        hitting_probability.push((r, kernel.hitting_zero_probability(r, x)?));
    }

    let mut csv = Csv::new(&["quantity", "r", "value", "status", "reason"]);
    let scalar = |csv: &mut Csv, name: &str, o: &Outcome| {
        csv.row(vec![
            name.into(),
            Cell::Empty,
            outcome_value(o),
            o.status().into(),
            reason(o, infinite_mass).into(),
        ]);
    };
    scalar(&mut csv, "entrance_integral", &entrance.entrance_integral);
    scalar(&mut csv, "delta", &entrance.delta);
    let bound = match entrance.lambda0_lower {
        Some(v) => Outcome::Finite { value: v },
        None => Outcome::Divergent,
    };
    scalar(&mut csv, "lambda0_lower_bound", &bound);
    for h in &hitting_bound {
        csv.row(vec![
            "hitting_time_bound".into(),
            h.r.into(),
            outcome_value(&h.value),
            h.value.status().into(),
            reason(&h.value, infinite_mass).into(),
        ]);
    }
    for (r, p) in &hitting_probability {
        csv.row(vec![
            "hitting_probability".into(),
            (*r).into(),
            (*p).into(),
            "FINITE".into(),
            "".into(),
        ]);
    }
    csv.write(&out.join("entrance.csv"))?;
    let report = AnalyzeReport {
        alpha: cfg.alpha,
        entrance,
        hitting_bound,
        hitting_bound_decreasing,
        hitting_probability,
        hitting_probability_x: x,
    };
    write_json(&out.join("analyze.json"), &report)?;
    Ok(report)
}

// --------------------------------------------------------------- spectrum

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub truncation: f64,
    pub retained: usize,
    pub lambda0: f64,
    pub lambda1: Option<f64>,
    pub gap: Option<f64>,
    pub lambda0_lower_bound: Option<f64>,
    pub hs_norm: f64,
    /// `ω_α · I`.
    pub hs_bound: f64,
    pub ground_state_residual: f64,
    pub orthonormality_defect: f64,
    pub psi0_min: f64,
    pub noise_floor: f64,
    pub refinement: Option<RefinementReport>,
    /// `max_i Σ e^{-2λ_n} ψ_n(x_i)²`, a truncated proxy only.
    pub heat_diagonal_proxy: f64,
    /// Hard invariants that failed; nonempty makes the command fail.
    pub hard_failures: Vec<String>,
}

/// The solved operator at n (and 2n when refining).
pub struct SpectralRun {
    pub profile: SigmaProfile,
    pub entrance: EntranceDiagnostics,
    pub coarse: SpectralDecomposition,
    pub fine: Option<SpectralDecomposition>,
    pub report: SpectrumReport,
}

/// Solves the configured profile. Refuses profiles without entrance from
/// infinity.
pub fn spectral_run(cfg: &ExperimentConfig) -> Result<SpectralRun> {
    let profile = cfg
        .profile()
        .map_err(|e| Error::EntranceFail(format!("no finite speed measure ({e})")))?;
    let entrance = entrance_diagnostics(&profile)?;
    let Some(i_value) = entrance.entrance_integral.finite() else {
        return Err(Error::EntranceFail(format!(
            "entrance integral is {}",
            entrance.entrance_integral.status()
        )));
    };
    let coarse = solve(&profile, cfg.grid.n, cfg.grid.extent)?;
    let fine = if cfg.grid.refine {
        // Same truncation on both grids so the comparison isolates the node count.
        let extent = Extent::Fixed(coarse.grid().truncation());
        Some(solve(&profile, 2 * cfg.grid.n, extent)?)
    } else {
        None
    };
    let refinement = match &fine {
        Some(f) => Some(compare(&profile, &coarse, f)?),
        None => None,
    };
    let hs_bound = profile.omega_alpha() * i_value;
    let psi0_min = coarse.psi(0).iter().copied().fold(f64::INFINITY, f64::min);
    let mut hard = Vec::new();
    let gap = coarse.gap();
    if !(coarse.lambda0() > 0.0) {
        hard.push("lambda0 not positive".to_string());
    }
    if !gap.is_some_and(|g| g > 0.0) {
        hard.push("no positive spectral gap".to_string());
    }
    if !(psi0_min > 0.0) {
        hard.push("ground state not strictly positive".to_string());
    }
    let ortho = coarse.orthonormality_defect(coarse.retained());
    if !(ortho <= 1e-10) {
        hard.push(format!("orthonormality defect {ortho:e}"));
    }
    let residual = coarse.ground_state_residual();
    if !(residual <= 1e-8) {
        hard.push(format!("ground state residual {residual:e}"));
    }
    if !(coarse.hs_norm() <= hs_bound + 1e-6) {
        hard.push(format!("Hilbert-Schmidt norm {:e} above bound {hs_bound:e}", coarse.hs_norm()));
    }
    if let Some(b) = entrance.lambda0_lower {
        if !(coarse.lambda0() >= 0.99 * b) {
            hard.push(format!("lambda0 {:e} below 0.99 x lower bound {b:e}", coarse.lambda0()));
        }
    }
    let report = SpectrumReport {
        n: cfg.grid.n,
        truncation: coarse.grid().truncation(),
        retained: coarse.retained(),
        lambda0: coarse.lambda0(),
        lambda1: coarse.lambda1(),
        gap,
        lambda0_lower_bound: entrance.lambda0_lower,
        hs_norm: coarse.hs_norm(),
        hs_bound,
        ground_state_residual: residual,
        orthonormality_defect: ortho,
        psi0_min,
        noise_floor: coarse.noise_floor(),
        refinement,
        heat_diagonal_proxy: coarse.heat_diagonal_proxy(2.0),
        hard_failures: hard,
    };
    Ok(SpectralRun {
        profile,
        entrance,
        coarse,
        fine,
        report,
    })
}

/// Writes `spectrum.csv`, `qsd.csv`, `decay.csv` and `spectrum.json`.
pub fn write_spectrum_artifacts(cfg: &ExperimentConfig, run: &SpectralRun, out: &Path) -> Result<()> {
    let dec = &run.coarse;
    let grid = dec.grid();
    let mut spec = Csv::new(&["n", "lambda_n"]);
    for (k, l) in dec.eigenvalues().iter().enumerate() {
        spec.row(vec![k.into(), (*l).into()]);
    }
    spec.write(&out.join("spectrum.csv"))?;

    let qsd = dec.qsd()?;
    let qed = dec.qed();
    let mut q = Csv::new(&["x", "weight", "psi0", "qsd_density", "qed_density"]);
    for i in 0..grid.len() {
        q.row(vec![
            grid.nodes()[i].into(),
            grid.weights()[i].into(),
            dec.psi(0)[i].into(),
            qsd.density[i].into(),
            qed.density[i].into(),
        ]);
    }
    q.write(&out.join("qsd.csv"))?;

    let node = grid.nearest_node(cfg.sim.x0);
    let t_max = 30.0 / dec.lambda0();
    let times: Vec<f64> = (1..=60).map(|k| t_max * k as f64 / 60.0).collect();
    let tv = dec.yaglom_tv_curve(node, &times)?;
    let mut d = Csv::new(&["t", "sup_survival", "uniform_rate", "tv_at_x0"]);
    for (t, (_, tv)) in times.iter().zip(&tv.points) {
        d.row(vec![
            (*t).into(),
            dec.sup_survival(*t).into(),
            dec.uniform_decay_rate(*t)?.into(),
            (*tv).into(),
        ]);
    }
    d.write(&out.join("decay.csv"))?;
    write_json(&out.join("spectrum.json"), &run.report)
}

/// Full spectral pipeline with artifacts.
pub fn cmd_spectrum(cfg: &ExperimentConfig, out: &Path) -> Result<SpectrumReport> {
    let run = spectral_run(cfg)?;
    write_spectrum_artifacts(cfg, &run, out)?;
    Ok(run.report)
}

// --------------------------------------------------------------- simulate

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub n_paths: u64,
    pub flags: FlagCounts,
    pub survivors_at_horizon: u64,
    pub checkpoint_survivors: Vec<(f64, usize)>,
    pub mean_substeps: f64,
    pub occupation_cuts: Vec<f64>,
    pub decay_fit: Option<DecayFit>,
    pub decay_fit_error: Option<String>,
}

/// Cut points splitting μ into `bins` cells of equal mass.
pub fn measure_cuts(profile: &SigmaProfile, bins: usize) -> Result<Vec<f64>> {
    let total = profile.total_mass()?;
    let mut cuts = Vec::with_capacity(bins - 1);
    for k in 1..bins {
        let target = total * k as f64 / bins as f64;
        // Bisection in θ with x = tan θ covers the whole line.
        let (mut lo, mut hi) = (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let x = mid.tan();
            let below = profile.integrate_measure(|_| 1.0, f64::NEG_INFINITY, x, &[])?.value;
            if below < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = (0.5 * (lo + hi)).tan();
        // An even profile puts the middle cut at 0 exactly.
        let c = if profile.is_even() && 2 * k == bins { 0.0 } else { c };
        cuts.push(c);
    }
    Ok(cuts)
}

fn bin_rows(cuts: &[f64], masses: &[f64]) -> Csv {
    let mut csv = Csv::new(&["bin_lo", "bin_hi", "mass"]);
    for (i, m) in masses.iter().enumerate() {
        let lo = if i == 0 { f64::NEG_INFINITY } else { cuts[i - 1] };
        let hi = if i == cuts.len() { f64::INFINITY } else { cuts[i] };
        csv.row(vec![lo.into(), hi.into(), (*m).into()]);
    }
    csv
}

/// Writes `survival.csv`, `conditional_t{T}.csv`, `occupation.csv`, `hits.csv`.
pub fn write_simulation_artifacts(stats: &PathEnsembleStats, out: &Path) -> Result<()> {
    let mut s = Csv::new(&["t", "fraction", "ci"]);
    for p in stats.survival_curve() {
        s.row(vec![p.t.into(), p.fraction.into(), p.ci_half_width.into()]);
    }
    s.write(&out.join("survival.csv"))?;
    let cuts = &stats.config.occupation_cuts;
    for (t, samples) in stats.config.checkpoints.iter().zip(&stats.checkpoint_samples) {
        bin_rows(cuts, &histogram(samples, cuts)).write(&out.join(format!("conditional_t{t}.csv")))?;
    }
    bin_rows(cuts, &mean_occupation(stats)).write(&out.join("occupation.csv"))?;
    let mut h = Csv::new(&["path_id", "t_hit", "flag"]);
    for (i, (t, fate)) in stats.outcomes.iter().enumerate() {
        h.row(vec![i.into(), (*t).into(), fate.label().into()]);
    }
    h.write(&out.join("hits.csv"))
}

fn simulate_report(cfg: &ExperimentConfig, stats: &PathEnsembleStats) -> SimulateReport {
    let (decay_fit, decay_fit_error) = match fit_decay_rate(stats, cfg.mc.fit_window) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SimulateReport {
        n_paths: stats.n_paths,
        flags: stats.flags,
        survivors_at_horizon: stats.flags.censored,
        checkpoint_survivors: stats
            .config
            .checkpoints
            .iter()
            .copied()
            .zip(stats.checkpoint_samples.iter().map(Vec::len))
            .collect(),
        mean_substeps: stats.flags.substeps as f64 / stats.n_paths as f64,
        occupation_cuts: stats.config.occupation_cuts.clone(),
        decay_fit,
        decay_fit_error,
    }
}

/// Ensemble run with bins of equal μ-mass. Writes the simulation artifacts
/// and `simulate.json`.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<SimulateReport> {
    let profile = cfg
        .profile()
        .map_err(|e| Error::EntranceFail(format!("no finite speed measure ({e})")))?;
    let sim = SimConfig {
        occupation_cuts: measure_cuts(&profile, cfg.mc.occupation_bins)?,
        ..cfg.sim.clone()
    };
    let stats = run_ensemble(&profile, &sim)?;
    write_simulation_artifacts(&stats, out)?;
    let report = simulate_report(cfg, &stats);
    write_json(&out.join("simulate.json"), &report)?;
    Ok(report)
}

// --------------------------------------------------------------- validate

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    /// Suite not selected.
    Skipped,
    /// The profile does not admit the check.
    Refused,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    /// `<=`, `<`, `>=`, `>`, or `info` for values reported without a test.
    pub relation: &'static str,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: u32,
    pub name: &'static str,
    pub status: Status,
    /// The deciding measurement: the first failing one, else the first.
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    pub anchor: &'static str,
    pub note: String,
    pub measurements: Vec<Measurement>,
}

struct CheckBuilder {
    id: u32,
    name: &'static str,
    anchor: &'static str,
    ms: Vec<Measurement>,
    notes: Vec<String>,
}

impl CheckBuilder {
    fn new(id: u32, name: &'static str, anchor: &'static str) -> Self {
        Self {
            id,
            name,
            anchor,
            ms: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn test(&mut self, name: impl Into<String>, value: f64, relation: &'static str, tol: f64) -> bool {
        let pass = match relation {
            "<=" => value <= tol,
            "<" => value < tol,
            ">=" => value >= tol,
            ">" => value > tol,
            _ => unreachable!("unknown relation {relation}"),
        };
        self.ms.push(Measurement {
            name: name.into(),
            value,
            relation,
            tolerance: Some(tol),
            pass: Some(pass),
        });
        pass
    }

    fn le(&mut self, name: impl Into<String>, value: f64, tol: f64) -> bool {
        self.test(name, value, "<=", tol)
    }

    fn info(&mut self, name: impl Into<String>, value: f64) {
        self.ms.push(Measurement {
            name: name.into(),
            value,
            relation: "info",
            tolerance: None,
            pass: None,
        });
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Records an error as a failing measurement.
    fn error(&mut self, what: &str, e: &Error) {
        self.note(format!("{what}: {e}"));
        self.ms.push(Measurement {
            name: what.to_string(),
            value: f64::NAN,
            relation: "info",
            tolerance: None,
            pass: Some(false),
        });
    }

    fn finish(self) -> Check {
        let failing = self.ms.iter().find(|m| m.pass == Some(false));
        let decisive = failing.or_else(|| self.ms.iter().find(|m| m.pass.is_some()));
        let status = if failing.is_some() || decisive.is_none() {
            Status::Fail
        } else {
            Status::Pass
        };
        Check {
            id: self.id,
            name: self.name,
            status,
            measured: decisive.map(|m| m.value),
            tolerance: decisive.and_then(|m| m.tolerance),
            anchor: self.anchor,
            note: self.notes.join("; "),
            measurements: self.ms,
        }
    }

    fn with_status(self, status: Status, note: impl Into<String>) -> Check {
        Check {
            id: self.id,
            name: self.name,
            status,
            measured: None,
            tolerance: None,
            anchor: self.anchor,
            note: note.into(),
            measurements: Vec::new(),
        }
    }
}

/// Names and anchors of the checks, in order.
pub const CHECKS: [(u32, &str, &str, Suite); 18] = [
    (1, "kernel_identities", "point-killed stable Green function: symmetry, vanishing on the axes, reflection, G <= omega min(|x|,|y|)^(alpha-1)", Suite::Kernel),
    (2, "exterior_kernel_limit", "exterior Green function of [-1,1]: G(x,y) -> K_alpha h(y) as x -> infinity", Suite::Kernel),
    (3, "exterior_kernel_scaling", "self-similarity: G_R(x,y) = R^(alpha-1) G_1(x/R, y/R)", Suite::Kernel),
    (4, "entrance_quantities", "polynomial example: I = pi/4, delta maximized at x = 1/3, lambda0 >= 1/(4 omega delta)", Suite::Entrance),
    (5, "entrance_dichotomy", "polynomial example: entrance from infinity iff gamma > 1", Suite::Entrance),
    (6, "hilbert_schmidt_bound", "Green operator on L2(mu) is Hilbert-Schmidt with norm <= omega I", Suite::Spectral),
    (7, "spectrum", "compact Green operator: simple positive ground state, spectral gap, lambda0 lower bound", Suite::Spectral),
    (8, "qsd_qed_normalization", "nu = psi0 mu / mu(psi0) and m = psi0^2 mu are probability measures", Suite::Spectral),
    (9, "qsd_exit_law", "P_nu[T0 > t] = exp(-lambda0 t)", Suite::Spectral),
    (10, "yaglom_rate", "conditioned law converges to nu at rate exp(-(lambda1 - lambda0) t)", Suite::Spectral),
    (11, "uniform_decay_rate", "sup_x P_x[T0 > t] decays at rate lambda0", Suite::Spectral),
    (12, "mc_decay_rate", "P_x[T0 > t] ~ psi0(x) <psi0, 1> exp(-lambda0 t)", Suite::Mc),
    (13, "mc_yaglom_limit", "law of Y_t given survival converges to the QSD nu", Suite::Mc),
    (14, "mc_qed", "time-averaged occupation given survival converges to m = psi0^2 mu", Suite::Mc),
    (15, "mc_exponential_moments", "sup_x E_x[exp(lambda T0)] finite iff lambda < lambda0", Suite::Mc),
    (16, "hitting_time_closure", "E_x[T_[-R,R]] = integral of the exterior Green function against mu, bounded uniformly in x", Suite::Hitting),
    (17, "hitting_probability_ratio", "P_x[T0 < exit of (-R,R)] -> 1 as R -> infinity", Suite::Hitting),
    (18, "determinism", "byte-identical artifacts for a fixed seed and config across thread counts", Suite::Determinism),
];

fn builder(id: u32) -> CheckBuilder {
    let (_, name, anchor, _) = CHECKS[id as usize - 1];
    CheckBuilder::new(id, name, anchor)
}

/// Test hooks for validate.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ValidateHooks {
    /// Relative amplitude of an oscillating perturbation applied to ψ₀
    /// before the ground-state residual is evaluated.
    pub psi0_perturbation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEpsLevel {
    pub eps: f64,
    pub fit: Option<DecayFit>,
    pub survivors_at_checkpoint: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub eps_levels: Vec<McEpsLevel>,
    pub extrapolation: Option<Extrapolation>,
    pub yaglom_time: f64,
    pub yaglom_tv: Option<TvEstimate>,
    pub qed_horizon: f64,
    pub qed_paths: u64,
    pub qed_tv: Option<TvEstimate>,
    pub exp_moments: Vec<(u64, ExpMoment, ExpMoment)>,
    pub hitting: Option<HittingClosure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingClosure {
    pub r: f64,
    pub x0: f64,
    pub quadrature: f64,
    pub upper_bound: Option<f64>,
    pub mc: HittingEstimate,
    pub mc_wide_band: HittingEstimate,
    pub mc_refined: HittingEstimate,
    pub bias_allowance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub entrance: Option<EntranceDiagnostics>,
    pub spectrum: Option<SpectrumReport>,
    pub monte_carlo: Option<McSummary>,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl ValidationReport {
    pub fn check(&self, id: u32) -> &Check {
        &self.checks[id as usize - 1]
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn kernel_identities(seed: u64) -> Result<Check> {
    let mut c = builder(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b65_726e);
    let draw = |rng: &mut ChaCha8Rng| {
        let m = 10f64.powf(rng.random_range(-3.0..3.0));
        if rng.random_bool(0.5) { m } else { -m }
    };
    for a in [1.1, 1.5, 1.9] {
        let k = StableKernel::new(Alpha::new(a)?)?;
        let omega = k.omega_alpha();
        let p = a - 1.0;
        let (mut sym, mut refl, mut axis, mut bound, mut nonpos) = (0.0f64, 0.0f64, 0.0f64, f64::NEG_INFINITY, 0u32);
        for _ in 0..100_000 {
            let (x, y) = (draw(&mut rng), draw(&mut rng));
            let g = k.green_point_killed(x, y);
            sym = sym.max((g - k.green_point_killed(y, x)).abs());
            refl = refl.max((g - k.green_point_killed(-x, -y)).abs());
            axis = axis.max(k.green_point_killed(x, 0.0).abs()).max(k.green_point_killed(0.0, y).abs());
            bound = bound.max(g - omega * x.abs().min(y.abs()).powf(p));
            if !(g > 0.0) {
                nonpos += 1;
            }
        }
        c.le(format!("alpha={a}: max symmetry defect"), sym, 1e-12);
        c.le(format!("alpha={a}: max reflection defect"), refl, 1e-12);
        c.le(format!("alpha={a}: max |G| on the axes"), axis, 1e-12);
        c.le(format!("alpha={a}: max G - omega min(|x|,|y|)^(alpha-1)"), bound, 1e-12);
        c.le(format!("alpha={a}: nonpositive values off the axes"), nonpos as f64, 0.0);
    }
    let k = StableKernel::new(Alpha::new(1.5)?)?;
    let mut ext = 0.0f64;
    for _ in 0..10_000 {
        let x = draw(&mut rng).signum() * (1.0 + 10f64.powf(rng.random_range(-3.0..2.0)));
        let y = draw(&mut rng).signum() * (1.0 + 10f64.powf(rng.random_range(-3.0..2.0)));
        if x != y {
            ext = ext.max((k.green_exterior_unit(x, y)? - k.green_exterior_unit(y, x)?).abs());
        }
    }
    c.le("alpha=1.5: exterior kernel symmetry defect", ext, 1e-12);
    Ok(c.finish())
}

fn exterior_limit() -> Result<Check> {
    let mut c = builder(2);
    let a = Alpha::new(1.5)?;
    let k = StableKernel::new(a)?;
    let ka = k_alpha_constant(a)?;
    let lim = k.exterior_limit_constant();
    c.info("K_alpha", ka);
    c.info("lim G(x,y)/h(y)", lim);
    for y in [1.5, 2.0, 3.0, 5.0] {
        let g = k.green_exterior_unit(1e4, y)?;
        let h = k.h(y)?;
        c.test(format!("y={y}: |G(1e4,y) - K h(y)| / K h(y)"), rel(g, ka * h), "<", 1e-2);
        c.info(format!("y={y}: |G(1e4,y) - C h(y)| / C h(y), C the limit constant"), rel(g, lim * h));
    }
    Ok(c.finish())
}

fn exterior_scaling(seed: u64) -> Result<Check> {
    let mut c = builder(3);
    let k = StableKernel::new(Alpha::new(1.5)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7363_616c);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 10_000 {
        let r = 10f64.powf(rng.random_range(-2.0..2.0));
        let side = |rng: &mut ChaCha8Rng| {
            let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            s * r * 10f64.powf(rng.random_range(0.005..1.5))
        };
        let (x, y) = (side(&mut rng), side(&mut rng));
        if x == y {
            continue;
        }
        let direct = k.green_exterior(r, x, y)?;
        let scaled = r.powf(0.5) * k.green_exterior_unit(x / r, y / r)?;
        worst = worst.max(rel(direct, scaled));
        n += 1;
    }
    c.test("max relative error over 1e4 samples", worst, "<", 1e-10);
    Ok(c.finish())
}

fn entrance_quantities() -> Result<Check> {
    let mut c = builder(4);
    let d = polynomial_entrance(Alpha::new(1.5)?, 2.0)?;
    let i = d.entrance_integral.finite().unwrap_or(f64::NAN);
    let delta = d.delta.finite().unwrap_or(f64::NAN);
    let bound = d.lambda0_lower.unwrap_or(f64::NAN);
    c.le("|I - pi/4|", (i - std::f64::consts::FRAC_PI_4).abs(), 1e-6);
    c.le("|delta - (3/4)^2/sqrt(3)|", (delta - 0.5625 / 3f64.sqrt()).abs(), 1e-4);
    c.le("|lambda0 bound - 0.48237|", (bound - 0.48237).abs(), 1e-4);
    c.info("delta argmax", d.delta_argmax.unwrap_or(f64::NAN));
    Ok(c.finish())
}

fn entrance_dichotomy() -> Result<Check> {
    let mut c = builder(5);
    let mut mismatches = 0u32;
    for a in [1.2, 1.5, 1.8] {
        for g in [0.5, 0.8, 1.0, 1.2, 2.0, 4.0] {
            let d = polynomial_entrance(Alpha::new(a)?, g)?;
            let want_finite = g > 1.0;
            for (what, o) in [("I", d.entrance_integral), ("delta", d.delta)] {
                let ok = if want_finite {
                    o.is_finite()
                } else {
                    o == Outcome::Divergent
                };
                if !ok {
                    mismatches += 1;
                    c.note(format!(
                        "alpha={a} gamma={g}: {what} is {}{}",
                        o.status(),
                        o.finite().map(|v| format!(" ({v})")).unwrap_or_default()
                    ));
                }
            }
        }
    }
    c.le("cells classified against gamma > 1", mismatches as f64, 0.0);
    Ok(c.finish())
}

struct SpectralChecks {
    checks: Vec<Check>,
}

fn spectral_checks(cfg: &ExperimentConfig, run: &SpectralRun, hooks: ValidateHooks) -> Result<SpectralChecks> {
    let dec = &run.coarse;
    let r = &run.report;
    let mut out = Vec::new();

    let mut c6 = builder(6);
    c6.le(format!("n={}: hs_norm - omega I", cfg.grid.n), r.hs_norm - r.hs_bound, 1e-6);
    if let Some(f) = &run.fine {
        c6.le(format!("n={}: hs_norm - omega I", 2 * cfg.grid.n), f.hs_norm() - r.hs_bound, 1e-6);
    }
    out.push(c6.finish());

    let mut c7 = builder(7);
    c7.test("lambda0", dec.lambda0(), ">", 0.0);
    c7.test("lambda1 - lambda0", r.gap.unwrap_or(f64::NAN), ">", 0.0);
    match r.lambda0_lower_bound {
        Some(b) => {
            c7.test("lambda0 / lower bound", dec.lambda0() / b, ">=", 0.99);
        }
        None => c7.note("no finite lower bound"),
    }
    c7.test("min psi0", r.psi0_min, ">", 0.0);
    c7.le("orthonormality defect", r.orthonormality_defect, 1e-10);
    let residual = match hooks.psi0_perturbation {
        Some(eps) => {
            let psi: Vec<f64> = dec
                .psi(0)
                .iter()
                .enumerate()
                .map(|(i, p)| p * (1.0 + eps * (i as f64).sin()))
                .collect();
            c7.note(format!("psi0 perturbed by relative amplitude {eps}"));
            dec.residual_for(&psi, dec.lambda0())
        }
        None => r.ground_state_residual,
    };
    c7.le("ground state residual", residual, 1e-8);
    match &r.refinement {
        Some(rf) => {
            c7.le(
                format!("|lambda0({}) - lambda0({})| / lambda0", rf.n, 2 * rf.n),
                rf.relative_change[0],
                1e-3,
            );
        }
        None => c7.note("refinement disabled"),
    }
    out.push(c7.finish());

    let mut c8 = builder(8);
    let grid = dec.grid();
    match dec.qsd() {
        Ok(q) => {
            c8.le("|nu mass - 1|", (q.mass(grid) - 1.0).abs(), 1e-8);
        }
        Err(e) => c8.error("qsd", &e),
    }
    c8.le("|m mass - 1|", (dec.qed().mass(grid) - 1.0).abs(), 1e-8);
    if run.profile.is_even() {
        c8.le(
            "psi0 parity defect",
            SpectralDecomposition::parity_defect(dec.psi(0), grid, 1.0),
            1e-6,
        );
        if dec.retained() > 1 {
            c8.info("psi1 odd-parity defect", SpectralDecomposition::parity_defect(dec.psi(1), grid, -1.0));
        }
    } else {
        c8.note("sigma not even: parity not tested");
    }
    out.push(c8.finish());

    let mut c9 = builder(9);
    match dec.qsd() {
        Ok(q) => {
            let w = grid.weights();
            let t_max = 10.0 / dec.lambda0();
            let mut worst = 0.0f64;
            for k in 0..=40 {
                let t = t_max * k as f64 / 40.0;
                let mut s = 0.0;
                for i in 0..grid.len() {
                    s += q.density[i] * w[i] * dec.semigroup_survival(t, i, None)?.value;
                }
                worst = worst.max((s - (-dec.lambda0() * t).exp()).abs());
            }
            c9.le("max_t |P_nu[T0 > t] - exp(-lambda0 t)|", worst, 1e-6);
        }
        Err(e) => c9.error("qsd", &e),
    }
    out.push(c9.finish());

    let mut c10 = builder(10);
    let node = grid.nearest_node(cfg.sim.x0);
    match dec.yaglom_rate(node, 21) {
        Ok(y) => {
            c10.info("fitted slope", y.slope);
            c10.info("lambda1 - lambda0", y.gap);
            c10.le("|slope + gap| / gap", y.relative_error, cfg.validate.yaglom_rate);
        }
        Err(e) => c10.error("yaglom rate", &e),
    }
    out.push(c10.finish());

    let mut c11 = builder(11);
    let t = 30.0 / dec.lambda0();
    let rate = dec.uniform_decay_rate(t)?;
    c11.info("rate at t = 30/lambda0", rate);
    c11.le("|rate - lambda0| / lambda0", rel(rate, dec.lambda0()), cfg.validate.uniform_rate);
    out.push(c11.finish());

    Ok(SpectralChecks { checks: out })
}

fn round_up_to(t: f64, dt: f64) -> f64 {
    (t / dt - 1e-9).ceil() * dt
}

fn mc_checks(
    cfg: &ExperimentConfig,
    run: &SpectralRun,
    out: &Path,
    do_mc: bool,
    do_hitting: bool,
) -> Result<(Vec<Check>, McSummary)> {
    let dec = &run.coarse;
    let profile = &run.profile;
    let lambda0 = dec.lambda0();
    let gap = dec.gap().ok_or(Error::DegenerateGap { gap: 0.0 })?;
    let grid = dec.grid();
    let bins = cfg.mc.occupation_bins;
    let qsd = dec.qsd()?;
    let qed = dec.qed();
    let nu_cuts = equal_mass_cuts(grid, &qsd.density, bins);
    let nu_bins = grid_bin_masses(grid, &qsd.density, &nu_cuts);
    let m_cuts = equal_mass_cuts(grid, &qed.density, bins);
    let m_bins = grid_bin_masses(grid, &qed.density, &m_cuts);
    let t_yaglom = round_up_to(10.0 / gap, cfg.sim.dt);
    let mut checkpoints = cfg.sim.checkpoints.clone();
    checkpoints.push(t_yaglom);
    let horizon = cfg.sim.horizon.max(t_yaglom).max(cfg.mc.fit_window.1);
    let base = SimConfig {
        horizon,
        checkpoints,
        occupation_cuts: nu_cuts.clone(),
        ..cfg.sim.clone()
    };
    let yaglom_index = base.checkpoints.len() - 1;
    let mut checks = Vec::new();
    let mut summary = McSummary {
        eps_levels: Vec::new(),
        extrapolation: None,
        yaglom_time: t_yaglom,
        yaglom_tv: None,
        qed_horizon: round_up_to(cfg.mc.qed_gap_multiple / gap, cfg.sim.dt),
        qed_paths: 0,
        qed_tv: None,
        exp_moments: Vec::new(),
        hitting: None,
    };

    if do_mc {
        // ε study with common random numbers.
        let mut c12 = builder(12);
        let mut main_stats = None;
        let mut levels = Vec::new();
        let main_eps = if cfg.mc.eps_levels.contains(&cfg.sim.eps) {
            cfg.sim.eps
        } else {
            cfg.mc.eps_levels.iter().copied().fold(f64::INFINITY, f64::min)
        };
        for &eps in &cfg.mc.eps_levels {
            let stats = run_ensemble(profile, &SimConfig { eps, ..base.clone() })?;
            let fit = fit_decay_rate(&stats, cfg.mc.fit_window);
            match &fit {
                Ok(f) => {
                    c12.info(format!("eps={eps:e}: lambda_hat"), f.lambda_hat);
                    c12.info(format!("eps={eps:e}: std error"), f.std_error);
                    levels.push((eps, f.lambda_hat, f.std_error));
                }
                Err(e) => c12.note(format!("eps={eps:e}: {e}")),
            }
            summary.eps_levels.push(McEpsLevel {
                eps,
                fit: fit.ok(),
                survivors_at_checkpoint: stats.checkpoint_samples[yaglom_index].len(),
            });
            if eps == main_eps {
                main_stats = Some(stats);
            }
        }
        let mut by_eps = levels.clone();
        by_eps.sort_by(|a, b| b.0.total_cmp(&a.0));
        let trend = by_eps.windows(2).all(|w| (w[1].1 - lambda0).abs() <= (w[0].1 - lambda0).abs() + 2.0 * w[1].2);
        c12.info("lambda_hat trends toward lambda0 as eps decreases (1 = yes)", if trend { 1.0 } else { 0.0 });
        match extrapolate_rate(&levels, profile.alpha()) {
            Ok(x) => {
                c12.info("extrapolated lambda", x.lambda_star);
                c12.info("spectral lambda0", lambda0);
                c12.le("|extrapolated - lambda0| / lambda0", rel(x.lambda_star, lambda0), cfg.validate.mc_rate);
                summary.extrapolation = Some(x);
            }
            Err(e) => c12.error("extrapolation", &e),
        }
        checks.push(c12.finish());
        let main_stats = main_stats.expect("main eps level is one of the levels");
        write_simulation_artifacts(&main_stats, out)?;

        let mut c13 = builder(13);
        c13.info("checkpoint t", t_yaglom);
        match conditional_law_distance(&main_stats, yaglom_index, &nu_cuts, &nu_bins) {
            Ok(tv) => {
                c13.info("bootstrap 95% half width", tv.ci_half_width);
                c13.info("survivors", tv.samples as f64);
                c13.test("TV(survivors, nu)", tv.tv, "<", cfg.validate.tv + tv.ci_half_width);
                summary.yaglom_tv = Some(tv);
            }
            Err(e) => c13.error("conditional law", &e),
        }
        checks.push(c13.finish());

        // Occupation needs survivors at a long horizon: add batches of paths
        // until enough survive or the cap is reached.
        let mut c14 = builder(14);
        let qed_cfg = SimConfig {
            horizon: summary.qed_horizon,
            checkpoints: Vec::new(),
            occupation_cuts: m_cuts.clone(),
            seed: cfg.sim.seed ^ 0x0ccu64,
            eps: main_eps,
            ..cfg.sim.clone()
        };
        let batch = 500_000u64.min(cfg.mc.qed_paths);
        let mut qed_stats = run_ensemble_range(profile, &qed_cfg, 0..batch)?;
        while qed_stats.occupation_samples.len() < cfg.mc.qed_survivors && qed_stats.n_paths < cfg.mc.qed_paths {
            let start = qed_stats.n_paths;
            let end = (start + batch).min(cfg.mc.qed_paths);
            qed_stats.append(run_ensemble_range(profile, &qed_cfg, start..end)?)?;
        }
        summary.qed_paths = qed_stats.n_paths;
        c14.info("horizon", summary.qed_horizon);
        c14.info("paths", qed_stats.n_paths as f64);
        match occupation_distance(&qed_stats, &m_bins, MIN_CONDITIONAL_SURVIVORS) {
            Ok(tv) => {
                c14.info("bootstrap 95% half width", tv.ci_half_width);
                c14.info("survivors", tv.samples as f64);
                c14.test("TV(occupation, m)", tv.tv, "<", cfg.validate.tv + tv.ci_half_width);
                summary.qed_tv = Some(tv);
            }
            Err(e) => c14.error("occupation", &e),
        }
        checks.push(c14.finish());

        let mut c15 = builder(15);
        let mut low = Vec::new();
        let mut high_flags = 0u32;
        for k in 0..cfg.mc.seeds as u64 {
            let stats = if k == 0 {
                main_stats.clone()
            } else {
                run_ensemble(
                    profile,
                    &SimConfig {
                        seed: cfg.sim.seed.wrapping_add(k),
                        eps: main_eps,
                        checkpoints: Vec::new(),
                        occupation_cuts: Vec::new(),
                        ..base.clone()
                    },
                )?
            };
            let lo = exp_moment_probe(stats.kill_times(), 0.5 * lambda0)?;
            let hi = exp_moment_probe(stats.kill_times(), 1.5 * lambda0)?;
            if hi.divergence_flag {
                high_flags += 1;
            }
            summary.exp_moments.push((stats.config.seed, lo, hi));
            low.push(lo);
        }
        let mean = low.iter().map(|m| m.mean).sum::<f64>() / low.len() as f64;
        let worst_z = low
            .iter()
            .map(|m| (m.mean - mean).abs() / m.std_error)
            .fold(0.0f64, f64::max);
        c15.info("mean of E[exp(0.5 lambda0 T0)] over seeds", mean);
        c15.le(
            "seeds flagged at 0.5 lambda0",
            low.iter().filter(|m| m.divergence_flag || !m.mean.is_finite()).count() as f64,
            0.0,
        );
        c15.le("max |seed estimate - mean| / std error at 0.5 lambda0", worst_z, 3.0);
        c15.test("seeds flagged at 1.5 lambda0", high_flags as f64, ">=", cfg.mc.seeds as f64);
        checks.push(c15.finish());
    }

    if do_hitting {
        let mut c16 = builder(16);
        let h = &cfg.hitting;
        let quad = mean_hitting_time(profile, h.r, h.x0)?;
        let bound = hitting_time_upper_bound(profile, h.r)?.finite();
        let mc_cfg = SimConfig {
            eps: h.band,
            horizon: h.horizon,
            n_paths: h.n_paths,
            checkpoints: Vec::new(),
            occupation_cuts: Vec::new(),
            ..cfg.sim.clone()
        };
        let mc = interval_hitting_mc(profile, h.r, h.x0, &mc_cfg)?;
        let wide = interval_hitting_mc(profile, h.r, h.x0, &SimConfig { eps: 2.0 * h.band, ..mc_cfg.clone() })?;
        let refined = interval_hitting_mc(
            profile,
            h.r,
            h.x0,
            &SimConfig {
                dt: 0.5 * mc_cfg.dt,
                substep_control: 0.5 * mc_cfg.substep_control,
                ..mc_cfg.clone()
            },
        )?;
        let bias = (wide.mean - mc.mean).abs() + (refined.mean - mc.mean).abs();
        c16.info("quadrature mean", quad);
        c16.info("Monte Carlo mean", mc.mean);
        c16.info("Monte Carlo std error", mc.std_error);
        c16.info("bias allowance", bias);
        c16.info("fraction beyond horizon", mc.horizon_exceeded);
        c16.le("|MC - quadrature|", (mc.mean - quad).abs(), 3.0 * mc.std_error + bias);
        match bound {
            Some(b) => {
                c16.le("quadrature mean - upper bound", quad - b, 0.0);
            }
            None => c16.error("upper bound", &Error::Domain("bound not finite".into())),
        }
        summary.hitting = Some(HittingClosure {
            r: h.r,
            x0: h.x0,
            quadrature: quad,
            upper_bound: bound,
            mc,
            mc_wide_band: wide,
            mc_refined: refined,
            bias_allowance: bias,
        });
        checks.push(c16.finish());
    }
    Ok((checks, summary))
}

fn hitting_ratio() -> Result<Check> {
    let mut c = builder(17);
    let k = StableKernel::new(Alpha::new(1.5)?)?;
    let mut prev = f64::NEG_INFINITY;
    let mut decreases = 0u32;
    let mut last = f64::NAN;
    for r in [1.0, 10.0, 100.0, 1000.0] {
        let p = k.hitting_zero_probability(r, 0.5)?;
        c.info(format!("R={r}: ratio"), p);
        if p < prev {
            decreases += 1;
        }
        prev = p;
        last = p;
    }
    c.le("decreases along R = 1, 10, 100, 1000", decreases as f64, 0.0);
    c.le("1 - ratio at R = 1000", 1.0 - last, 1e-2);
    Ok(c.finish())
}

fn files_under(dir: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).expect("under dir").to_path_buf();
                out.insert(rel, std::fs::read(&p)?);
            }
        }
    }
    Ok(out)
}

/// Small versions of analyze, spectrum and simulate, for determinism checks.
pub fn cheap_runs(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    cmd_analyze(cfg, out)?;
    let spectral_ok = cfg.profile().ok().map(|p| entrance_diagnostics(&p)).transpose()?.is_some_and(|d| d.entrance_integral.is_finite());
    if spectral_ok {
        let mut small = cfg.clone();
        small.grid.n = 96;
        small.grid.refine = false;
        cmd_spectrum(&small, out)?;
    }
    if cfg.profile().is_ok() {
        let mut small = cfg.clone();
        small.sim.n_paths = 2000;
        small.sim.horizon = 2.0;
        small.sim.checkpoints = vec![1.0];
        cmd_simulate(&small, out)?;
    }
    Ok(())
}

fn determinism(cfg: &ExperimentConfig, out: &Path) -> Result<Check> {
    let mut c = builder(18);
    let root = out.join("determinism");
    let mut trees = Vec::new();
    for (label, threads) in [("threads1_a", 1), ("threads1_b", 1), ("threads8", 8)] {
        let dir = root.join(label);
        if dir.exists() {
            std::fs::remove_dir_all(&dir)?;
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        pool.install(|| cheap_runs(cfg, &dir))?;
        trees.push(files_under(&dir)?);
    }
    c.info("files compared", trees[0].len() as f64);
    let mut differing = 0u32;
    for other in &trees[1..] {
        if other.keys().ne(trees[0].keys()) {
            differing += 1;
            c.note("file sets differ");
            continue;
        }
        for (name, bytes) in &trees[0] {
            if other[name] != *bytes {
                differing += 1;
                c.note(format!("{} differs", name.display()));
            }
        }
    }
    c.le("differing files", differing as f64, 0.0);
    Ok(c.finish())
}

/// Runs the selected suites and writes `report.json` (and the artifacts of
/// the underlying runs). Every check is reported, unselected ones as
/// SKIPPED and those the profile does not admit as REFUSED.
pub fn cmd_validate(cfg: &ExperimentConfig, out: &Path, hooks: ValidateHooks) -> Result<ValidationReport> {
    let seed = cfg.sim.seed;
    let mut checks: BTreeMap<u32, Check> = BTreeMap::new();
    let skip = |id: u32| builder(id).with_status(Status::Skipped, "suite not selected");

    if cfg.runs(Suite::Kernel) {
        checks.insert(1, kernel_identities(seed)?);
        checks.insert(2, exterior_limit()?);
        checks.insert(3, exterior_scaling(seed)?);
    }
    let analyze = cmd_analyze(cfg, out)?;
    if cfg.runs(Suite::Entrance) {
        checks.insert(4, entrance_quantities()?);
        checks.insert(5, entrance_dichotomy()?);
    }
    let needs_spectral = cfg.runs(Suite::Spectral) || cfg.runs(Suite::Mc) || cfg.runs(Suite::Hitting);
    let mut spectrum = None;
    let mut monte_carlo = None;
    if needs_spectral {
        let refusal = if analyze.entrance.entrance_integral.is_finite() {
            None
        } else {
            Some(format!(
                "ENTRANCE_FAIL: entrance integral is {}",
                analyze.entrance.entrance_integral.status()
            ))
        };
        match refusal {
            Some(why) => {
                for id in 6..=16 {
                    let (_, _, _, suite) = CHECKS[id as usize - 1];
                    if cfg.runs(suite) {
                        checks.insert(id, builder(id).with_status(Status::Refused, why.clone()));
                    }
                }
            }
            None => {
                let run = spectral_run(cfg)?;
                write_spectrum_artifacts(cfg, &run, out)?;
                if cfg.runs(Suite::Spectral) {
                    for c in spectral_checks(cfg, &run, hooks)?.checks {
                        checks.insert(c.id, c);
                    }
                }
                if cfg.runs(Suite::Mc) || cfg.runs(Suite::Hitting) {
                    let (cs, summary) = mc_checks(cfg, &run, out, cfg.runs(Suite::Mc), cfg.runs(Suite::Hitting))?;
                    for c in cs {
                        checks.insert(c.id, c);
                    }
                    monte_carlo = Some(summary);
                }
                spectrum = Some(run.report);
            }
        }
    }
    if cfg.runs(Suite::Hitting) {
        checks.insert(17, hitting_ratio()?);
    }
    if cfg.runs(Suite::Determinism) {
        checks.insert(18, determinism(cfg, out)?);
    }
    let checks: Vec<Check> = (1..=CHECKS.len() as u32)
        .map(|id| checks.remove(&id).unwrap_or_else(|| skip(id)))
        .collect();
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    let passed = checks.iter().filter(|c| c.status == Status::Pass).count();
    let report = ValidationReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        entrance: Some(analyze.entrance),
        spectrum,
        monte_carlo,
        checks,
        passed,
        failed,
    };
    write_json(&out.join(REPORT_FILE), &report)?;
    Ok(report)
}

/// One line per check: `[PASS] 7 spectrum: measured ... tolerance ...`.
pub fn summary_lines(report: &ValidationReport) -> Vec<String> {
    report
        .checks
        .iter()
        .map(|c| {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIPPED",
                Status::Refused => "REFUSED",
            };
            let mut line = format!("[{status}] {:>2} {}", c.id, c.name);
            if let (Some(m), Some(t)) = (c.measured, c.tolerance) {
                line.push_str(&format!(": measured {m:.6e}, tolerance {t:.6e}"));
            }
            if !c.note.is_empty() {
                line.push_str(&format!(" ({})", c.note));
            }
            line
        })
        .collect()
}

/// ω_α, exposed for report consumers that want the Hilbert-Schmidt bound
/// without building a profile.
pub fn omega(alpha: f64) -> Result<f64> {
    Ok(omega_alpha(Alpha::new(alpha)?))
}
