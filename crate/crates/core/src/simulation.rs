//! Monte Carlo for `dY = σ(Y-) dX` with killing near the origin.
//!
//! Paths are observed on the record grid `k·dt`. Inside a record step the
//! Euler scheme takes substeps `h = min(remaining, (κ·d/σ(Y))^α)` where `d` is
//! the distance to the killing set, so that a single stable increment moves
//! the path by about `κ·d`. Near the origin the scheme therefore slows down
//! enough to resolve hitting of the ε-ball, and far out it takes whole record
//! steps.
//!
//! Every path draws from its own ChaCha8 stream `(seed, path index)`. Paths
//! are simulated in parallel in fixed-size chunks and merged in index order,
//! so results do not depend on the number of threads.

use std::f64::consts::PI;
use std::ops::Range;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_measure::SigmaProfile;
use crate::spectral::QuadratureGrid;
use crate::stable_kernels::Alpha;
use crate::stats::{quantile_sorted, weighted_line, wilson};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e12;
pub const DEFAULT_SUBSTEP_CONTROL: f64 = 0.15;
pub const BOOTSTRAP_RESAMPLES: usize = 200;
pub const MIN_CONDITIONAL_SURVIVORS: usize = 100;

const CHUNK: usize = 1 << 14;

/// What counts as reaching the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KillRule {
    /// `|Y| <= ε` after a substep.
    Ball,
    /// As `Ball`, and also any substep whose endpoints have opposite signs.
    BallOrCrossing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub x0: f64,
    pub eps: f64,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: u64,
    pub seed: u64,
    /// Half-width of the target interval for hitting-time runs.
    pub r_target: Option<f64>,
    /// Times at which the positions of surviving paths are recorded.
    pub checkpoints: Vec<f64>,
    /// Interior cut points of the occupation bins; empty disables occupation.
    pub occupation_cuts: Vec<f64>,
    /// Spacing of the reported survival curve.
    pub survival_step: f64,
    /// κ in the substep rule.
    pub substep_control: f64,
    pub kill_rule: KillRule,
    pub escape_radius: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            x0: 1.0,
            eps: 1e-3,
            dt: 1e-3,
            horizon: 10.0,
            n_paths: 100_000,
            seed: 20_240_601,
            r_target: None,
            checkpoints: vec![0.5, 1.0, 2.0],
            occupation_cuts: Vec::new(),
            survival_step: 0.05,
            substep_control: DEFAULT_SUBSTEP_CONTROL,
            kill_rule: KillRule::Ball,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SimConfig(m));
        if !(self.x0.is_finite() && self.x0 != 0.0) {
            return bad(format!("x0 must be finite and nonzero, got {}", self.x0));
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.dt > 0.0 && self.horizon.is_finite() && self.dt < self.horizon) {
            return bad(format!("need 0 < dt < horizon, got dt {} horizon {}", self.dt, self.horizon));
        }
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if !(self.substep_control > 0.0 && self.substep_control <= 1.0) {
            return bad(format!("substep control must be in (0, 1], got {}", self.substep_control));
        }
        if !(self.survival_step > 0.0) {
            return bad(format!("survival step must be positive, got {}", self.survival_step));
        }
        if !(self.escape_radius > self.x0.abs()) {
            return bad("escape radius must exceed |x0|".into());
        }
        if let Some(c) = self.checkpoints.iter().find(|c| !(**c > 0.0 && **c <= self.horizon)) {
            return bad(format!("checkpoint {c} outside (0, horizon]"));
        }
        if self.occupation_cuts.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("occupation cuts must be strictly increasing".into());
        }
        match self.r_target {
            Some(r) if !(r > 0.0) => bad(format!("r_target must be positive, got {r}")),
            _ => Ok(()),
        }
    }

    fn record_steps(&self) -> u64 {
        (self.horizon / self.dt - 1e-9).ceil() as u64
    }

    fn checkpoint_steps(&self) -> Vec<u64> {
        self.checkpoints
            .iter()
            .map(|c| ((c / self.dt).round() as u64).max(1))
            .collect()
    }
}

/// The RNG stream of one path.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Standard symmetric α-stable variate, `E e^{iuS} = e^{-|u|^α}`, by the
/// Chambers–Mallows–Stuck transform.
#[inline]
pub fn standard_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let e: f64 = -rng.sample::<f64, _>(Open01).ln();
    let v = PI * (u - 0.5);
    let inv = 1.0 / alpha;
    // sin(αV) cos(V)^{-1/α} (cos((1-α)V)/E)^{(1-α)/α}, with both powers in one exp.
    let log_mod = (1.0 - alpha) * inv * (((1.0 - alpha) * v).cos() / e).ln() - inv * v.cos().ln();
    (alpha * v).sin() * log_mod.exp()
}

/// `dt^{1/α} S`; exactly 0 (and no draw) when dt = 0.
pub fn sample_stable_increment<R: Rng + ?Sized>(alpha: Alpha, dt: f64, rng: &mut R) -> f64 {
    if dt == 0.0 {
        return 0.0;
    }
    dt.powf(1.0 / alpha.value()) * standard_stable(alpha.value(), rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fate {
    /// Entered the killing set.
    Killed,
    /// Killed by a sign change under [`KillRule::BallOrCrossing`].
    KilledCrossing,
    /// Alive at the horizon.
    Censored,
    /// `|Y|` exceeded the escape radius or became non-finite.
    Escaped,
}

impl Fate {
    pub fn label(self) -> &'static str {
        match self {
            Fate::Killed => "killed",
            Fate::KilledCrossing => "killed_crossing",
            Fate::Censored => "censored",
            Fate::Escaped => "escaped",
        }
    }

    pub fn is_kill(self) -> bool {
        matches!(self, Fate::Killed | Fate::KilledCrossing)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub fate: Fate,
    /// Killing, escape or horizon time.
    pub time: f64,
    /// Position at each checkpoint, `None` if no longer alive (or escaped).
    pub checkpoints: Vec<Option<f64>>,
    /// Occupation fractions over `[0, horizon]`, for paths alive at the horizon.
    pub occupation: Option<Vec<f64>>,
    /// Substeps whose endpoints had opposite signs without entering the ball.
    pub crossings: u32,
    pub substeps: u64,
}

#[derive(Debug, Clone, Copy)]
enum Target {
    Origin { eps: f64 },
    Interval { r: f64, band: f64 },
}

impl Target {
    #[inline]
    fn reached(self, y: f64) -> bool {
        match self {
            Target::Origin { eps } => y.abs() <= eps,
            Target::Interval { r, band } => y.abs() <= r + band,
        }
    }

    #[inline]
    fn distance(self, y: f64) -> f64 {
        match self {
            Target::Origin { .. } => y.abs(),
            Target::Interval { r, .. } => y.abs() - r,
        }
    }
}

struct PathSpec<'a> {
    x0: f64,
    target: Target,
    dt: f64,
    steps: u64,
    checkpoint_steps: &'a [u64],
    cuts: &'a [f64],
    control: f64,
    rule: KillRule,
    escape: f64,
}

fn run_path<R: Rng + ?Sized>(profile: &SigmaProfile, spec: &PathSpec, rng: &mut R) -> PathRecord {
    let alpha = profile.alpha().value();
    let inv_alpha = 1.0 / alpha;
    let mut checkpoints = vec![None; spec.checkpoint_steps.len()];
    let track_occupation = !spec.cuts.is_empty();
    let mut occupation = if track_occupation {
        vec![0.0; spec.cuts.len() + 1]
    } else {
        Vec::new()
    };
    let mut crossings = 0u32;
    let mut substeps = 0u64;
    let mut y = spec.x0;
    let mut t = 0.0;
    let finish = |fate, time, checkpoints, crossings, substeps| PathRecord {
        fate,
        time,
        checkpoints,
        occupation: None,
        crossings,
        substeps,
    };
    if spec.target.reached(y) {
        return finish(Fate::Killed, 0.0, checkpoints, 0, 0);
    }
    for k in 1..=spec.steps {
        let t_end = k as f64 * spec.dt;
        while t < t_end {
            let s = profile.sigma(y);
            let remaining = t_end - t;
            let reach = spec.control * spec.target.distance(y);
            let h_ctrl = (reach / s).powf(alpha);
            // A controlled substep has jump scale σ h^{1/α} = κ d exactly.
            let (h, last, scale) = if h_ctrl >= remaining {
                (remaining, true, s * remaining.powf(inv_alpha))
            } else {
                (h_ctrl, false, reach)
            };
            if track_occupation {
                occupation[spec.cuts.partition_point(|c| *c < y)] += h;
            }
            let y_new = y + scale * standard_stable(alpha, rng);
            substeps += 1;
            t = if last { t_end } else { t + h };
            if !y_new.is_finite() || y_new.abs() > spec.escape {
                return finish(Fate::Escaped, t, checkpoints, crossings, substeps);
            }
            if spec.target.reached(y_new) {
                return finish(Fate::Killed, t, checkpoints, crossings, substeps);
            }
            if y_new.signum() != y.signum() {
                crossings += 1;
                if spec.rule == KillRule::BallOrCrossing {
                    return finish(Fate::KilledCrossing, t, checkpoints, crossings, substeps);
                }
            }
            y = y_new;
        }
        for (slot, &c) in checkpoints.iter_mut().zip(spec.checkpoint_steps) {
            if c == k {
                *slot = Some(y);
            }
        }
    }
    if track_occupation {
        let total: f64 = occupation.iter().sum();
        occupation.iter_mut().for_each(|o| *o /= total);
    }
    PathRecord {
        fate: Fate::Censored,
        time: t,
        checkpoints,
        occupation: track_occupation.then_some(occupation),
        crossings,
        substeps,
    }
}

/// One path killed near the origin, drawing from `rng`.
pub fn simulate_killed_path<R: Rng + ?Sized>(profile: &SigmaProfile, config: &SimConfig, rng: &mut R) -> Result<PathRecord> {
    config.validate()?;
    let steps = config.record_steps();
    let cps = config.checkpoint_steps();
    let spec = PathSpec {
        x0: config.x0,
        target: Target::Origin { eps: config.eps },
        dt: config.dt,
        steps,
        checkpoint_steps: &cps,
        cuts: &config.occupation_cuts,
        control: config.substep_control,
        rule: config.kill_rule,
        escape: config.escape_radius,
    };
    Ok(run_path(profile, &spec, rng))
}

/// Counts of path-level outcomes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FlagCounts {
    pub killed: u64,
    pub killed_crossing: u64,
    pub censored: u64,
    pub escaped: u64,
    /// Sign changes without a kill (diagnostic under the ball rule).
    pub crossings: u64,
    pub substeps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalPoint {
    pub t: f64,
    pub fraction: f64,
    pub ci_half_width: f64,
}

/// Aggregated ensemble output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEnsembleStats {
    pub config: SimConfig,
    pub n_paths: u64,
    /// Per path: (time, fate), in path order.
    pub outcomes: Vec<(f64, Fate)>,
    /// Positions of surviving, non-escaped paths at each checkpoint.
    pub checkpoint_samples: Vec<Vec<f64>>,
    /// Occupation fractions of each path alive at the horizon.
    pub occupation_samples: Vec<Vec<f64>>,
    pub flags: FlagCounts,
    // Sorted kill times, for survival queries.
    #[serde(skip)]
    sorted_kills: Vec<f64>,
}

impl PathEnsembleStats {
    /// Fraction alive at t. Escaped paths count as alive.
    pub fn survival_at(&self, t: f64) -> SurvivalPoint {
        let dead = self.sorted_kills.partition_point(|&k| k <= t) as u64;
        let alive = self.n_paths - dead;
        let (_, half) = wilson(alive, self.n_paths, Z95);
        SurvivalPoint {
            t,
            fraction: alive as f64 / self.n_paths as f64,
            ci_half_width: half,
        }
    }

    /// Survival on the grid `0, step, 2·step, …, horizon`.
    pub fn survival_curve(&self) -> Vec<SurvivalPoint> {
        let step = self.config.survival_step;
        let n = (self.config.horizon / step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.survival_at(i as f64 * step)).collect()
    }

    /// Killing times of killed paths.
    pub fn kill_times(&self) -> &[f64] {
        &self.sorted_kills
    }

    /// Appends the paths of `other`, a run of the following path indices
    /// under the same configuration.
    pub fn append(&mut self, other: PathEnsembleStats) -> Result<()> {
        let same = SimConfig {
            n_paths: self.n_paths,
            ..other.config.clone()
        };
        if same != self.config {
            return Err(Error::SimConfig("cannot merge runs with different configurations".into()));
        }
        self.n_paths += other.n_paths;
        self.config.n_paths = self.n_paths;
        self.outcomes.extend(other.outcomes);
        for (a, b) in self.checkpoint_samples.iter_mut().zip(other.checkpoint_samples) {
            a.extend(b);
        }
        self.occupation_samples.extend(other.occupation_samples);
        let f = &mut self.flags;
        let g = other.flags;
        f.killed += g.killed;
        f.killed_crossing += g.killed_crossing;
        f.censored += g.censored;
        f.escaped += g.escaped;
        f.crossings += g.crossings;
        f.substeps += g.substeps;
        self.sorted_kills.extend(other.sorted_kills);
        self.sorted_kills.sort_by(f64::total_cmp);
        Ok(())
    }
}

/// Simulates `config.n_paths` paths and aggregates them.
pub fn run_ensemble(profile: &SigmaProfile, config: &SimConfig) -> Result<PathEnsembleStats> {
    run_ensemble_range(profile, config, 0..config.n_paths)
}

/// Simulates the paths with indices in `paths` (their streams are the same as
/// in a full run). `config.n_paths` is ignored.
pub fn run_ensemble_range(profile: &SigmaProfile, config: &SimConfig, paths: Range<u64>) -> Result<PathEnsembleStats> {
    let config = &SimConfig {
        n_paths: paths.end.saturating_sub(paths.start),
        ..config.clone()
    };
    config.validate()?;
    let steps = config.record_steps();
    let cps = config.checkpoint_steps();
    let spec = PathSpec {
        x0: config.x0,
        target: Target::Origin { eps: config.eps },
        dt: config.dt,
        steps,
        checkpoint_steps: &cps,
        cuts: &config.occupation_cuts,
        control: config.substep_control,
        rule: config.kill_rule,
        escape: config.escape_radius,
    };
    let n = config.n_paths;
    let mut outcomes = Vec::with_capacity(n as usize);
    let first = paths.start;
    let mut checkpoint_samples = vec![Vec::new(); cps.len()];
    let mut occupation_samples = Vec::new();
    let mut flags = FlagCounts::default();
    let mut start = first;
    while start < paths.end {
        let end = (start + CHUNK as u64).min(paths.end);
        let records: Vec<PathRecord> = (start..end)
            .into_par_iter()
            .map(|i| run_path(profile, &spec, &mut path_rng(config.seed, i)))
            .collect();
        for r in records {
            match r.fate {
                Fate::Killed => flags.killed += 1,
                Fate::KilledCrossing => flags.killed_crossing += 1,
                Fate::Censored => flags.censored += 1,
                Fate::Escaped => flags.escaped += 1,
            }
            flags.crossings += r.crossings as u64;
            flags.substeps += r.substeps;
            if r.fate != Fate::Escaped {
                for (dst, v) in checkpoint_samples.iter_mut().zip(&r.checkpoints) {
                    if let Some(y) = v {
                        dst.push(*y);
                    }
                }
            }
            if let Some(o) = r.occupation {
                occupation_samples.push(o);
            }
            outcomes.push((r.time, r.fate));
        }
        start = end;
    }
    let mut sorted_kills: Vec<f64> = outcomes.iter().filter(|(_, f)| f.is_kill()).map(|(t, _)| *t).collect();
    sorted_kills.sort_by(f64::total_cmp);
    Ok(PathEnsembleStats {
        config: config.clone(),
        n_paths: n,
        outcomes,
        checkpoint_samples,
        occupation_samples,
        flags,
        sorted_kills,
    })
}

/// Decay rate fitted on a survival curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub lambda_hat: f64,
    pub std_error: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Weighted least squares of `log S(t)` on t over the window, with weights
/// `n S / (1 - S)`. The reported standard error is the larger of the WLS value
/// and `λ̂/√k`, k the number of kills inside the window: the survival points
/// are cumulative and therefore correlated, and the WLS formula alone
/// understates the spread.
pub fn fit_decay_rate(stats: &PathEnsembleStats, window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window;
    if !(hi > lo && lo >= 0.0) {
        return Err(Error::Domain(format!("bad fit window ({lo}, {hi})")));
    }
    let n = stats.n_paths as f64;
    let floor = 10.0 / n;
    let curve = stats.survival_curve();
    let inside: Vec<&SurvivalPoint> = curve.iter().filter(|p| p.t >= lo - 1e-12 && p.t <= hi + 1e-12).collect();
    if let Some(p) = inside.iter().find(|p| p.fraction <= floor) {
        return Err(Error::InsufficientTail(format!(
            "survival {:e} at t = {} is below 10/n_paths",
            p.fraction, p.t
        )));
    }
    if inside.len() < 5 {
        return Err(Error::InsufficientTail(format!(
            "{} survival points in the window, need 5",
            inside.len()
        )));
    }
    let pts: Vec<(f64, f64)> = inside.iter().map(|p| (p.t, p.fraction.ln())).collect();
    let w: Vec<f64> = inside
        .iter()
        .map(|p| n * p.fraction / (1.0 - p.fraction).max(1.0 / n))
        .collect();
    let line = weighted_line(&pts, &w);
    let lambda_hat = -line.slope;
    let kills = (stats.survival_at(lo).fraction - stats.survival_at(hi).fraction) * n;
    let poisson = lambda_hat / kills.max(1.0).sqrt();
    Ok(DecayFit {
        lambda_hat,
        std_error: line.slope_se.max(poisson),
        window,
        points: inside.len(),
    })
}

/// Rate extrapolated to ε → 0 from `λ̂(ε) = λ* + b·ε^{α-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    pub lambda_star: f64,
    pub std_error: f64,
    pub slope: f64,
}

/// Weighted fit over `(ε, λ̂, se)` triples (at least two levels).
pub fn extrapolate_rate(levels: &[(f64, f64, f64)], alpha: Alpha) -> Result<Extrapolation> {
    if levels.len() < 2 {
        return Err(Error::Domain("need at least two ε levels".into()));
    }
    let p = alpha.value() - 1.0;
    let pts: Vec<(f64, f64)> = levels.iter().map(|(e, l, _)| (e.powf(p), *l)).collect();
    let w: Vec<f64> = levels.iter().map(|(_, _, s)| 1.0 / (s * s).max(1e-300)).collect();
    let line = weighted_line(&pts, &w);
    Ok(Extrapolation {
        lambda_star: line.intercept,
        std_error: line.intercept_se,
        slope: line.slope,
    })
}

/// Cut points splitting a grid law into `bins` cells of (nearly) equal mass.
/// Cuts sit halfway between nodes, so grid cell masses fall wholly in one bin.
pub fn equal_mass_cuts(grid: &QuadratureGrid, density: &[f64], bins: usize) -> Vec<f64> {
    let x = grid.nodes();
    let masses: Vec<f64> = density.iter().zip(grid.weights()).map(|(d, w)| d * w).collect();
    let total: f64 = masses.iter().sum();
    let mut cuts = Vec::with_capacity(bins.saturating_sub(1));
    let mut acc = 0.0;
    let mut k = 1;
    for i in 0..x.len() - 1 {
        acc += masses[i];
        while k < bins && acc >= total * k as f64 / bins as f64 {
            let c = 0.5 * (x[i] + x[i + 1]);
            if cuts.last().is_none_or(|&l| c > l) {
                cuts.push(c);
            }
            k += 1;
        }
    }
    cuts
}

/// Masses of a grid law in the bins defined by `cuts`, normalized to 1.
pub fn grid_bin_masses(grid: &QuadratureGrid, density: &[f64], cuts: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cuts.len() + 1];
    for ((x, d), w) in grid.nodes().iter().zip(density).zip(grid.weights()) {
        out[cuts.partition_point(|c| c < x)] += d * w;
    }
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|m| *m /= total);
    out
}

/// Normalized histogram of samples over the bins defined by `cuts`.
pub fn histogram(samples: &[f64], cuts: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cuts.len() + 1];
    for y in samples {
        out[cuts.partition_point(|c| c < y)] += 1.0;
    }
    let n = samples.len().max(1) as f64;
    out.iter_mut().for_each(|m| *m /= n);
    out
}

/// Half the L¹ distance.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// A TV estimate with a percentile bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvEstimate {
    pub tv: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Half the width of the 95% bootstrap interval.
    pub ci_half_width: f64,
    pub samples: usize,
    pub empirical: Vec<f64>,
    pub reference: Vec<f64>,
}

fn bootstrap_tv<F: Fn(&[usize]) -> Vec<f64>>(n: usize, reference: &[f64], estimate: F, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb007_57a9);
    let mut tvs: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            tv_distance(&estimate(&idx), reference)
        })
        .collect();
    tvs.sort_by(f64::total_cmp);
    (quantile_sorted(&tvs, 0.025), quantile_sorted(&tvs, 0.975))
}

/// TV between survivor positions at checkpoint `index` and the reference bin
/// masses (e.g. ν over equal-mass bins).
pub fn conditional_law_distance(
    stats: &PathEnsembleStats,
    index: usize,
    cuts: &[f64],
    reference: &[f64],
) -> Result<TvEstimate> {
    let samples = stats
        .checkpoint_samples
        .get(index)
        .ok_or_else(|| Error::Domain(format!("no checkpoint with index {index}")))?;
    if samples.len() < MIN_CONDITIONAL_SURVIVORS {
        return Err(Error::TooFewSurvivors {
            survivors: samples.len(),
            required: MIN_CONDITIONAL_SURVIVORS,
        });
    }
    let empirical = histogram(samples, cuts);
    let tv = tv_distance(&empirical, reference);
    let (ci_low, ci_high) = bootstrap_tv(
        samples.len(),
        reference,
        |idx| {
            let s: Vec<f64> = idx.iter().map(|&i| samples[i]).collect();
            histogram(&s, cuts)
        },
        stats.config.seed.wrapping_add(index as u64),
    );
    Ok(TvEstimate {
        tv,
        ci_low,
        ci_high,
        ci_half_width: 0.5 * (ci_high - ci_low),
        samples: samples.len(),
        empirical,
        reference: reference.to_vec(),
    })
}

/// Mean occupation fractions of the paths alive at the horizon.
pub fn mean_occupation(stats: &PathEnsembleStats) -> Vec<f64> {
    let k = stats.config.occupation_cuts.len() + 1;
    let mut out = vec![0.0; k];
    for o in &stats.occupation_samples {
        for (a, b) in out.iter_mut().zip(o) {
            *a += b;
        }
    }
    let n = stats.occupation_samples.len().max(1) as f64;
    out.iter_mut().for_each(|m| *m /= n);
    out
}

/// TV between the mean occupation histogram of survivors and reference bin
/// masses (e.g. m over the occupation bins of the run).
pub fn occupation_distance(stats: &PathEnsembleStats, reference: &[f64], min_survivors: usize) -> Result<TvEstimate> {
    let samples = &stats.occupation_samples;
    if stats.config.occupation_cuts.is_empty() {
        return Err(Error::Domain("the run did not record occupation".into()));
    }
    if samples.len() < min_survivors {
        return Err(Error::TooFewSurvivors {
            survivors: samples.len(),
            required: min_survivors,
        });
    }
    let empirical = mean_occupation(stats);
    let tv = tv_distance(&empirical, reference);
    let k = empirical.len();
    let (ci_low, ci_high) = bootstrap_tv(
        samples.len(),
        reference,
        |idx| {
            let mut m = vec![0.0; k];
            for &i in idx {
                for (a, b) in m.iter_mut().zip(&samples[i]) {
                    *a += b;
                }
            }
            m.iter_mut().for_each(|v| *v /= idx.len() as f64);
            m
        },
        stats.config.seed.wrapping_add(0x0cc),
    );
    Ok(TvEstimate {
        tv,
        ci_low,
        ci_high,
        ci_half_width: 0.5 * (ci_high - ci_low),
        samples: samples.len(),
        empirical,
        reference: reference.to_vec(),
    })
}

/// Sample mean of `e^{λ T₀}` over killed paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpMoment {
    pub lambda: f64,
    pub mean: f64,
    pub std_error: f64,
    /// Share of the sum carried by the largest 10% of the terms.
    pub top_decile_share: f64,
    /// `top_decile_share > 0.5`.
    pub divergence_flag: bool,
    pub samples: usize,
}

pub fn exp_moment_probe(kill_times: &[f64], lambda: f64) -> Result<ExpMoment> {
    if kill_times.is_empty() {
        return Err(Error::Domain("no killed paths".into()));
    }
    let mut terms: Vec<f64> = kill_times.iter().map(|t| (lambda * t).exp()).collect();
    let n = terms.len() as f64;
    let mean = terms.iter().sum::<f64>() / n;
    let var = if terms.len() > 1 {
        terms.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    terms.sort_by(|a, b| b.total_cmp(a));
    let top = (terms.len().div_ceil(10)).max(1);
    let share = terms[..top].iter().sum::<f64>() / terms.iter().sum::<f64>();
    Ok(ExpMoment {
        lambda,
        mean,
        std_error: (var / n).sqrt(),
        top_decile_share: share,
        divergence_flag: share > 0.5,
        samples: terms.len(),
    })
}

/// Monte Carlo mean of the first entry time into `[-R, R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    /// Fraction of paths that neither entered nor escaped by the horizon.
    pub horizon_exceeded: f64,
    pub escaped: u64,
}

/// Entry into `[-R - ε, R + ε]` from x0, with substeps controlled by the
/// distance to the interval. `config.eps` is the band, `config.horizon`
/// the censoring time.
pub fn interval_hitting_mc(profile: &SigmaProfile, r: f64, x0: f64, config: &SimConfig) -> Result<HittingEstimate> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("R must be positive, got {r}")));
    }
    if x0.abs() <= r {
        return Ok(HittingEstimate {
            mean: 0.0,
            std_error: 0.0,
            samples: config.n_paths,
            horizon_exceeded: 0.0,
            escaped: 0,
        });
    }
    let mut cfg = config.clone();
    cfg.x0 = x0;
    cfg.checkpoints.clear();
    cfg.occupation_cuts.clear();
    cfg.validate()?;
    let spec = PathSpec {
        x0,
        target: Target::Interval { r, band: cfg.eps },
        dt: cfg.dt,
        steps: cfg.record_steps(),
        checkpoint_steps: &[],
        cuts: &[],
        control: cfg.substep_control,
        rule: KillRule::Ball,
        escape: cfg.escape_radius,
    };
    let mut times = Vec::with_capacity(cfg.n_paths as usize);
    let (mut exceeded, mut escaped) = (0u64, 0u64);
    let mut start = 0u64;
    while start < cfg.n_paths {
        let end = (start + CHUNK as u64).min(cfg.n_paths);
        let recs: Vec<PathRecord> = (start..end)
            .into_par_iter()
            .map(|i| run_path(profile, &spec, &mut path_rng(cfg.seed, i)))
            .collect();
        for r in recs {
            match r.fate {
                Fate::Killed | Fate::KilledCrossing => times.push(r.time),
                Fate::Censored => exceeded += 1,
                Fate::Escaped => escaped += 1,
            }
        }
        start = end;
    }
    if times.len() < 2 {
        return Err(Error::InsufficientTail("fewer than two paths entered the interval".into()));
    }
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(HittingEstimate {
        mean,
        std_error: (var / n).sqrt(),
        samples: times.len() as u64,
        horizon_exceeded: exceeded as f64 / cfg.n_paths as f64,
        escaped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, std_dev};

    fn profile() -> SigmaProfile {
        SigmaProfile::polynomial(Alpha::new(1.5).unwrap(), 2.0).unwrap()
    }

    #[test]
    fn increment_conventions() {
        let mut rng = path_rng(1, 0);
        let a = Alpha::new(1.5).unwrap();
        assert_eq!(sample_stable_increment(a, 0.0, &mut rng), 0.0);
        let mut r1 = path_rng(7, 3);
        let mut r2 = path_rng(7, 3);
        for _ in 0..100 {
            assert_eq!(standard_stable(1.5, &mut r1), standard_stable(1.5, &mut r2));
        }
    }

    #[test]
    fn characteristic_function() {
        for alpha in [1.2, 1.5, 1.8] {
            let mut rng = path_rng(11, 0);
            let dt = 0.3;
            let xs: Vec<f64> = (0..200_000)
                .map(|_| sample_stable_increment(Alpha::new(alpha).unwrap(), dt, &mut rng))
                .collect();
            for u in [0.5f64, 1.0, 2.0] {
                let c: Vec<f64> = xs.iter().map(|x| (u * x).cos()).collect();
                let want = (-dt * u.powf(alpha)).exp();
                let se = std_dev(&c) / (c.len() as f64).sqrt();
                assert!((mean(&c) - want).abs() < 3.0 * se + 1e-12, "alpha {alpha} u {u}");
            }
        }
    }

    #[test]
    fn single_substep_is_one_euler_step() {
        // An unbounded substep control leaves one Euler step per record step.
        let a = Alpha::new(1.5).unwrap();
        let t = crate::model_measure::SigmaTable::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 4.0]).unwrap();
        let p = SigmaProfile::tabulated(a, t).unwrap();
        let c = p.sigma(0.7);
        let spec = PathSpec {
            x0: 0.7,
            target: Target::Origin { eps: 1e-300 },
            dt: 1.0,
            steps: 1,
            checkpoint_steps: &[1],
            cuts: &[],
            control: 1e9,
            rule: KillRule::Ball,
            escape: 1e300,
        };
        let rec = run_path(&p, &spec, &mut path_rng(5, 0));
        let mut rng = path_rng(5, 0);
        let want = 0.7 + c * standard_stable(1.5, &mut rng);
        if rec.fate == Fate::Censored {
            assert_eq!(rec.checkpoints[0], Some(want));
        }
        assert_eq!(rec.substeps, 1);
    }

    #[test]
    fn immediate_kill() {
        let cfg = SimConfig {
            x0: 1e-4,
            ..SimConfig::default()
        };
        let rec = simulate_killed_path(&profile(), &cfg, &mut path_rng(1, 0)).unwrap();
        assert_eq!(rec.fate, Fate::Killed);
        assert_eq!(rec.time, 0.0);
    }

    #[test]
    fn config_validation() {
        let ok = SimConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            SimConfig { x0: 0.0, ..ok.clone() },
            SimConfig { eps: 0.0, ..ok.clone() },
            SimConfig { dt: 20.0, ..ok.clone() },
            SimConfig { n_paths: 0, ..ok.clone() },
            SimConfig { checkpoints: vec![11.0], ..ok.clone() },
            SimConfig { r_target: Some(-1.0), ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    fn small_run(seed: u64, eps: f64) -> PathEnsembleStats {
        let cfg = SimConfig {
            n_paths: 2000,
            horizon: 3.0,
            eps,
            seed,
            checkpoints: vec![1.0],
            occupation_cuts: vec![-1.0, 0.0, 1.0],
            ..SimConfig::default()
        };
        run_ensemble(&profile(), &cfg).unwrap()
    }

    #[test]
    fn ensemble_invariants() {
        let s = small_run(3, 1e-3);
        let curve = s.survival_curve();
        assert_eq!(curve[0].fraction, 1.0);
        assert!(curve.windows(2).all(|w| w[1].fraction <= w[0].fraction));
        for o in &s.occupation_samples {
            assert!((o.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.outcomes.len(), 2000);
        let again = small_run(3, 1e-3);
        assert_eq!(s, again);
        // A larger ball kills no later, path by path under common random numbers.
        let wide = small_run(3, 2e-3);
        for p in &curve {
            assert!(wide.survival_at(p.t).fraction <= p.fraction + 2.0 * p.ci_half_width);
        }
    }

    #[test]
    fn ranges_append_to_the_full_run() {
        let cfg = SimConfig {
            n_paths: 3000,
            horizon: 2.0,
            checkpoints: vec![0.5],
            occupation_cuts: vec![0.0],
            ..SimConfig::default()
        };
        let full = run_ensemble(&profile(), &cfg).unwrap();
        let mut a = run_ensemble_range(&profile(), &cfg, 0..1000).unwrap();
        a.append(run_ensemble_range(&profile(), &cfg, 1000..3000).unwrap()).unwrap();
        assert_eq!(a, full);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| small_run(9, 1e-3));
        let b = four.install(|| small_run(9, 1e-3));
        assert_eq!(a, b);
    }

    fn synthetic(rate: f64, n: u64, seed: u64) -> PathEnsembleStats {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outcomes: Vec<(f64, Fate)> = (0..n)
            .map(|_| {
                let t = -rng.sample::<f64, _>(Open01).ln() / rate;
                if t > 10.0 {
                    (10.0, Fate::Censored)
                } else {
                    (t, Fate::Killed)
                }
            })
            .collect();
        let mut sorted_kills: Vec<f64> = outcomes.iter().filter(|o| o.1.is_kill()).map(|o| o.0).collect();
        sorted_kills.sort_by(f64::total_cmp);
        PathEnsembleStats {
            config: SimConfig {
                n_paths: n,
                ..SimConfig::default()
            },
            n_paths: n,
            outcomes,
            checkpoint_samples: Vec::new(),
            occupation_samples: Vec::new(),
            flags: FlagCounts::default(),
            sorted_kills,
        }
    }

    #[test]
    fn decay_fit_on_synthetic_exponential() {
        let mut misses = 0;
        for seed in 0..20 {
            let s = synthetic(0.5, 20_000, seed);
            let f = fit_decay_rate(&s, (0.5, 6.0)).unwrap();
            if (f.lambda_hat - 0.5).abs() > 3.0 * f.std_error {
                misses += 1;
            }
        }
        assert!(misses <= 1, "{misses} of 20 outside 3 standard errors");
        let s = synthetic(0.5, 200, 1);
        assert!(matches!(fit_decay_rate(&s, (0.5, 9.0)), Err(Error::InsufficientTail(_))));
    }

    #[test]
    fn extrapolation_recovers_intercept() {
        let a = Alpha::new(1.5).unwrap();
        let lv: Vec<(f64, f64, f64)> = [1e-2, 1e-3, 10f64.powf(-3.5)]
            .iter()
            .map(|&e| (e, 2.0 + 3.0 * e.sqrt(), 0.01))
            .collect();
        let x = extrapolate_rate(&lv, a).unwrap();
        assert!((x.lambda_star - 2.0).abs() < 1e-12);
        assert!((x.slope - 3.0).abs() < 1e-10);
    }

    #[test]
    fn tv_helpers() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(tv_distance(&p, &p), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        let h = histogram(&[-2.0, -0.5, 0.5, 3.0], &[-1.0, 0.0, 1.0]);
        assert_eq!(h, vec![0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn exp_moment_basics() {
        let t = [0.1, 0.5, 2.0, 0.3];
        let m = exp_moment_probe(&t, 0.0).unwrap();
        assert_eq!(m.mean, 1.0);
        assert!(!m.divergence_flag);
        let heavy: Vec<f64> = (1..=100).map(|i| if i == 100 { 50.0 } else { 0.01 * i as f64 }).collect();
        assert!(exp_moment_probe(&heavy, 1.0).unwrap().divergence_flag);
    }

    #[test]
    fn interval_hitting_inside_is_zero() {
        let e = interval_hitting_mc(&profile(), 1.0, 0.5, &SimConfig::default()).unwrap();
        assert_eq!(e.mean, 0.0);
    }
}
