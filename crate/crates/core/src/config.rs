//! Experiment configuration.
//!
//! The file is TOML with dotted keys (`sigma.gamma = 2`); `[sigma]` tables are
//! equivalent. Every key below is optional except `alpha` and the σ parameter
//! of the chosen kind.
//!
//! | key | default |
//! |---|---|
//! | `alpha` | required, in (1, 2) |
//! | `sigma.kind` | `"polynomial"` or `"table"`, default polynomial |
//! | `sigma.gamma` | required for polynomial |
//! | `sigma.table` | required for table; path relative to the config file |
//! | `grid.n` | 400 (even, ≥ 16) |
//! | `grid.L` | `"AUTO"` or a positive number |
//! | `grid.refine` | true: also solve at 2n and compare |
//! | `sim.x0` | 1.0 |
//! | `sim.eps` | 1e-3 |
//! | `sim.dt` | 1e-3 |
//! | `sim.horizon` | 10.0 |
//! | `sim.n_paths` | 100000 |
//! | `sim.seed` | 20240601 |
//! | `sim.checkpoints` | [0.5, 1.0, 2.0] |
//! | `sim.survival_step` | 0.05 |
//! | `sim.substep_control` | 0.15 |
//! | `sim.kill_rule` | `"ball"` or `"ball_or_crossing"` |
//! | `sim.escape_radius` | 1e12 |
//! | `sim.occupation_bins` | 8 |
//! | `mc.eps_levels` | [1e-2, 1e-3, 10^-3.5] |
//! | `mc.fit_window` | [0.5, 2.5] |
//! | `mc.seeds` | 5 |
//! | `mc.qed_paths` | 4000000 (cap; paths are added in batches) |
//! | `mc.qed_survivors` | 200 (stop adding paths once reached) |
//! | `mc.qed_gap_multiple` | 20.0 |
//! | `hitting.r` | 1.0 |
//! | `hitting.x0` | 2.0 |
//! | `hitting.n_paths` | 100000 |
//! | `hitting.band` | 1e-3 |
//! | `hitting.horizon` | 50.0 |
//! | `analyze.r_grid` | 25 log-spaced radii in [0.1, 1000] |
//! | `analyze.x` | 0.5 |
//! | `validate.suites` | all of kernel, entrance, spectral, mc, hitting, determinism |
//! | `validate.tv` | 0.05 |
//! | `validate.mc_rate` | 0.10 |
//! | `validate.yaglom_rate` | 0.05 |
//! | `validate.uniform_rate` | 0.02 |
//! | `output.dir` | `"out"` |
//!
//! Any `grid.*` key counts as a request for a spectral run, and then a profile
//! without entrance from infinity is rejected with `ENTRANCE_FAIL`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use toml::Value;

use crate::error::{Error, Result};
use crate::model_measure::{entrance_integral, SigmaProfile, SigmaTable};
use crate::simulation::{KillRule, SimConfig, DEFAULT_ESCAPE_RADIUS, DEFAULT_SUBSTEP_CONTROL};
use crate::spectral::Extent;
use crate::stable_kernels::Alpha;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigViolation {
    pub code: &'static str,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at `{}`: {}", self.code, self.key, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaSpec {
    Polynomial { gamma: f64 },
    Table { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Kernel,
    Entrance,
    Spectral,
    Mc,
    Hitting,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Kernel,
        Suite::Entrance,
        Suite::Spectral,
        Suite::Mc,
        Suite::Hitting,
        Suite::Determinism,
    ];

    fn parse(s: &str) -> Option<Suite> {
        Some(match s {
            "kernel" => Suite::Kernel,
            "entrance" => Suite::Entrance,
            "spectral" => Suite::Spectral,
            "mc" => Suite::Mc,
            "hitting" => Suite::Hitting,
            "determinism" => Suite::Determinism,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    pub n: usize,
    #[serde(serialize_with = "ser_extent")]
    pub extent: Extent,
    pub refine: bool,
    /// Whether the file asked for a spectral run explicitly.
    pub requested: bool,
}

fn ser_extent<S: serde::Serializer>(e: &Extent, s: S) -> std::result::Result<S::Ok, S::Error> {
    match e {
        Extent::Auto => s.serialize_str("AUTO"),
        Extent::Fixed(l) => s.serialize_f64(*l),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McPlan {
    pub eps_levels: Vec<f64>,
    pub fit_window: (f64, f64),
    pub seeds: usize,
    pub qed_paths: u64,
    pub qed_survivors: usize,
    pub qed_gap_multiple: f64,
    pub occupation_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingPlan {
    pub r: f64,
    pub x0: f64,
    pub n_paths: u64,
    pub band: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzePlan {
    pub r_grid: Vec<f64>,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatePlan {
    pub suites: Vec<Suite>,
    pub tv: f64,
    pub mc_rate: f64,
    pub yaglom_rate: f64,
    pub uniform_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub sigma: SigmaSpec,
    pub grid: GridConfig,
    pub sim: SimConfig,
    pub mc: McPlan,
    pub hitting: HittingPlan,
    pub analyze: AnalyzePlan,
    pub validate: ValidatePlan,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Defaults with the given model.
    pub fn with_model(alpha: f64, sigma: SigmaSpec) -> Self {
        Self {
            alpha,
            sigma,
            grid: GridConfig {
                n: 400,
                extent: Extent::Auto,
                refine: true,
                requested: false,
            },
            sim: SimConfig::default(),
            mc: McPlan {
                eps_levels: vec![1e-2, 1e-3, 10f64.powf(-3.5)],
                fit_window: (0.5, 2.5),
                seeds: 5,
                qed_paths: 4_000_000,
                qed_survivors: 200,
                qed_gap_multiple: 20.0,
                occupation_bins: 8,
            },
            hitting: HittingPlan {
                r: 1.0,
                x0: 2.0,
                n_paths: 100_000,
                band: 1e-3,
                horizon: 50.0,
            },
            analyze: AnalyzePlan {
                r_grid: (0..25).map(|i| 10f64.powf(-1.0 + 4.0 * i as f64 / 24.0)).collect(),
                x: 0.5,
            },
            validate: ValidatePlan {
                suites: Suite::ALL.to_vec(),
                tv: 0.05,
                mc_rate: 0.10,
                yaglom_rate: 0.05,
                uniform_rate: 0.02,
            },
            output_dir: PathBuf::from("out"),
        }
    }

    /// The polynomial example σ(x) = (1+|x|)^γ.
    pub fn polynomial(alpha: f64, gamma: f64) -> Self {
        Self::with_model(alpha, SigmaSpec::Polynomial { gamma })
    }

    pub fn alpha(&self) -> Result<Alpha> {
        Alpha::new(self.alpha)
    }

    /// Builds the σ profile. Fails when μ is not a finite measure.
    pub fn profile(&self) -> Result<SigmaProfile> {
        let a = self.alpha()?;
        match &self.sigma {
            SigmaSpec::Polynomial { gamma } => SigmaProfile::polynomial(a, *gamma),
            SigmaSpec::Table { path } => SigmaProfile::tabulated(a, SigmaTable::from_file(path)?),
        }
    }

    pub fn runs(&self, suite: Suite) -> bool {
        self.validate.suites.contains(&suite)
    }
}

/// Reads and validates a config file, reporting every violation found.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text, path.parent().unwrap_or(Path::new(".")))
}

/// As [`parse_config`], with relative paths resolved against `base`.
pub fn parse_config_str(text: &str, base: &Path) -> Result<ExperimentConfig> {
    let root: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        Error::Config(vec![ConfigViolation {
            code: "SYNTAX",
            key: String::new(),
            message: e.message().to_string(),
        }])
    })?;
    let mut flat = BTreeMap::new();
    flatten("", &Value::Table(root), &mut flat);
    let mut p = Parser {
        flat,
        violations: Vec::new(),
    };
    let cfg = p.build(base);
    let mut violations = p.violations;
    for key in p.flat.keys() {
        violations.push(ConfigViolation {
            code: "UNKNOWN_KEY",
            key: key.clone(),
            message: "not a recognized configuration key".into(),
        });
    }
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(violations))
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

struct Parser {
    flat: BTreeMap<String, Value>,
    violations: Vec<ConfigViolation>,
}

impl Parser {
    fn push(&mut self, code: &'static str, key: &str, message: impl Into<String>) {
        self.violations.push(ConfigViolation {
            code,
            key: key.to_string(),
            message: message.into(),
        });
    }

    fn mismatch(&mut self, key: &str, want: &str, got: &Value) {
        self.push("TYPE_MISMATCH", key, format!("expected {want}, found {}", got.type_str()));
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.flat.keys().any(|k| k.starts_with(prefix))
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        let v = self.flat.remove(key)?;
        match v {
            Value::Float(f) => Some(f),
            Value::Integer(i) => Some(i as f64),
            other => {
                self.mismatch(key, "a number", &other);
                None
            }
        }
    }

    fn float_or(&mut self, key: &str, default: f64) -> f64 {
        self.float(key).unwrap_or(default)
    }

    fn positive(&mut self, key: &str, default: f64) -> f64 {
        let v = self.float_or(key, default);
        if !(v > 0.0 && v.is_finite()) {
            self.push("CONSTRAINT", key, format!("must be positive and finite, got {v}"));
        }
        v
    }

    fn uint(&mut self, key: &str, default: u64) -> u64 {
        match self.flat.remove(key) {
            None => default,
            Some(Value::Integer(i)) if i >= 0 => i as u64,
            Some(Value::Integer(i)) => {
                self.push("CONSTRAINT", key, format!("must be nonnegative, got {i}"));
                default
            }
            Some(other) => {
                self.mismatch(key, "an integer", &other);
                default
            }
        }
    }

    fn boolean(&mut self, key: &str, default: bool) -> bool {
        match self.flat.remove(key) {
            None => default,
            Some(Value::Boolean(b)) => b,
            Some(other) => {
                self.mismatch(key, "a boolean", &other);
                default
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.flat.remove(key)? {
            Value::String(s) => Some(s),
            other => {
                self.mismatch(key, "a string", &other);
                None
            }
        }
    }

    fn floats(&mut self, key: &str, default: Vec<f64>) -> Vec<f64> {
        let Some(v) = self.flat.remove(key) else {
            return default;
        };
        let Value::Array(items) = &v else {
            self.mismatch(key, "an array of numbers", &v);
            return default;
        };
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Value::Float(f) => out.push(*f),
                Value::Integer(i) => out.push(*i as f64),
                other => {
                    self.mismatch(key, "an array of numbers", other);
                    return default;
                }
            }
        }
        out
    }

    fn build(&mut self, base: &Path) -> ExperimentConfig {
        let alpha = match self.float("alpha") {
            Some(a) => {
                if !(a > 1.0 && a < 2.0) {
                    self.push("ALPHA_RANGE", "alpha", format!("{a} is outside (1, 2)"));
                }
                a
            }
            None => {
                if !self.violations.iter().any(|v| v.key == "alpha") {
                    self.push("MISSING_KEY", "alpha", "the stability index is required");
                }
                f64::NAN
            }
        };

        let kind = self.string("sigma.kind").unwrap_or_else(|| "polynomial".into());
        let sigma = match kind.as_str() {
            "polynomial" => {
                let gamma = self.float("sigma.gamma");
                if gamma.is_none() && !self.violations.iter().any(|v| v.key == "sigma.gamma") {
                    self.push("MISSING_KEY", "sigma.gamma", "required for sigma.kind = \"polynomial\"");
                }
                if let Some(g) = gamma {
                    if !g.is_finite() {
                        self.push("CONSTRAINT", "sigma.gamma", "must be finite");
                    }
                }
                SigmaSpec::Polynomial {
                    gamma: gamma.unwrap_or(f64::NAN),
                }
            }
            "table" => {
                let path = self.string("sigma.table");
                if path.is_none() && !self.violations.iter().any(|v| v.key == "sigma.table") {
                    self.push("MISSING_KEY", "sigma.table", "required for sigma.kind = \"table\"");
                }
                SigmaSpec::Table {
                    path: path.map(|p| base.join(p)).unwrap_or_default(),
                }
            }
            other => {
                self.push("CONSTRAINT", "sigma.kind", format!("`{other}` is not one of polynomial, table"));
                SigmaSpec::Polynomial { gamma: f64::NAN }
            }
        };

        let mut cfg = ExperimentConfig::with_model(alpha, sigma);
        let d = cfg.clone();

        cfg.grid.requested = self.has_prefix("grid.");
        let n = self.uint("grid.n", d.grid.n as u64);
        if n < 16 || n % 2 != 0 {
            self.push("CONSTRAINT", "grid.n", format!("must be even and at least 16, got {n}"));
        }
        cfg.grid.n = n as usize;
        match self.flat.remove("grid.L") {
            None => {}
            Some(Value::String(s)) if s.eq_ignore_ascii_case("auto") => cfg.grid.extent = Extent::Auto,
            Some(Value::Float(l)) if l > 0.0 && l.is_finite() => cfg.grid.extent = Extent::Fixed(l),
            Some(Value::Integer(l)) if l > 0 => cfg.grid.extent = Extent::Fixed(l as f64),
            Some(Value::Float(_) | Value::Integer(_)) => self.push("CONSTRAINT", "grid.L", "must be positive"),
            Some(other) => self.mismatch("grid.L", "\"AUTO\" or a number", &other),
        }
        cfg.grid.refine = self.boolean("grid.refine", d.grid.refine);

        let s = &d.sim;
        cfg.sim.x0 = self.float_or("sim.x0", s.x0);
        cfg.sim.eps = self.positive("sim.eps", s.eps);
        cfg.sim.dt = self.positive("sim.dt", s.dt);
        cfg.sim.horizon = self.positive("sim.horizon", s.horizon);
        cfg.sim.n_paths = self.uint("sim.n_paths", s.n_paths);
        cfg.sim.seed = self.uint("sim.seed", s.seed);
        cfg.sim.checkpoints = self.floats("sim.checkpoints", s.checkpoints.clone());
        cfg.sim.survival_step = self.positive("sim.survival_step", s.survival_step);
        cfg.sim.substep_control = self.positive("sim.substep_control", DEFAULT_SUBSTEP_CONTROL);
        cfg.sim.escape_radius = self.positive("sim.escape_radius", DEFAULT_ESCAPE_RADIUS);
        if let Some(rule) = self.string("sim.kill_rule") {
            match rule.as_str() {
                "ball" => cfg.sim.kill_rule = KillRule::Ball,
                "ball_or_crossing" => cfg.sim.kill_rule = KillRule::BallOrCrossing,
                other => self.push("CONSTRAINT", "sim.kill_rule", format!("`{other}` is not one of ball, ball_or_crossing")),
            }
        }
        let bins = self.uint("sim.occupation_bins", d.mc.occupation_bins as u64);
        if bins < 2 {
            self.push("CONSTRAINT", "sim.occupation_bins", "need at least 2 bins");
        }
        cfg.mc.occupation_bins = bins as usize;
        if cfg.sim.x0.abs() <= cfg.sim.eps {
            self.push("CONSTRAINT", "sim.x0", format!("|x0| must exceed eps = {}", cfg.sim.eps));
        }
        if cfg.sim.n_paths == 0 {
            self.push("CONSTRAINT", "sim.n_paths", "need at least one path");
        }
        if cfg.sim.dt >= cfg.sim.horizon {
            self.push("CONSTRAINT", "sim.dt", "must be smaller than sim.horizon");
        }
        if cfg.sim.substep_control > 1.0 {
            self.push("CONSTRAINT", "sim.substep_control", "must not exceed 1");
        }
        if cfg.sim.checkpoints.iter().any(|c| !(*c > 0.0 && *c <= cfg.sim.horizon)) {
            self.push("CONSTRAINT", "sim.checkpoints", "checkpoints must lie in (0, sim.horizon]");
        }

        cfg.mc.eps_levels = self.floats("mc.eps_levels", d.mc.eps_levels.clone());
        if cfg.mc.eps_levels.len() < 2 || cfg.mc.eps_levels.iter().any(|e| !(*e > 0.0)) {
            self.push("CONSTRAINT", "mc.eps_levels", "need at least two positive levels");
        }
        let w = self.floats("mc.fit_window", vec![d.mc.fit_window.0, d.mc.fit_window.1]);
        if w.len() == 2 && w[0] >= 0.0 && w[1] > w[0] {
            cfg.mc.fit_window = (w[0], w[1]);
        } else {
            self.push("CONSTRAINT", "mc.fit_window", "expected [lo, hi] with 0 <= lo < hi");
        }
        cfg.mc.seeds = self.uint("mc.seeds", d.mc.seeds as u64) as usize;
        if cfg.mc.seeds < 2 {
            self.push("CONSTRAINT", "mc.seeds", "need at least 2 seeds");
        }
        cfg.mc.qed_paths = self.uint("mc.qed_paths", d.mc.qed_paths);
        if cfg.mc.qed_paths == 0 {
            self.push("CONSTRAINT", "mc.qed_paths", "need at least one path");
        }
        cfg.mc.qed_survivors = self.uint("mc.qed_survivors", d.mc.qed_survivors as u64) as usize;
        cfg.mc.qed_gap_multiple = self.positive("mc.qed_gap_multiple", d.mc.qed_gap_multiple);

        cfg.hitting.r = self.positive("hitting.r", d.hitting.r);
        cfg.hitting.x0 = self.float_or("hitting.x0", d.hitting.x0);
        cfg.hitting.n_paths = self.uint("hitting.n_paths", d.hitting.n_paths);
        cfg.hitting.band = self.positive("hitting.band", d.hitting.band);
        cfg.hitting.horizon = self.positive("hitting.horizon", d.hitting.horizon);
        if cfg.hitting.n_paths < 2 {
            self.push("CONSTRAINT", "hitting.n_paths", "need at least two paths");
        }

        cfg.analyze.r_grid = self.floats("analyze.r_grid", d.analyze.r_grid.clone());
        if cfg.analyze.r_grid.is_empty() || cfg.analyze.r_grid.iter().any(|r| !(*r > 0.0)) {
            self.push("CONSTRAINT", "analyze.r_grid", "radii must be positive");
        }
        cfg.analyze.x = self.float_or("analyze.x", d.analyze.x);

        if let Some(v) = self.flat.remove("validate.suites") {
            match &v {
                Value::Array(items) => {
                    let mut suites = Vec::new();
                    for item in items {
                        match item.as_str().and_then(Suite::parse) {
                            Some(s) => suites.push(s),
                            None => self.push("CONSTRAINT", "validate.suites", format!("unknown suite {item}")),
                        }
                    }
                    suites.sort();
                    suites.dedup();
                    cfg.validate.suites = suites;
                }
                other => self.mismatch("validate.suites", "an array of suite names", other),
            }
        }
        cfg.validate.tv = self.positive("validate.tv", d.validate.tv);
        cfg.validate.mc_rate = self.positive("validate.mc_rate", d.validate.mc_rate);
        cfg.validate.yaglom_rate = self.positive("validate.yaglom_rate", d.validate.yaglom_rate);
        cfg.validate.uniform_rate = self.positive("validate.uniform_rate", d.validate.uniform_rate);

        if let Some(dir) = self.string("output.dir") {
            cfg.output_dir = PathBuf::from(dir);
        }

        if cfg.grid.requested && !self.violations.iter().any(|v| v.key == "alpha" || v.key.starts_with("sigma.")) {
            // Also covers αγ <= 1, where μ is not even finite.
            self.check_entrance(&cfg);
        }
        cfg
    }

    fn check_entrance(&mut self, cfg: &ExperimentConfig) {
        match &cfg.sigma {
            SigmaSpec::Polynomial { gamma } => {
                if *gamma <= 1.0 {
                    self.push(
                        "ENTRANCE_FAIL",
                        "sigma.gamma",
                        format!("a spectral run needs entrance from infinity, which holds iff gamma > 1 (got {gamma})"),
                    );
                }
            }
            SigmaSpec::Table { .. } => match cfg.profile() {
                Ok(p) => {
                    if !entrance_integral(&p).is_ok_and(|o| o.is_finite()) {
                        self.push("ENTRANCE_FAIL", "sigma.table", "the entrance integral diverges");
                    }
                }
                Err(e) => self.push("CONSTRAINT", "sigma.table", e.to_string()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig> {
        parse_config_str(s, Path::new("."))
    }

    fn codes(r: Result<ExperimentConfig>) -> Vec<(&'static str, String)> {
        match r {
            Err(Error::Config(v)) => v.into_iter().map(|v| (v.code, v.key)).collect(),
            other => panic!("expected violations, got {other:?}"),
        }
    }

    #[test]
    fn minimal_polynomial_gets_defaults() {
        let c = parse("alpha = 1.5\nsigma.gamma = 2\n").unwrap();
        assert_eq!(c, ExperimentConfig::polynomial(1.5, 2.0));
        let t = parse("alpha = 1.5\n[sigma]\ngamma = 2.0\n").unwrap();
        assert_eq!(t, c);
    }

    #[test]
    fn all_violations_are_reported() {
        let v = codes(parse("alpha = 2.3\nsigma.gamma = \"two\"\nsim.dt = -1\nfoo.bar = 1\n"));
        assert!(v.contains(&("ALPHA_RANGE", "alpha".into())));
        assert!(v.contains(&("TYPE_MISMATCH", "sigma.gamma".into())));
        assert!(v.contains(&("CONSTRAINT", "sim.dt".into())));
        assert!(v.contains(&("UNKNOWN_KEY", "foo.bar".into())));
        assert_eq!(codes(parse("sigma.gamma = 2\n")), vec![("MISSING_KEY", "alpha".into())]);
    }

    #[test]
    fn entrance_failure_when_spectral_run_requested() {
        let v = codes(parse("alpha = 1.5\nsigma.gamma = 0.8\ngrid.n = 400\n"));
        assert_eq!(v, vec![("ENTRANCE_FAIL", "sigma.gamma".into())]);
        // γ = 0.5 also has infinite mass at α = 1.5.
        let v = codes(parse("alpha = 1.5\nsigma.gamma = 0.5\ngrid.n = 400\n"));
        assert_eq!(v, vec![("ENTRANCE_FAIL", "sigma.gamma".into())]);
        // Without a spectral run the divergence is reported by analyze.
        assert!(parse("alpha = 1.5\nsigma.gamma = 0.5\n").is_ok());
        assert!(parse("alpha = 1.5\nsigma.gamma = 0.8\n").is_ok());
    }

    #[test]
    fn suites_and_extent() {
        let c = parse("alpha = 1.5\nsigma.gamma = 2\ngrid.L = 1000\nvalidate.suites = [\"spectral\", \"kernel\"]\n").unwrap();
        assert_eq!(c.grid.extent, Extent::Fixed(1000.0));
        assert_eq!(c.validate.suites, vec![Suite::Kernel, Suite::Spectral]);
        assert!(c.grid.requested);
    }
}
