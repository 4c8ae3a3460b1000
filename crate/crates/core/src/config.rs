//! Versioned TOML run configuration.
//!
//! Unknown keys are rejected everywhere: a typo in a tolerance or exponent must
//! not silently fall back to a default. Errors carry the dotted path of the
//! offending key.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::pde::{Grid, InitialKind, ReactionSpec, SolverConfig};
use crate::profile::ShootingConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelParams,
    #[serde(default)]
    pub shooting: ShootingConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub reaction: ReactionChoice,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub initial: InitialChoice,
    #[serde(default)]
    pub time: TimeConfig,
    /// `solver.m` is taken from `model.m`.
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Coarse scan `z0 = 2^k`, `k ∈ [k_min, k_max]`, used to bracket the blow-up point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub k_min: i32,
    pub k_max: i32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { k_min: -8, k_max: 3 }
    }
}

/// Reaction term; `power_logistic` is `rbar·s^β(1 − s)` with the model's `rbar` and `β`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReactionChoice {
    #[default]
    PowerLogistic,
    Zero,
    Sampled { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub x_left: f64,
    pub h: f64,
    pub x_uniform: f64,
    pub ratio: f64,
    pub x_right: f64,
    /// Mirror the grid about `0` (then `x_left` is ignored).
    pub symmetric: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x_left: -20.0, h: 0.05, x_uniform: 10.0, ratio: 1.01, x_right: 1e6, symmetric: false }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        if self.symmetric {
            Grid::symmetric(self.h, self.x_uniform, self.ratio, self.x_right)
        } else {
            Grid::stretched(self.x_left, self.h, self.x_uniform, self.ratio, self.x_right)
        }
    }
}

/// Initial datum; `front_algebraic` uses the model's `alpha`, `Cbar` and `x0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialChoice {
    #[default]
    FrontAlgebraic,
    FrontStep,
    CompactBump,
}

/// Snapshots at `count` geometrically spaced times from `t_first` to `t_end`,
/// plus the `extra` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_first: f64,
    pub t_end: f64,
    pub count: usize,
    pub extra: Vec<f64>,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { t_first: 10.0, t_end: 200.0, count: 41, extra: vec![0.0] }
    }
}

impl TimeConfig {
    /// Sorted, deduplicated snapshot times.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = (0..self.count)
            .map(|i| {
                if self.count == 1 {
                    self.t_end
                } else {
                    let th = i as f64 / (self.count - 1) as f64;
                    self.t_first * (self.t_end / self.t_first).powf(th)
                }
            })
            .collect();
        if let Some(last) = t.last_mut() {
            *last = self.t_end;
        }
        t.extend(&self.extra);
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub lambdas: Vec<f64>,
    /// Level-set fits use the tracked times `t ≥ fit_from`.
    pub fit_from: f64,
    pub sandwich_from: f64,
    /// Profiles are extrapolated beyond `z_ref·10^cut_decades`.
    pub cut_decades: f64,
    pub compare_tol: f64,
    pub residual_tol: f64,
    /// Comparisons ignore nodes beyond this fraction of `x_right`, where the
    /// truncated boundary condition dominates.
    pub compare_window: f64,
    pub subsolution_start: f64,
    pub subsolution_samples: usize,
    pub subsolution_doublings: usize,
    /// Latest snapshot considered when placing the subsolution below `u`.
    pub calibration_t_max: f64,
    pub calibration_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![0.1],
            fit_from: 10.0,
            sandwich_from: 50.0,
            cut_decades: 4.0,
            compare_tol: 1e-6,
            residual_tol: 1e-6,
            compare_window: 0.1,
            subsolution_start: 1.0,
            subsolution_samples: 40,
            subsolution_doublings: 40,
            calibration_t_max: 100.0,
            calibration_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    /// Refuse to overwrite an existing artifact produced from a different config.
    pub write_once: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), write_once: true }
    }
}

impl RunConfig {
    /// A configuration with every section at its default.
    pub fn with_model(model: ModelParams) -> Self {
        let solver = SolverConfig { m: model.m, ..SolverConfig::default() };
        Self {
            schema_version: SCHEMA_VERSION,
            model,
            shooting: ShootingConfig::default(),
            scan: ScanConfig::default(),
            reaction: ReactionChoice::default(),
            grid: GridConfig::default(),
            initial: InitialChoice::default(),
            time: TimeConfig::default(),
            solver,
            analysis: AnalysisConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Parses and structurally validates a TOML document. Parameters outside
    /// the hypotheses are *not* rejected here; that is the regime check's job.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Config {
            path: ".".into(),
            reason: e.to_string().trim().to_string(),
        })?;
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            reason: e.inner().to_string().trim().to_string(),
        })?;
        // an explicit solver.m must agree with the model
        let raw: toml::Table = toml::from_str(text).map_err(|e| Error::Config { path: ".".into(), reason: e.to_string() })?;
        let solver_m = raw.get("solver").and_then(|s| s.get("m")).and_then(|v| v.as_float());
        if let Some(m) = solver_m {
            if m != cfg.model.m {
                return Err(Error::Config {
                    path: "solver.m".into(),
                    reason: format!("{m} disagrees with model.m = {}", cfg.model.m),
                });
            }
        }
        cfg.solver.m = cfg.model.m;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    fn validate(&self) -> Result<()> {
        let err = |path: &str, reason: String| Err(Error::Config { path: path.into(), reason });
        if self.schema_version != SCHEMA_VERSION {
            return err("schema_version", format!("expected {SCHEMA_VERSION}, got {}", self.schema_version));
        }
        if self.scan.k_min >= self.scan.k_max {
            return err("scan", "k_min must be below k_max".into());
        }
        if let Err(e) = self.shooting.validate(self.model.m.clamp(1e-3, 0.999)) {
            return err("shooting", e.to_string());
        }
        if let Err(e) = self.grid.build() {
            return err("grid", e.to_string());
        }
        let t = &self.time;
        if !(t.t_first > 0.0 && t.t_end >= t.t_first && t.count >= 1) {
            return err("time", "need 0 < t_first <= t_end and count >= 1".into());
        }
        if t.extra.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return err("time.extra", "times must be finite and nonnegative".into());
        }
        if let ReactionChoice::Sampled { values } = &self.reaction {
            if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
                return err("reaction.values", "need at least two finite values".into());
            }
        }
        let a = &self.analysis;
        if a.lambdas.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return err("analysis.lambdas", "levels must lie in (0, 1)".into());
        }
        if !(a.fit_from > 0.0 && a.fit_from < t.t_end && a.cut_decades > 0.0) {
            return err("analysis", "need 0 < fit_from < time.t_end and cut_decades > 0".into());
        }
        if !(a.compare_window > 0.0 && a.compare_window <= 1.0) {
            return err("analysis.compare_window", "must lie in (0, 1]".into());
        }
        Ok(())
    }

    pub fn reaction_spec(&self) -> ReactionSpec {
        match &self.reaction {
            ReactionChoice::PowerLogistic => ReactionSpec::PowerLogistic { rbar: self.model.rbar, beta: self.model.beta },
            ReactionChoice::Zero => ReactionSpec::Zero,
            ReactionChoice::Sampled { values } => ReactionSpec::Sampled { values: values.clone() },
        }
    }

    /// Decades spanned by the level-set fit window.
    pub fn fit_decades(&self) -> f64 {
        // a hair wider so the first fitted time is not lost to round-off
        (self.time.t_end / self.analysis.fit_from).log10() * (1.0 + 1e-9)
    }

    pub fn initial_kind(&self) -> InitialKind {
        match self.initial {
            InitialChoice::FrontAlgebraic => InitialKind::FrontAlgebraic {
                alpha: self.model.alpha,
                Cbar: self.model.Cbar,
                x0: self.model.x0,
            },
            InitialChoice::FrontStep => InitialKind::FrontStep,
            InitialChoice::CompactBump => InitialKind::CompactBump,
        }
    }

    /// Hex SHA-256 of the canonical JSON form. Independent of key order and
    /// formatting in the source file, of whether defaults were spelled out,
    /// and of the output section (where results go does not change them).
    pub fn hash(&self) -> String {
        let canonical = Self { output: OutputConfig::default(), ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("config is always serializable");
        hex::encode(Sha256::digest(&bytes))
    }
}
