//! Run configuration: one JSON document, optionally patched by flags.

use std::path::{Path, PathBuf};

use amg_sparsify::perf::ModelParams;
use amg_sparsify::problems::{ProblemKind, ProblemSpec};
use amg_sparsify::setup::SetupOptions;
use amg_sparsify::solve::{AdaptiveSpec, KrylovSpec, SmootherSpec};
use amg_sparsify::sparsify::{DropSchedule, Lumping, Variant};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Galerkin,
    Nongalerkin,
    Sparse,
    Hybrid,
}

/// How the right-hand side and initial guess are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsMode {
    /// `b = A x*` with random `x*`, `x0 = 0`.
    RandomSolution,
    /// `b = 0` with random `x0`.
    ZeroRhs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SetupConfig {
    pub max_size: usize,
    pub theta_s: f64,
    pub max_levels: usize,
    pub interp_max_per_row: Option<usize>,
}

impl Default for SetupConfig {
    fn default() -> Self {
        let d = SetupOptions::default();
        SetupConfig {
            max_size: d.max_size,
            theta_s: d.theta_s,
            max_levels: d.max_levels,
            interp_max_per_row: d.interp_max_per_row,
        }
    }
}

impl From<&SetupConfig> for SetupOptions {
    fn from(c: &SetupConfig) -> Self {
        SetupOptions {
            max_size: c.max_size,
            theta_s: c.theta_s,
            max_levels: c.max_levels,
            interp_max_per_row: c.interp_max_per_row,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_lumping")]
    pub lumping: Lumping,
    /// Per-level drop tolerances, padded with the last entry.
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    /// Schedules for `sweep`; empty means the built-in six.
    #[serde(default)]
    pub schedules: Vec<Vec<f64>>,
    #[serde(default)]
    pub setup: SetupConfig,
    #[serde(default)]
    pub smoother: SmootherSpec,
    #[serde(default)]
    pub krylov: KrylovSpec,
    #[serde(default)]
    pub adaptive: Option<AdaptiveSpec>,
    #[serde(default)]
    pub model: ModelParams,
    /// Measure `c` per level instead of using `model.c`.
    #[serde(default)]
    pub calibrate: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rhs")]
    pub rhs: RhsMode,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_method() -> Method {
    Method::Galerkin
}

fn default_lumping() -> Lumping {
    Lumping::Diagonal
}

fn default_gammas() -> Vec<f64> {
    vec![0.0]
}

fn default_rhs() -> RhsMode {
    RhsMode::RandomSolution
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemSpec {
                kind: ProblemKind::Poisson3d7pt,
                dims: vec![16, 16, 16],
                theta: std::f64::consts::PI / 8.0,
                epsilon: 0.001,
                path: None,
            },
            method: default_method(),
            lumping: default_lumping(),
            gammas: default_gammas(),
            schedules: Vec::new(),
            setup: SetupConfig::default(),
            smoother: SmootherSpec::default(),
            krylov: KrylovSpec::default(),
            adaptive: None,
            model: ModelParams::default(),
            calibrate: false,
            seed: 0,
            rhs: default_rhs(),
            out: default_out(),
        }
    }
}

/// Drop tolerance series tried by `sweep` when none are configured.
pub fn default_schedules() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 0.01, 0.1, 1.0],
        vec![0.0, 0.1, 1.0],
        vec![0.0, 1.0],
        vec![0.0, 0.0, 0.01, 0.1, 1.0],
        vec![0.0, 0.0, 0.1, 1.0],
        vec![0.0, 0.0, 1.0],
    ]
}

impl RunConfig {
    /// Parses JSON, reporting the path of the offending field on error.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("config field `{path}`: {}", e.into_inner())
        })?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.smoother.validate()?;
        self.krylov.validate()?;
        self.model.validate()?;
        if let Some(a) = &self.adaptive {
            a.validate()?;
            if self.method == Method::Nongalerkin {
                bail!("adaptive solves need a method that keeps Galerkin operators (galerkin, sparse or hybrid)");
            }
        }
        if !(self.setup.theta_s >= 0.0 && self.setup.theta_s <= 1.0) {
            bail!("setup.theta_s must lie in [0, 1], got {}", self.setup.theta_s);
        }
        self.schedule(&self.gammas)?;
        for s in &self.schedules {
            self.schedule(s)?;
        }
        Ok(())
    }

    pub fn setup_options(&self) -> SetupOptions {
        SetupOptions::from(&self.setup)
    }

    /// Drop schedule for `gammas` under the configured method, `None` for
    /// plain Galerkin.
    pub fn schedule(&self, gammas: &[f64]) -> Result<Option<DropSchedule>> {
        let variant = match self.method {
            Method::Galerkin => return Ok(None),
            Method::Nongalerkin => Variant::NonGalerkin,
            Method::Sparse => Variant::Sparse,
            Method::Hybrid => Variant::Hybrid,
        };
        Ok(Some(DropSchedule::new(gammas.to_vec(), self.lumping, variant)?))
    }
}

/// Parses a comma-separated tolerance list such as `0,0.01,0.1,1.0`.
pub fn parse_gammas(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad tolerance `{t}` in `{s}`"))
        })
        .collect()
}

/// Parses `;`-separated schedules, each a comma-separated list.
pub fn parse_schedules(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(parse_gammas).collect()
}

/// Parses a snake_case enum value with the same names the JSON uses.
pub fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|e| anyhow::anyhow!("invalid {what} `{s}`: {e}"))
}
