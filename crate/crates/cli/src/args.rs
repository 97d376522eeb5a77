//! Command-line flags layered over the JSON config.

use std::path::PathBuf;

use amg_sparsify::perf::SizeUnit;
use amg_sparsify::problems::ProblemKind;
use amg_sparsify::solve::{AdaptiveSpec, KrylovMethod, Trigger};
use amg_sparsify::sparsify::Lumping;
use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_enum, parse_gammas, parse_schedules, Method, RhsMode, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "amg-sparsify", version, about = "Sparsified classical AMG experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Set up, sparsify and solve once.
    Solve(Overrides),
    /// Solve once per drop tolerance schedule and summarize.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Schedules separated by `;`, e.g. `0,0.01,1;0,0,1`.
        #[arg(long)]
        schedules: Option<String>,
    },
    /// Write modeled per-level SpMV cost for Galerkin and active operators.
    Model(Overrides),
    /// Dump per-level sparsity patterns as row,col lists.
    Spy(Overrides),
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// poisson3d7pt, poisson3d27pt or aniso2d9pt.
    #[arg(long)]
    pub problem: Option<String>,
    /// Interior nodes per axis.
    #[arg(long)]
    pub n: Option<usize>,
    /// Anisotropy rotation angle.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Anisotropy strength.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Matrix Market input instead of a generated problem.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// galerkin, nongalerkin, sparse or hybrid.
    #[arg(long)]
    pub method: Option<String>,
    /// diagonal or neighbors.
    #[arg(long)]
    pub lumping: Option<String>,
    /// Per-level drop tolerances, e.g. `0,0.01,0.1,1.0`.
    #[arg(long)]
    pub gammas: Option<String>,
    /// pcg or gmres.
    #[arg(long)]
    pub krylov: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub restart: Option<usize>,
    /// Re-add dropped entries when convergence deteriorates.
    #[arg(long)]
    pub adaptive: bool,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub gamma_min: Option<f64>,
    /// always or conv_factor.
    #[arg(long)]
    pub trigger: Option<String>,
    #[arg(long)]
    pub rho_max: Option<f64>,
    /// Virtual process count for the communication model.
    #[arg(long)]
    pub procs: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// words or bytes.
    #[arg(long)]
    pub unit: Option<String>,
    /// Time SpMVs to set `c` per level.
    #[arg(long)]
    pub calibrate: bool,
    /// random_solution or zero_rhs.
    #[arg(long)]
    pub rhs: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn dims_for(kind: ProblemKind) -> usize {
    match kind {
        ProblemKind::Aniso2d9pt => 2,
        _ => 3,
    }
}

impl Overrides {
    /// Loads `--config` (or defaults) and applies every given flag.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg)?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let pr = &mut cfg.problem;
        if let Some(p) = &self.problem {
            pr.kind = parse_enum("problem", p)?;
            if pr.kind == ProblemKind::FromFile && self.matrix.is_none() && pr.path.is_none() {
                bail!("--problem from_file needs --matrix");
            }
            if pr.kind != ProblemKind::FromFile {
                let d = pr.dims.first().copied().unwrap_or(16);
                pr.dims = vec![d; dims_for(pr.kind)];
            }
        }
        if let Some(n) = self.n {
            pr.dims = vec![n; dims_for(pr.kind)];
        }
        if let Some(t) = self.theta {
            pr.theta = t;
        }
        if let Some(e) = self.epsilon {
            pr.epsilon = e;
        }
        if let Some(m) = &self.matrix {
            pr.kind = ProblemKind::FromFile;
            pr.path = Some(m.clone());
        }
        if let Some(m) = &self.method {
            cfg.method = parse_enum::<Method>("method", m)?;
        }
        if let Some(l) = &self.lumping {
            cfg.lumping = parse_enum::<Lumping>("lumping", l)?;
        }
        if let Some(g) = &self.gammas {
            cfg.gammas = parse_gammas(g)?;
        }
        if let Some(k) = &self.krylov {
            cfg.krylov.method = parse_enum::<KrylovMethod>("krylov", k)?;
        }
        if let Some(t) = self.tol {
            cfg.krylov.tol = t;
        }
        if let Some(m) = self.max_iter {
            cfg.krylov.max_iter = m;
        }
        if let Some(r) = self.restart {
            cfg.krylov.restart = r;
        }
        let adaptive_flags = self.k.is_some()
            || self.s.is_some()
            || self.gamma_min.is_some()
            || self.trigger.is_some()
            || self.rho_max.is_some();
        if adaptive_flags && !self.adaptive && cfg.adaptive.is_none() {
            bail!("--k, --s, --gamma-min, --trigger and --rho-max need --adaptive");
        }
        if self.adaptive && cfg.adaptive.is_none() {
            cfg.adaptive = Some(AdaptiveSpec::default());
        }
        if let Some(a) = cfg.adaptive.as_mut() {
            if let Some(k) = self.k {
                a.k = k;
            }
            if let Some(s) = self.s {
                a.s = s;
            }
            if let Some(g) = self.gamma_min {
                a.gamma_min = g;
            }
            if let Some(t) = &self.trigger {
                a.trigger = parse_enum::<Trigger>("trigger", t)?;
            }
            if let Some(r) = self.rho_max {
                a.rho_max = r;
            }
        }
        if let Some(p) = self.procs {
            cfg.model.p = p;
        }
        if let Some(a) = self.alpha {
            cfg.model.alpha = a;
        }
        if let Some(b) = self.beta {
            cfg.model.beta = b;
        }
        if let Some(c) = self.c {
            cfg.model.c = c;
        }
        if let Some(u) = &self.unit {
            cfg.model.unit = parse_enum::<SizeUnit>("unit", u)?;
        }
        if self.calibrate {
            cfg.calibrate = true;
        }
        if let Some(r) = &self.rhs {
            cfg.rhs = parse_enum::<RhsMode>("rhs", r)?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        Ok(())
    }
}

/// Resolves a sweep's schedules flag on top of the config.
pub fn apply_schedules(cfg: &mut RunConfig, schedules: Option<&str>) -> Result<()> {
    if let Some(s) = schedules {
        cfg.schedules = parse_schedules(s)?;
        if cfg.schedules.is_empty() {
            bail!("--schedules needs at least one schedule");
        }
    }
    Ok(())
}
