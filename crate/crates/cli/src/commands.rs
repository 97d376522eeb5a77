//! The four subcommands and the artifacts they write.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use amg_sparsify::perf::{
    calibrate_c, hierarchy_profile_with, sends_per_iteration, write_profile_csv, LevelProfile,
};
use amg_sparsify::rng::random_vector;
use amg_sparsify::setup::{amg_setup, Hierarchy};
use amg_sparsify::solve::{adaptive_solve, solve_with_hierarchy, SolveReport};
use amg_sparsify::sparsify::{sparse_hybrid_setup, Variant};
use amg_sparsify::{AmgError, CsrMatrix};
use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{default_schedules, Method, RhsMode, RunConfig};

/// Outcome class of a solve, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    NotConverged,
    Breakdown,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Converged => 0,
            Status::NotConverged | Status::Breakdown => 2,
        }
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub status: Status,
    pub method: Method,
    pub initial_gammas: Vec<f64>,
    pub final_gammas: Vec<f64>,
    pub levels: usize,
    pub error: Option<String>,
    pub solve: Option<SolveReport>,
}

pub struct SolveOutcome {
    pub status: Status,
    pub report: RunReport,
    pub hierarchy: Hierarchy,
}

/// Matrix, right-hand side and initial guess for `cfg`.
pub fn build_system(cfg: &RunConfig) -> Result<(CsrMatrix, Vec<f64>, Vec<f64>)> {
    let a = cfg.problem.generate()?;
    let n = a.nrows();
    let (b, x0) = match cfg.rhs {
        RhsMode::RandomSolution => (a.spmv(&random_vector(n, cfg.seed, 0))?, vec![0.0; n]),
        RhsMode::ZeroRhs => (vec![0.0; n], random_vector(n, cfg.seed, 1)),
    };
    Ok((a, b, x0))
}

/// Setup plus sparsification for the configured method and `gammas`.
pub fn build_hierarchy(cfg: &RunConfig, a: &CsrMatrix, gammas: &[f64]) -> Result<Hierarchy> {
    let opts = cfg.setup_options();
    let h = match cfg.schedule(gammas)? {
        None => amg_setup(a, &opts, None)?,
        Some(s) if s.variant == Variant::NonGalerkin => amg_setup(a, &opts, Some(&s))?,
        Some(s) => {
            let h = amg_setup(a, &opts, None)?;
            let fitted = s.fitted(h.num_levels());
            sparse_hybrid_setup(h, &fitted)?
        }
    };
    log::info!("hierarchy: {} levels, gammas {:?}", h.num_levels(), h.gammas());
    Ok(h)
}

/// Runs the configured (adaptive) solve. Krylov breakdowns become a
/// `Breakdown` status instead of an error.
pub fn run_solve(cfg: &RunConfig, gammas: &[f64]) -> Result<SolveOutcome> {
    cfg.validate()?;
    let (a, b, x0) = build_system(cfg)?;
    let mut h = build_hierarchy(cfg, &a, gammas)?;
    let initial_gammas = h.gammas();
    let p = cfg.model.p;
    let result = match &cfg.adaptive {
        Some(spec) => {
            let sends = |h: &Hierarchy| sends_per_iteration(h, p);
            adaptive_solve(&a, &b, &x0, &mut h, &cfg.smoother, spec, &cfg.krylov, Some(&sends))
        }
        None => {
            let s = sends_per_iteration(&h, p)?;
            solve_with_hierarchy(&a, &b, &x0, &h, &cfg.smoother, &cfg.krylov, Some(s))
        }
    };
    let (status, solve, error) = match result {
        Ok((_, rep)) => {
            let st = if rep.converged { Status::Converged } else { Status::NotConverged };
            (st, Some(rep), None)
        }
        Err(e @ AmgError::Breakdown { .. }) => {
            log::warn!("{e}");
            (Status::Breakdown, None, Some(e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    let report = RunReport {
        status,
        method: cfg.method,
        initial_gammas,
        final_gammas: h.gammas(),
        levels: h.num_levels(),
        error,
        solve,
    };
    Ok(SolveOutcome { status, report, hierarchy: h })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn profile(cfg: &RunConfig, h: &Hierarchy, use_sparsified: bool) -> Result<Vec<LevelProfile>> {
    let rows = if cfg.calibrate {
        hierarchy_profile_with(h, &cfg.model, use_sparsified, |a| calibrate_c(a, 5))?
    } else {
        hierarchy_profile_with(h, &cfg.model, use_sparsified, |_| Ok(cfg.model.c))?
    };
    Ok(rows)
}

fn write_profile(path: &Path, rows: &[LevelProfile]) -> Result<()> {
    let mut w = create(path)?;
    write_profile_csv(rows, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_residuals_csv(report: Option<&SolveReport>, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "iteration,relres,sends_modeled")?;
    if let Some(rep) = report {
        for (i, r) in rep.relative_residuals().iter().enumerate() {
            match rep.per_iteration_sends.get(i) {
                Some(s) => writeln!(w, "{i},{r:.16e},{s}")?,
                None => writeln!(w, "{i},{r:.16e},")?,
            }
        }
    }
    Ok(())
}

pub fn write_hierarchy_csv(h: &Hierarchy, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "level,n,nnz,nnz_per_row")?;
    for s in h.summary(true) {
        writeln!(w, "{},{},{},{:.6}", s.level, s.n, s.nnz, s.nnz_per_row)?;
    }
    Ok(())
}

/// Solve and write `report.json`, `residuals.csv`, `hierarchy.csv` and
/// `model.csv` into `out`.
pub fn write_solve_artifacts(cfg: &RunConfig, outcome: &SolveOutcome, out: &Path) -> Result<()> {
    let mut w = create(&out.join("report.json"))?;
    serde_json::to_writer_pretty(&mut w, &outcome.report)?;
    writeln!(w)?;
    w.flush()?;

    let mut w = create(&out.join("residuals.csv"))?;
    write_residuals_csv(outcome.report.solve.as_ref(), &mut w)?;
    w.flush()?;

    let mut w = create(&out.join("hierarchy.csv"))?;
    write_hierarchy_csv(&outcome.hierarchy, &mut w)?;
    w.flush()?;

    write_profile(&out.join("model.csv"), &profile(cfg, &outcome.hierarchy, true)?)
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Status> {
    let outcome = run_solve(cfg, &cfg.gammas)?;
    write_solve_artifacts(cfg, &outcome, &cfg.out)?;
    if let Some(rep) = &outcome.report.solve {
        log::info!(
            "{:?} after {} iterations, relative residual {:.3e}",
            outcome.status,
            rep.iterations,
            rep.final_relative_residual()
        );
    }
    Ok(outcome.status)
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub schedule: Vec<f64>,
    /// `converged`, `not_converged`, `breakdown` or `error`.
    pub status: String,
    pub exit_code: i32,
    pub iterations: Option<usize>,
    pub converged: bool,
    /// Sum over levels of one modeled SpMV with the final operators.
    pub modeled_time_per_iter: Option<f64>,
    pub wall_time: Option<f64>,
    pub best: bool,
}

fn sweep_row(cfg: &RunConfig, schedule: &[f64], out: &Path) -> Result<SweepRow> {
    let mut sub = cfg.clone();
    sub.gammas = schedule.to_vec();
    sub.out = out.to_path_buf();
    let outcome = run_solve(&sub, schedule)?;
    write_solve_artifacts(&sub, &outcome, out)?;
    let modeled: f64 = profile(&sub, &outcome.hierarchy, true)?.iter().map(|r| r.modeled_seconds).sum();
    let rep = outcome.report.solve.as_ref();
    Ok(SweepRow {
        schedule: schedule.to_vec(),
        status: serde_json::to_value(outcome.status)?.as_str().unwrap_or_default().to_string(),
        exit_code: outcome.status.exit_code(),
        iterations: rep.map(|r| r.iterations),
        converged: outcome.status == Status::Converged,
        modeled_time_per_iter: Some(modeled),
        wall_time: rep.map(|r| r.wall_time),
        best: false,
    })
}

/// Runs one solve per schedule into `out/schedule_<i>` and writes
/// `out/summary.csv`. A failing schedule is recorded, not fatal.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let schedules = if cfg.schedules.is_empty() { default_schedules() } else { cfg.schedules.clone() };
    let mut rows = Vec::with_capacity(schedules.len());
    for (i, s) in schedules.iter().enumerate() {
        let dir = cfg.out.join(format!("schedule_{i}"));
        let row = sweep_row(cfg, s, &dir).unwrap_or_else(|e| {
            log::error!("schedule {s:?}: {e:#}");
            SweepRow {
                schedule: s.clone(),
                status: "error".into(),
                exit_code: 1,
                iterations: None,
                converged: false,
                modeled_time_per_iter: None,
                wall_time: None,
                best: false,
            }
        });
        rows.push(row);
    }
    let best = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.converged)
        .min_by(|a, b| a.1.wall_time.unwrap_or(f64::INFINITY).total_cmp(&b.1.wall_time.unwrap_or(f64::INFINITY)))
        .map(|(i, _)| i);
    if let Some(i) = best {
        rows[i].best = true;
    }
    let mut w = create(&cfg.out.join("summary.csv"))?;
    write_summary_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(rows)
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_summary_csv(rows: &[SweepRow], w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "schedule,status,exit_code,iterations,converged,modeled_time_per_iter,wall_time,best")?;
    for r in rows {
        let sched: Vec<String> = r.schedule.iter().map(|g| g.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            sched.join(";"),
            r.status,
            r.exit_code,
            opt(r.iterations),
            r.converged,
            opt(r.modeled_time_per_iter.map(|t| format!("{t:.6e}"))),
            opt(r.wall_time.map(|t| format!("{t:.6e}"))),
            if r.best { "*" } else { "" }
        )?;
    }
    Ok(())
}

/// Writes `model_galerkin.csv` and `model_sparsified.csv`.
pub fn cmd_model(cfg: &RunConfig) -> Result<(Vec<LevelProfile>, Vec<LevelProfile>)> {
    cfg.validate()?;
    let a = cfg.problem.generate()?;
    let h = build_hierarchy(cfg, &a, &cfg.gammas)?;
    let g = profile(cfg, &h, false)?;
    let s = profile(cfg, &h, true)?;
    write_profile(&cfg.out.join("model_galerkin.csv"), &g)?;
    write_profile(&cfg.out.join("model_sparsified.csv"), &s)?;
    Ok((g, s))
}

pub fn spy_path(out: &Path, level: usize, sparsified: bool) -> PathBuf {
    let which = if sparsified { "a_hat" } else { "a" };
    out.join(format!("spy_{which}_level{level}.csv"))
}

pub fn write_spy(a: &CsrMatrix, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "row,col")?;
    for (i, j, _) in a.triplets() {
        writeln!(w, "{i},{j}")?;
    }
    Ok(())
}

/// Reads a `row,col` dump back.
pub fn read_spy(path: &Path) -> Result<Vec<(usize, usize)>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(f).lines().enumerate().skip(1) {
        let line = line?;
        let (i, j) = line
            .split_once(',')
            .with_context(|| format!("{}:{}: expected row,col", path.display(), k + 1))?;
        out.push((i.trim().parse()?, j.trim().parse()?));
    }
    Ok(out)
}

/// Dumps the Galerkin and active pattern of every level.
pub fn cmd_spy(cfg: &RunConfig) -> Result<usize> {
    cfg.validate()?;
    let a = cfg.problem.generate()?;
    let h = build_hierarchy(cfg, &a, &cfg.gammas)?;
    for (l, lv) in h.levels().iter().enumerate() {
        for (sparsified, m) in [(false, lv.a()), (true, lv.a_hat())] {
            let mut w = create(&spy_path(&cfg.out, l, sparsified))?;
            write_spy(m, &mut w)?;
            w.flush()?;
        }
    }
    Ok(h.num_levels())
}
