use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{comm_stats, PartitionStats};
use crate::error::{AmgError, Result};
use crate::setup::Hierarchy;
use crate::sparse::CsrMatrix;

/// How message sizes enter the bandwidth term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeUnit {
    /// `beta` is per 8-byte word and messages are counted in words.
    Words,
    /// `beta` is per byte; a word is 8 bytes.
    Bytes,
}

impl SizeUnit {
    fn per_word(self) -> f64 {
        match self {
            SizeUnit::Words => 1.0,
            SizeUnit::Bytes => 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// Latency per message, seconds.
    pub alpha: f64,
    /// Inverse bandwidth, seconds per unit of `unit`.
    pub beta: f64,
    /// Seconds per floating point operation.
    pub c: f64,
    /// Virtual process count.
    pub p: usize,
    pub unit: SizeUnit,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            alpha: 1.8e-6,
            beta: 1.8e-9,
            c: 1e-10,
            p: 64,
            unit: SizeUnit::Words,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.c > 0.0) || self.p == 0 {
            return Err(AmgError::InvalidParameter {
                name: "model",
                detail: format!(
                    "alpha, beta, c and p must be positive (got {}, {}, {}, {})",
                    self.alpha, self.beta, self.c, self.p
                ),
            });
        }
        Ok(())
    }
}

/// `T = 2 c nnz_p + s_max (alpha + beta n_max)`.
pub fn modeled_time(nnz_p: f64, s_p_max: usize, n_p_max: usize, params: &ModelParams) -> f64 {
    let comm = if s_p_max == 0 {
        0.0
    } else {
        s_p_max as f64 * (params.alpha + params.beta * n_p_max as f64 * params.unit.per_word())
    };
    2.0 * params.c * nnz_p + comm
}

pub fn modeled_spmv_time(stats: &PartitionStats, params: &ModelParams) -> f64 {
    modeled_time(stats.nnz_p, stats.s_p_max, stats.n_p_max, params)
}

/// Seconds per flop of a local SpMV: median wall time over `repeats`
/// products divided by `2 nnz`.
pub fn calibrate_c(a: &CsrMatrix, repeats: usize) -> Result<f64> {
    if repeats < 3 {
        return Err(AmgError::InvalidParameter {
            name: "repeats",
            detail: "need at least 3 timings".into(),
        });
    }
    if a.nnz() == 0 {
        return Err(AmgError::InvalidParameter {
            name: "matrix",
            detail: "cannot time an SpMV without nonzeros".into(),
        });
    }
    let x = vec![1.0; a.ncols()];
    let mut y = vec![0.0; a.nrows()];
    a.spmv_into(&x, &mut y)?;
    let mut times: Vec<f64> = (0..repeats)
        .map(|_| {
            let t = Instant::now();
            a.spmv_into(std::hint::black_box(&x), &mut y).expect("shapes checked");
            std::hint::black_box(&y);
            t.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let median = times[repeats / 2];
    // clock granularity can round tiny products to zero
    Ok(median.max(1e-9) / (2.0 * a.nnz() as f64))
}

/// Per-level profile row; field order is the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelProfile {
    pub level: usize,
    pub n: usize,
    pub nnz: usize,
    pub nnz_per_row: f64,
    pub sends_max: usize,
    pub msg_words_max: usize,
    pub total_words: usize,
    pub modeled_seconds: f64,
}

pub const PROFILE_CSV_HEADER: &str = "level,n,nnz,nnz_per_row,sends_max,msg_words_max,total_words,modeled_seconds";

/// Profile with the fixed `params.c`.
pub fn hierarchy_profile(h: &Hierarchy, params: &ModelParams, use_sparsified: bool) -> Result<Vec<LevelProfile>> {
    hierarchy_profile_with(h, params, use_sparsified, |_| Ok(params.c))
}

/// Profile with a per-matrix flop cost, e.g. from [`calibrate_c`].
pub fn hierarchy_profile_with(
    h: &Hierarchy,
    params: &ModelParams,
    use_sparsified: bool,
    mut cost: impl FnMut(&CsrMatrix) -> Result<f64>,
) -> Result<Vec<LevelProfile>> {
    params.validate()?;
    h.levels()
        .iter()
        .enumerate()
        .map(|(level, lv)| {
            let a = if use_sparsified { lv.a_hat() } else { lv.a() };
            let stats = comm_stats(a, params.p)?;
            let c = cost(a)?;
            let n = a.nrows();
            Ok(LevelProfile {
                level,
                n,
                nnz: a.nnz(),
                nnz_per_row: if n == 0 { 0.0 } else { a.nnz() as f64 / n as f64 },
                sends_max: stats.s_p_max,
                msg_words_max: stats.n_p_max,
                total_words: stats.total_words,
                modeled_seconds: modeled_spmv_time(&stats, &ModelParams { c, ..*params }),
            })
        })
        .collect()
}

pub fn write_profile_csv(rows: &[LevelProfile], w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "{PROFILE_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{:.6},{},{},{},{:.6e}",
            r.level, r.n, r.nnz, r.nnz_per_row, r.sends_max, r.msg_words_max, r.total_words, r.modeled_seconds
        )?;
    }
    Ok(())
}

/// Modeled sends of one preconditioned iteration: one SpMV with the active
/// operator on every level, taking the busiest process per level.
pub fn sends_per_iteration(h: &Hierarchy, p: usize) -> Result<usize> {
    h.levels()
        .iter()
        .map(|lv| comm_stats(lv.a_hat(), p).map(|s| s.s_p_max))
        .sum()
}
