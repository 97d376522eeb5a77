//! Coarse-operator sparsification.
//!
//! Entries of a coarse operator outside the minimal pattern whose
//! magnitude falls below `gamma` times the row's largest off-diagonal are
//! removed, and their value is lumped either onto strong neighbors or onto
//! the diagonal so that row sums are conserved. Sparse and Hybrid Galerkin
//! apply this as a post-processing step over a complete Galerkin hierarchy
//! which keeps every `PᵀAP` operator, so any removal can be undone.

mod delta;
mod hybrid;
mod lump;
mod pattern;

use serde::{Deserialize, Serialize};

pub use delta::{DeltaLog, DeltaRecord, Destination};
pub use hybrid::{next_gammas, resparsify_levels, restore, sparse_hybrid_setup};
pub use lump::{lump_diagonal, lump_neighbors, ROW_SUM_ZERO_RTOL};
pub use pattern::{keep_set, minimal_pattern, SparsityPattern};

use crate::error::{AmgError, Result};
use crate::setup::StrengthMatrix;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lumping {
    /// Spread removed values over strong neighbors (symmetric updates).
    Neighbors,
    /// Add removed values to the diagonal.
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Minimal pattern from the Galerkin fine operator.
    Sparse,
    /// Minimal pattern from the already sparsified fine operator.
    Hybrid,
    /// Sparsify inside setup; coarser levels are built from the result.
    NonGalerkin,
}

/// Per-level drop tolerances plus the sparsification method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropSchedule {
    /// `gammas[l]` applies to the operator of level `l`; `gammas[0]` is
    /// ignored because the finest operator is never sparsified.
    pub gammas: Vec<f64>,
    pub lumping: Lumping,
    pub variant: Variant,
}

impl DropSchedule {
    pub fn new(gammas: Vec<f64>, lumping: Lumping, variant: Variant) -> Result<Self> {
        for &g in &gammas {
            pattern::check_gamma(g)?;
        }
        if gammas.is_empty() {
            return Err(AmgError::InvalidParameter {
                name: "gammas",
                detail: "schedule needs at least one tolerance".into(),
            });
        }
        Ok(DropSchedule {
            gammas,
            lumping,
            variant,
        })
    }

    /// Tolerance for `level`, repeating the last entry past the end.
    pub fn gamma_or_last(&self, level: usize) -> f64 {
        if level == 0 {
            return 0.0;
        }
        *self
            .gammas
            .get(level)
            .or(self.gammas.last())
            .expect("schedule is non-empty")
    }

    /// Schedule of exactly `levels` entries, padding with the last value.
    pub fn fitted(&self, levels: usize) -> DropSchedule {
        DropSchedule {
            gammas: (0..levels).map(|l| self.gamma_or_last(l)).collect(),
            ..self.clone()
        }
    }
}

/// Minimal pattern, keep set and lumping in one call.
///
/// `gamma = 0` returns `a_c` unchanged.
pub fn sparsify(
    a_c: &CsrMatrix,
    a_fine: &CsrMatrix,
    p: &CsrMatrix,
    p_inj: &CsrMatrix,
    s_lump: &StrengthMatrix,
    gamma: f64,
    lumping: Lumping,
) -> Result<(CsrMatrix, DeltaLog)> {
    pattern::check_gamma(gamma)?;
    if gamma == 0.0 {
        return Ok((a_c.clone(), DeltaLog::empty(0.0)));
    }
    let m = minimal_pattern(a_fine, p, p_inj)?;
    let keep = keep_set(a_c, &m, gamma)?;
    let (a_hat, mut log) = match lumping {
        Lumping::Diagonal => lump_diagonal(a_c, &keep),
        Lumping::Neighbors => lump_neighbors(a_c, &keep, s_lump),
    };
    log.gamma = gamma;
    Ok((a_hat, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation_and_padding() {
        assert!(DropSchedule::new(vec![0.0, 1.5], Lumping::Diagonal, Variant::Sparse).is_err());
        assert!(DropSchedule::new(vec![], Lumping::Diagonal, Variant::Sparse).is_err());
        let s = DropSchedule::new(vec![0.0, 0.01, 1.0], Lumping::Diagonal, Variant::Hybrid).unwrap();
        assert_eq!(s.fitted(5).gammas, vec![0.0, 0.01, 1.0, 1.0, 1.0]);
        assert_eq!(s.fitted(2).gammas, vec![0.0, 0.01]);
    }
}
