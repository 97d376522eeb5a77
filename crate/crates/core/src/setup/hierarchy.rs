use nalgebra::{DMatrix, DVector, LU};
use serde::Serialize;

use super::{cf_split, galerkin_product, interpolation_truncated, strength, CfSplitting, PointKind, StrengthMatrix};
use crate::error::{AmgError, Result};
use crate::sparse::CsrMatrix;
use crate::sparsify::{self, DeltaLog, DropSchedule, Lumping, Variant};

/// Parameters of the Galerkin setup phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SetupOptions {
    /// Stop coarsening once a level has at most this many rows.
    pub max_size: usize,
    pub theta_s: f64,
    pub max_levels: usize,
    /// Optional cap on interpolation weights per row.
    pub interp_max_per_row: Option<usize>,
}

impl Default for SetupOptions {
    fn default() -> Self {
        SetupOptions {
            max_size: 300,
            theta_s: 0.25,
            max_levels: 25,
            interp_max_per_row: None,
        }
    }
}

/// One level of the hierarchy.
#[derive(Debug, Clone)]
pub struct Level {
    pub(crate) a: CsrMatrix,
    pub(crate) a_hat: CsrMatrix,
    pub(crate) p: Option<CsrMatrix>,
    pub(crate) p_inj: Option<CsrMatrix>,
    pub(crate) restriction: Option<CsrMatrix>,
    pub(crate) strength: StrengthMatrix,
    pub(crate) gamma: f64,
    pub(crate) delta: DeltaLog,
}

impl Level {
    /// Operator as produced by the triple product (never sparsified).
    pub fn a(&self) -> &CsrMatrix {
        &self.a
    }

    /// Operator used for relaxation and residuals.
    pub fn a_hat(&self) -> &CsrMatrix {
        &self.a_hat
    }

    /// Interpolation to this level from the next coarser one.
    pub fn p(&self) -> Option<&CsrMatrix> {
        self.p.as_ref()
    }

    pub fn p_inj(&self) -> Option<&CsrMatrix> {
        self.p_inj.as_ref()
    }

    /// Cached `Pᵀ`.
    pub fn restriction(&self) -> Option<&CsrMatrix> {
        self.restriction.as_ref()
    }

    pub fn strength(&self) -> &StrengthMatrix {
        &self.strength
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> &DeltaLog {
        &self.delta
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

/// Dense LU factorization (partial pivoting) of the coarsest operator.
#[derive(Debug, Clone)]
pub struct CoarseSolver {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl CoarseSolver {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for (i, j, v) in a.triplets() {
            dense[(i, j)] = v;
        }
        let lu = dense.lu();
        if n > 0 && !lu.is_invertible() {
            return Err(AmgError::SingularCoarse);
        }
        Ok(CoarseSolver { lu, n })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(AmgError::DimensionMismatch {
                op: "coarse solve",
                detail: format!("rhs of length {} for a {} system", b.len(), self.n),
            });
        }
        if self.n == 0 {
            return Ok(Vec::new());
        }
        let rhs = DVector::from_column_slice(b);
        self.lu
            .solve(&rhs)
            .map(|x| x.as_slice().to_vec())
            .ok_or(AmgError::SingularCoarse)
    }
}

/// Which sparsification produced the active operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SparsifyMethod {
    pub variant: Variant,
    pub lumping: Lumping,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub n: usize,
    pub nnz: usize,
    pub nnz_per_row: f64,
}

/// AMG hierarchy holding Galerkin and active operators per level.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub(crate) levels: Vec<Level>,
    pub(crate) coarse: CoarseSolver,
    pub(crate) options: SetupOptions,
    pub(crate) method: Option<SparsifyMethod>,
    pub(crate) stalled: bool,
}

impl Hierarchy {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, l: usize) -> &Level {
        &self.levels[l]
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn options(&self) -> &SetupOptions {
        &self.options
    }

    pub fn method(&self) -> Option<SparsifyMethod> {
        self.method
    }

    /// True when coarsening stopped because a level could not be reduced.
    pub fn stalled(&self) -> bool {
        self.stalled
    }

    pub fn coarse_solver(&self) -> &CoarseSolver {
        &self.coarse
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.gamma).collect()
    }

    pub fn summary(&self, use_sparsified: bool) -> Vec<LevelSummary> {
        self.levels
            .iter()
            .enumerate()
            .map(|(level, lv)| {
                let a = if use_sparsified { &lv.a_hat } else { &lv.a };
                LevelSummary {
                    level,
                    n: a.nrows(),
                    nnz: a.nnz(),
                    nnz_per_row: if a.nrows() == 0 {
                        0.0
                    } else {
                        a.nnz() as f64 / a.nrows() as f64
                    },
                }
            })
            .collect()
    }

    pub(crate) fn refresh_coarse(&mut self) -> Result<()> {
        let last = self.levels.last().expect("hierarchy has a level");
        self.coarse = CoarseSolver::new(&last.a_hat)?;
        Ok(())
    }
}

/// Builds the Galerkin hierarchy. With `nongalerkin`, each new coarse
/// operator is sparsified before the next level is built from it.
pub fn amg_setup(
    a0: &CsrMatrix,
    options: &SetupOptions,
    nongalerkin: Option<&DropSchedule>,
) -> Result<Hierarchy> {
    if !a0.is_square() {
        return Err(AmgError::NotSquare {
            nrows: a0.nrows(),
            ncols: a0.ncols(),
        });
    }
    let tol = 1e-12 * a0.max_abs();
    let asym = a0.max_asymmetry()?;
    if asym > tol {
        return Err(AmgError::NotSymmetric {
            asymmetry: asym,
            tolerance: tol,
        });
    }
    if options.max_levels == 0 {
        return Err(AmgError::InvalidParameter {
            name: "max_levels",
            detail: "must be at least 1".into(),
        });
    }

    let mut levels: Vec<Level> = Vec::new();
    let mut stalled = false;
    let mut a = a0.clone();
    let mut a_hat = a0.clone();
    let mut gamma = 0.0;
    let mut delta = DeltaLog::empty(0.0);
    loop {
        let n = a_hat.nrows();
        let s = strength(&a_hat, options.theta_s)?;
        let at_bottom = n <= options.max_size || levels.len() + 1 >= options.max_levels;
        let split = if at_bottom {
            None
        } else {
            let split = demote_isolated(&a_hat, &s, cf_split(&s));
            let nc = split.n_coarse();
            if nc == n {
                log::warn!("coarsening stalled at level {} (n = {n})", levels.len());
                stalled = true;
            }
            (nc > 0 && nc < n).then_some(split)
        };
        let Some(split) = split else {
            levels.push(Level {
                a,
                a_hat,
                p: None,
                p_inj: None,
                restriction: None,
                strength: s,
                gamma,
                delta,
            });
            break;
        };

        let (p, p_inj) = interpolation_truncated(&a_hat, &s, &split, options.interp_max_per_row)?;
        let ac = galerkin_product(&a_hat, &p)?;
        let next_level = levels.len() + 1;
        let (ac_hat, next_gamma, next_delta) = match nongalerkin {
            Some(schedule) => {
                let g = schedule.gamma_or_last(next_level);
                let s_lump = strength(&ac, options.theta_s)?;
                let (ah, d) =
                    sparsify::sparsify(&ac, &a_hat, &p, &p_inj, &s_lump, g, schedule.lumping)?;
                (ah, g, d)
            }
            None => (ac.clone(), 0.0, DeltaLog::empty(0.0)),
        };
        let restriction = p.transpose();
        levels.push(Level {
            a,
            a_hat,
            p: Some(p),
            p_inj: Some(p_inj),
            restriction: Some(restriction),
            strength: s,
            gamma,
            delta,
        });
        a = ac;
        a_hat = ac_hat;
        gamma = next_gamma;
        delta = next_delta;
    }

    let coarse = CoarseSolver::new(&levels.last().expect("at least one level").a_hat)?;
    let method = nongalerkin.map(|s| SparsifyMethod {
        variant: Variant::NonGalerkin,
        lumping: s.lumping,
    });
    Ok(Hierarchy {
        levels,
        coarse,
        options: options.clone(),
        method,
        stalled,
    })
}

/// Rows with no off-diagonal entries that nobody depends on become F
/// points interpolated by zero.
fn demote_isolated(a: &CsrMatrix, s: &StrengthMatrix, split: CfSplitting) -> CfSplitting {
    let st = s.matrix().transpose();
    let mut labels = split.labels().to_vec();
    let mut changed = false;
    for (i, label) in labels.iter_mut().enumerate() {
        if *label == PointKind::Coarse
            && st.row(i).0.is_empty()
            && a.row(i).0.iter().all(|&j| j == i)
        {
            *label = PointKind::Fine;
            changed = true;
        }
    }
    if changed {
        CfSplitting::from_labels(labels)
    } else {
        split
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    #[test]
    fn small_matrix_gives_single_level() {
        let a = problems::poisson1d(10);
        let h = amg_setup(&a, &SetupOptions { max_size: 10, ..Default::default() }, None).unwrap();
        assert_eq!(h.num_levels(), 1);
        assert!(h.level(0).p().is_none());
    }

    #[test]
    fn rejects_nonsymmetric() {
        let a = CsrMatrix::from_dense(&[vec![2.0, -1.0], vec![0.0, 2.0]]);
        assert!(matches!(
            amg_setup(&a, &SetupOptions { max_size: 1, ..Default::default() }, None),
            Err(AmgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn sizes_decrease_and_levels_symmetric() {
        let a = problems::poisson3d_7pt(10, 10, 10).unwrap();
        let h = amg_setup(&a, &SetupOptions { max_size: 50, ..Default::default() }, None).unwrap();
        assert!(h.num_levels() >= 3);
        for w in h.levels().windows(2) {
            assert!(w[1].n() < w[0].n());
            assert_eq!(w[0].p().unwrap().ncols(), w[1].n());
        }
        for lv in h.levels() {
            assert!(lv.a().is_symmetric(0.0).unwrap());
            assert!(lv.a().bitwise_eq(lv.a_hat()));
        }
    }

    #[test]
    fn isolated_rows_are_fine_points() {
        let mut d = problems::poisson1d(8).to_dense();
        d[3] = vec![0.0; 8];
        for row in d.iter_mut() {
            row[3] = 0.0;
        }
        d[3][3] = 5.0;
        let a = CsrMatrix::from_dense(&d);
        let h = amg_setup(&a, &SetupOptions { max_size: 2, ..Default::default() }, None).unwrap();
        let p = h.level(0).p().unwrap();
        assert!(p.row(3).0.is_empty());
    }

    #[test]
    fn diagonal_matrix_is_single_level() {
        let a = CsrMatrix::identity(20);
        let h = amg_setup(&a, &SetupOptions { max_size: 5, ..Default::default() }, None).unwrap();
        assert_eq!(h.num_levels(), 1);
    }
}
