use serde::{Deserialize, Serialize};

use crate::error::{AmgError, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmootherKind {
    /// Forward then backward Gauss-Seidel per sweep.
    GaussSeidelSym,
    JacobiWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmootherSpec {
    pub kind: SmootherKind,
    pub sweeps: usize,
    /// Jacobi damping; ignored by Gauss-Seidel.
    pub weight: f64,
}

impl Default for SmootherSpec {
    fn default() -> Self {
        SmootherSpec {
            kind: SmootherKind::GaussSeidelSym,
            sweeps: 1,
            weight: 2.0 / 3.0,
        }
    }
}

impl SmootherSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(AmgError::InvalidParameter {
                name: "sweeps",
                detail: "at least one sweep is required".into(),
            });
        }
        if !(self.weight > 0.0 && self.weight <= 1.0) {
            return Err(AmgError::InvalidParameter {
                name: "weight",
                detail: format!("Jacobi weight must lie in (0, 1], got {}", self.weight),
            });
        }
        Ok(())
    }
}

/// Smooths `x` in place towards the solution of `A x = b`.
pub fn relax(a: &CsrMatrix, x: &mut [f64], b: &[f64], spec: &SmootherSpec) -> Result<()> {
    spec.validate()?;
    let n = a.nrows();
    if !a.is_square() || x.len() != n || b.len() != n {
        return Err(AmgError::DimensionMismatch {
            op: "relax",
            detail: format!(
                "A is {}x{}, x has {}, b has {}",
                a.nrows(),
                a.ncols(),
                x.len(),
                b.len()
            ),
        });
    }
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(AmgError::ZeroDiagonal { row });
    }
    match spec.kind {
        SmootherKind::GaussSeidelSym => {
            for _ in 0..spec.sweeps {
                for i in 0..n {
                    gs_row(a, x, b, &diag, i);
                }
                for i in (0..n).rev() {
                    gs_row(a, x, b, &diag, i);
                }
            }
        }
        SmootherKind::JacobiWeighted => {
            let mut r = vec![0.0; n];
            for _ in 0..spec.sweeps {
                a.residual_into(b, x, &mut r)?;
                for i in 0..n {
                    x[i] += spec.weight * r[i] / diag[i];
                }
            }
        }
    }
    Ok(())
}

#[inline]
fn gs_row(a: &CsrMatrix, x: &mut [f64], b: &[f64], diag: &[f64], i: usize) {
    let (cols, vals) = a.row(i);
    let mut s = b[i];
    for (&j, &v) in cols.iter().zip(vals) {
        if j != i {
            s -= v * x[j];
        }
    }
    x[i] = s / diag[i];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solves_in_one_sweep() {
        let a = CsrMatrix::identity(4);
        let b = [1.0, -2.0, 3.0, 0.5];
        for kind in [SmootherKind::GaussSeidelSym, SmootherKind::JacobiWeighted] {
            let mut x = vec![0.0; 4];
            let spec = SmootherSpec { kind, sweeps: 1, weight: 1.0 };
            relax(&a, &mut x, &b, &spec).unwrap();
            assert_eq!(x, b);
        }
    }

    #[test]
    fn exact_solution_is_a_fixed_point() {
        let a = crate::problems::poisson1d(6);
        let xs = vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
        let b = a.spmv(&xs).unwrap();
        let mut x = xs.clone();
        relax(&a, &mut x, &b, &SmootherSpec::default()).unwrap();
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_diagonal_rejected() {
        let a = CsrMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 2.0]]);
        let mut x = vec![0.0; 2];
        assert!(matches!(
            relax(&a, &mut x, &[1.0, 1.0], &SmootherSpec::default()),
            Err(AmgError::ZeroDiagonal { row: 0 })
        ));
    }
}
