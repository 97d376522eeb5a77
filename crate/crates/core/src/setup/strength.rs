use crate::error::{AmgError, Result};
use crate::sparse::CsrMatrix;

/// Classical strength-of-connection graph.
///
/// Stored values are `|a_ij|` for the strong edges; they double as the
/// weights used when lumping dropped entries onto strong neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthMatrix {
    matrix: CsrMatrix,
    threshold: f64,
}

impl StrengthMatrix {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Strong neighbors of `i` (the points `i` strongly depends on).
    pub fn neighbors(&self, i: usize) -> &[usize] {
        self.matrix.row(i).0
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        self.matrix.row(i)
    }

    pub fn is_strong(&self, i: usize, j: usize) -> bool {
        self.matrix.contains(i, j)
    }
}

/// Edge `(i, j)`, `j != i`, is strong when
/// `-a_ij >= theta_s * max_{k != i} (-a_ik)`; rows whose largest negated
/// off-diagonal is not positive have no strong edges.
pub fn strength(a: &CsrMatrix, theta_s: f64) -> Result<StrengthMatrix> {
    if !(0.0..=1.0).contains(&theta_s) {
        return Err(AmgError::InvalidParameter {
            name: "theta_s",
            detail: format!("must lie in [0, 1], got {theta_s}"),
        });
    }
    if !a.is_square() {
        return Err(AmgError::NotSquare {
            nrows: a.nrows(),
            ncols: a.ncols(),
        });
    }
    let n = a.nrows();
    let mut rowptr = Vec::with_capacity(n + 1);
    let mut colind = Vec::new();
    let mut values = Vec::new();
    rowptr.push(0);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let max_neg = cols
            .iter()
            .zip(vals)
            .filter(|(&j, _)| j != i)
            .map(|(_, &v)| -v)
            .fold(f64::NEG_INFINITY, f64::max);
        if max_neg > 0.0 {
            let cut = theta_s * max_neg;
            for (&j, &v) in cols.iter().zip(vals) {
                if j != i && -v >= cut && v != 0.0 {
                    colind.push(j);
                    values.push(v.abs());
                }
            }
        }
        rowptr.push(colind.len());
    }
    let matrix = CsrMatrix::try_from_parts(n, n, rowptr, colind, values)?;
    Ok(StrengthMatrix {
        matrix,
        threshold: theta_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_off_diagonals_are_strong() {
        let a = crate::problems::poisson1d(3);
        let s = strength(&a, 0.25).unwrap();
        assert_eq!(s.neighbors(1), &[0, 2]);
        assert_eq!(s.row(1).1, &[1.0, 1.0]);
    }

    #[test]
    fn weak_entry_excluded() {
        let a = CsrMatrix::from_dense(&[
            vec![5.0, -4.0, -0.2],
            vec![-4.0, 5.0, 0.0],
            vec![-0.2, 0.0, 5.0],
        ]);
        let s = strength(&a, 0.25).unwrap();
        assert_eq!(s.neighbors(0), &[1]);
        assert_eq!(s.neighbors(2), &[0]);
    }

    #[test]
    fn positive_rows_have_no_strong_edges() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert_eq!(strength(&a, 0.25).unwrap().matrix().nnz(), 0);
    }

    #[test]
    fn threshold_validated() {
        let a = CsrMatrix::identity(2);
        assert!(strength(&a, 1.5).is_err());
        assert!(strength(&a, -0.1).is_err());
    }

    #[test]
    fn anisotropic_strong_only_along_x() {
        let a = crate::problems::aniso2d_9pt(5, 5, 0.0, 0.001).unwrap();
        let s = strength(&a, 0.25).unwrap();
        let c = 2 + 5 * 2;
        // x couplings -(2 - eps)/3, diagonal -(1 + eps)/6, vertical
        // (1 - 2 eps)/3 > 0: the diagonals clear 0.25 by a hair
        // ((1 + eps) / (4 - 2 eps) = 0.2503), the vertical ones never do
        assert_eq!(s.neighbors(c), &[c - 6, c - 4, c - 1, c + 1, c + 4, c + 6]);
        let s = strength(&a, 0.3).unwrap();
        assert_eq!(s.neighbors(c), &[c - 1, c + 1]);
    }
}
