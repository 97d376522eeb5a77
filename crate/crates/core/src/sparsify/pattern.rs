use crate::error::{AmgError, Result};
use crate::sparse::CsrMatrix;

/// Structural edge set stored as sorted rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    rowptr: Vec<usize>,
    colind: Vec<usize>,
}

impl SparsityPattern {
    /// Builds from per-row column lists (unsorted, duplicates allowed).
    pub fn from_rows(n: usize, mut rows: Vec<Vec<usize>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut rowptr = Vec::with_capacity(n + 1);
        let mut colind = Vec::new();
        rowptr.push(0);
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            colind.extend_from_slice(row);
            rowptr.push(colind.len());
        }
        SparsityPattern { n, rowptr, colind }
    }

    pub fn of_matrix(a: &CsrMatrix) -> Self {
        SparsityPattern {
            n: a.nrows(),
            rowptr: a.rowptr().to_vec(),
            colind: a.colind().to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.colind.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.colind[self.rowptr[i]..self.rowptr[i + 1]]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&j).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).iter().map(move |&j| (i, j)))
    }

    /// Adds the given edges together with their mirrors.
    pub fn with_symmetric_edges(&self, extra: &[(usize, usize)]) -> Self {
        if extra.is_empty() {
            return self.clone();
        }
        let mut rows: Vec<Vec<usize>> = (0..self.n).map(|i| self.row(i).to_vec()).collect();
        for &(i, j) in extra {
            rows[i].push(j);
            rows[j].push(i);
        }
        SparsityPattern::from_rows(self.n, rows)
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges().all(|(i, j)| self.contains(j, i))
    }

    pub fn is_subset_of(&self, other: &SparsityPattern) -> bool {
        self.n == other.n && self.edges().all(|(i, j)| other.contains(i, j))
    }
}

/// Minimal pattern `edges(P̂ᵀAP + PᵀAP̂)`, closed under transposition and
/// including every diagonal position.
pub fn minimal_pattern(a_fine: &CsrMatrix, p: &CsrMatrix, p_inj: &CsrMatrix) -> Result<SparsityPattern> {
    if p.nrows() != a_fine.ncols()
        || p_inj.nrows() != a_fine.ncols()
        || p.ncols() != p_inj.ncols()
        || !a_fine.is_square()
    {
        return Err(AmgError::DimensionMismatch {
            op: "minimal_pattern",
            detail: format!(
                "A is {}x{}, P is {}x{}, P_inj is {}x{}",
                a_fine.nrows(),
                a_fine.ncols(),
                p.nrows(),
                p.ncols(),
                p_inj.nrows(),
                p_inj.ncols()
            ),
        });
    }
    let left = p_inj.transpose().matmat(&a_fine.matmat(p)?)?;
    let right = p.transpose().matmat(&a_fine.matmat(p_inj)?)?;
    let nc = p.ncols();
    let mut rows: Vec<Vec<usize>> = (0..nc).map(|i| vec![i]).collect();
    for m in [&left, &right] {
        for (i, j, _) in m.triplets() {
            rows[i].push(j);
            rows[j].push(i);
        }
    }
    Ok(SparsityPattern::from_rows(nc, rows))
}

/// Keep set: every diagonal, every stored `(i, j)` in `m`, and every
/// stored `(i, j)` with `|a_ij| >= gamma * max_{k≠i} |a_ik|`; qualifying
/// edges are added together with their mirrors.
pub fn keep_set(a_c: &CsrMatrix, m: &SparsityPattern, gamma: f64) -> Result<SparsityPattern> {
    check_gamma(gamma)?;
    if !a_c.is_square() || m.n() != a_c.nrows() {
        return Err(AmgError::DimensionMismatch {
            op: "keep_set",
            detail: format!(
                "A_c is {}x{}, pattern has {} rows",
                a_c.nrows(),
                a_c.ncols(),
                m.n()
            ),
        });
    }
    let n = a_c.nrows();
    let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for i in 0..n {
        let (cols, vals) = a_c.row(i);
        let row_max = cols
            .iter()
            .zip(vals)
            .filter(|(&j, _)| j != i)
            .fold(0.0f64, |acc, (_, v)| acc.max(v.abs()));
        let cut = gamma * row_max;
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i && (m.contains(i, j) || v.abs() >= cut) {
                rows[i].push(j);
                rows[j].push(i);
            }
        }
    }
    Ok(SparsityPattern::from_rows(n, rows))
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(AmgError::InvalidParameter {
            name: "gamma",
            detail: format!("drop tolerance must lie in [0, 1], got {gamma}"),
        });
    }
    Ok(())
}
