use crate::error::{AmgError, Result};

/// Compressed sparse row matrix of `f64` values.
///
/// Canonical form: column indices strictly increasing within each row and
/// no explicitly stored zeros. Every constructor and operation in this
/// module returns canonical matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    rowptr: Vec<usize>,
    colind: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, validating structure and
    /// dropping explicitly stored zeros.
    pub fn try_from_parts(
        nrows: usize,
        ncols: usize,
        rowptr: Vec<usize>,
        colind: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if rowptr.len() != nrows + 1 {
            return Err(AmgError::InvalidStructure(format!(
                "rowptr has length {}, expected {}",
                rowptr.len(),
                nrows + 1
            )));
        }
        if rowptr[0] != 0 {
            return Err(AmgError::InvalidStructure("rowptr[0] != 0".into()));
        }
        if colind.len() != values.len() || rowptr[nrows] != colind.len() {
            return Err(AmgError::InvalidStructure(format!(
                "rowptr[nrows]={} but {} column indices and {} values",
                rowptr[nrows],
                colind.len(),
                values.len()
            )));
        }
        for i in 0..nrows {
            let (lo, hi) = (rowptr[i], rowptr[i + 1]);
            if hi < lo {
                return Err(AmgError::InvalidStructure(format!(
                    "rowptr decreases at row {i}"
                )));
            }
            for k in lo..hi {
                if colind[k] >= ncols {
                    return Err(AmgError::InvalidStructure(format!(
                        "column {} out of bounds in row {i} (ncols={ncols})",
                        colind[k]
                    )));
                }
                if k > lo && colind[k] <= colind[k - 1] {
                    return Err(AmgError::InvalidStructure(format!(
                        "columns not strictly increasing in row {i}"
                    )));
                }
            }
        }
        let m = CsrMatrix {
            nrows,
            ncols,
            rowptr,
            colind,
            values,
        };
        Ok(m.prune(0.0))
    }

    /// Builds from (row, col, value) triplets. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            if i >= nrows || j >= ncols {
                return Err(AmgError::InvalidStructure(format!(
                    "triplet ({i}, {j}) outside {nrows}x{ncols}"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            entries[next[i]] = (j, v);
            next[i] += 1;
        }
        let mut rowptr = Vec::with_capacity(nrows + 1);
        let mut colind = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        rowptr.push(0);
        for i in 0..nrows {
            let row = &mut entries[counts[i]..counts[i + 1]];
            // stable sort keeps insertion order for duplicate summation
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    colind.push(j);
                    values.push(v);
                }
            }
            rowptr.push(colind.len());
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            rowptr,
            colind,
            values,
        })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            rowptr: vec![0; nrows + 1],
            colind: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            rowptr: (0..=n).collect(),
            colind: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from a dense row-major array; zeros are not stored.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut rowptr = vec![0];
        let mut colind = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged dense input");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    colind.push(j);
                    values.push(v);
                }
            }
            rowptr.push(colind.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            rowptr,
            colind,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        d
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.colind.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn rowptr(&self) -> &[usize] {
        &self.rowptr
    }

    pub fn colind(&self) -> &[usize] {
        &self.colind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.rowptr[i], self.rowptr[i + 1]);
        (&self.colind[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at `(i, j)`, or zero.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).0.binary_search(&j).is_ok()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Drops entries with `|v| <= eps`. With `eps = 0` only exact zeros go.
    pub fn prune(mut self, eps: f64) -> Self {
        if self.values.iter().all(|v| v.abs() > eps) {
            return self;
        }
        let mut w = 0;
        let mut lo = 0;
        for i in 0..self.nrows {
            let hi = self.rowptr[i + 1];
            for k in lo..hi {
                if self.values[k].abs() > eps {
                    self.colind[w] = self.colind[k];
                    self.values[w] = self.values[k];
                    w += 1;
                }
            }
            lo = hi;
            self.rowptr[i + 1] = w;
        }
        self.colind.truncate(w);
        self.values.truncate(w);
        self
    }

    /// `y = A x`, accumulated per row in ascending column order.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols || y.len() != self.nrows {
            return Err(AmgError::DimensionMismatch {
                op: "spmv",
                detail: format!(
                    "{}x{} matrix, x of length {}, y of length {}",
                    self.nrows,
                    self.ncols,
                    x.len(),
                    y.len()
                ),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                s += v * x[j];
            }
            *yi = s;
        }
        Ok(())
    }

    /// `r = b - A x`.
    pub fn residual_into(&self, b: &[f64], x: &[f64], r: &mut [f64]) -> Result<()> {
        self.spmv_into(x, r)?;
        if b.len() != self.nrows {
            return Err(AmgError::DimensionMismatch {
                op: "residual",
                detail: format!("b has length {}, expected {}", b.len(), self.nrows),
            });
        }
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        Ok(())
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.colind {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut colind = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                colind[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            rowptr: counts,
            colind,
            values,
        }
    }

    /// Sparse product `A B`. Exact zeros from cancellation are dropped.
    pub fn matmat(&self, b: &CsrMatrix) -> Result<CsrMatrix> {
        if self.ncols != b.nrows {
            return Err(AmgError::DimensionMismatch {
                op: "matmat",
                detail: format!(
                    "{}x{} times {}x{}",
                    self.nrows, self.ncols, b.nrows, b.ncols
                ),
            });
        }
        let mut acc = vec![0.0; b.ncols];
        let mut marker = vec![usize::MAX; b.ncols];
        let mut row_cols: Vec<usize> = Vec::new();
        let mut rowptr = Vec::with_capacity(self.nrows + 1);
        let mut colind = Vec::new();
        let mut values = Vec::new();
        rowptr.push(0);
        for i in 0..self.nrows {
            row_cols.clear();
            let (acols, avals) = self.row(i);
            for (&k, &a) in acols.iter().zip(avals) {
                let (bcols, bvals) = b.row(k);
                for (&j, &bv) in bcols.iter().zip(bvals) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = a * bv;
                        row_cols.push(j);
                    } else {
                        acc[j] += a * bv;
                    }
                }
            }
            row_cols.sort_unstable();
            for &j in &row_cols {
                if acc[j] != 0.0 {
                    colind.push(j);
                    values.push(acc[j]);
                }
            }
            rowptr.push(colind.len());
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: b.ncols,
            rowptr,
            colind,
            values,
        })
    }

    /// `sa * A + sb * B`.
    pub fn add_scaled(&self, b: &CsrMatrix, sa: f64, sb: f64) -> Result<CsrMatrix> {
        if self.nrows != b.nrows || self.ncols != b.ncols {
            return Err(AmgError::DimensionMismatch {
                op: "add_scaled",
                detail: format!(
                    "{}x{} plus {}x{}",
                    self.nrows, self.ncols, b.nrows, b.ncols
                ),
            });
        }
        let mut rowptr = Vec::with_capacity(self.nrows + 1);
        let mut colind = Vec::with_capacity(self.nnz() + b.nnz());
        let mut values = Vec::with_capacity(self.nnz() + b.nnz());
        rowptr.push(0);
        for i in 0..self.nrows {
            let mut push = |j: usize, v: f64| {
                if v != 0.0 {
                    colind.push(j);
                    values.push(v);
                }
            };
            let (ac, av) = self.row(i);
            let (bc, bv) = b.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                if q == bc.len() || (p < ac.len() && ac[p] < bc[q]) {
                    push(ac[p], sa * av[p]);
                    p += 1;
                } else if p == ac.len() || bc[q] < ac[p] {
                    push(bc[q], sb * bv[q]);
                    q += 1;
                } else {
                    push(ac[p], sa * av[p] + sb * bv[q]);
                    p += 1;
                    q += 1;
                }
            }
            rowptr.push(colind.len());
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            rowptr,
            colind,
            values,
        })
    }

    /// Largest `|A_ij - A_ji|` over stored entries and their mirrors.
    pub fn max_asymmetry(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(AmgError::NotSquare {
                nrows: self.nrows,
                ncols: self.ncols,
            });
        }
        let mut worst = 0.0f64;
        for (i, j, v) in self.triplets() {
            worst = worst.max((v - self.get(j, i)).abs());
        }
        Ok(worst)
    }

    pub fn is_symmetric(&self, tol: f64) -> Result<bool> {
        Ok(self.max_asymmetry()? <= tol)
    }

    /// True when both matrices store exactly the same positions.
    pub fn same_pattern(&self, other: &CsrMatrix) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.rowptr == other.rowptr
            && self.colind == other.colind
    }

    /// Bitwise equality of structure and values (distinguishes `-0.0`).
    pub fn bitwise_eq(&self, other: &CsrMatrix) -> bool {
        self.same_pattern(other)
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).1.iter().sum()).collect()
    }
}
