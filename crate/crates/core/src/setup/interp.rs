use super::{CfSplitting, StrengthMatrix};
use crate::error::{AmgError, Result};
use crate::sparse::CsrMatrix;

/// Direct interpolation `P` and injection `P̂` for a C/F splitting.
///
/// C rows of both operators are the unit vector at the coarse index. For
/// an F row `i` with strong C neighbors `C_i`,
/// `w_ij = -(a_ij / a_ii) * (Σ_{k≠i} a_ik / Σ_{k∈C_i} a_ik)`.
/// F rows without any strong connection interpolate from nothing.
pub fn interpolation(
    a: &CsrMatrix,
    s: &StrengthMatrix,
    split: &CfSplitting,
) -> Result<(CsrMatrix, CsrMatrix)> {
    interpolation_truncated(a, s, split, None)
}

/// As [`interpolation`], keeping at most `max_per_row` weights per F row
/// (largest magnitudes, lowest column on ties) rescaled to the original
/// row sum.
pub fn interpolation_truncated(
    a: &CsrMatrix,
    s: &StrengthMatrix,
    split: &CfSplitting,
    max_per_row: Option<usize>,
) -> Result<(CsrMatrix, CsrMatrix)> {
    let n = a.nrows();
    if split.len() != n || s.nrows() != n {
        return Err(AmgError::DimensionMismatch {
            op: "interpolation",
            detail: format!(
                "matrix has {n} rows, strength {} rows, splitting {} points",
                s.nrows(),
                split.len()
            ),
        });
    }
    let nc = split.n_coarse();
    let mut p_rowptr = vec![0];
    let mut p_col = Vec::new();
    let mut p_val = Vec::new();
    let mut inj = Vec::with_capacity(nc);
    let mut weights: Vec<(usize, f64)> = Vec::new();

    for i in 0..n {
        if let Some(ci) = split.coarse_index(i) {
            p_col.push(ci);
            p_val.push(1.0);
            inj.push((i, ci, 1.0));
            p_rowptr.push(p_col.len());
            continue;
        }
        let strong = s.neighbors(i);
        if strong.is_empty() {
            p_rowptr.push(p_col.len());
            continue;
        }
        let (cols, vals) = a.row(i);
        let mut diag = 0.0;
        let mut sum_all = 0.0;
        let mut sum_c = 0.0;
        weights.clear();
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                diag = v;
                continue;
            }
            sum_all += v;
            if let Some(cj) = split.coarse_index(j) {
                if s.is_strong(i, j) {
                    sum_c += v;
                    weights.push((cj, v));
                }
            }
        }
        if weights.is_empty() {
            return Err(AmgError::SplittingInvariant { row: i });
        }
        if diag == 0.0 {
            return Err(AmgError::ZeroDiagonal { row: i });
        }
        let scale = -sum_all / (diag * sum_c);
        for w in weights.iter_mut() {
            w.1 *= scale;
        }
        if let Some(max) = max_per_row {
            truncate_row(&mut weights, max);
        }
        weights.sort_by_key(|w| w.0);
        for &(cj, w) in &weights {
            p_col.push(cj);
            p_val.push(w);
        }
        p_rowptr.push(p_col.len());
    }
    let p = CsrMatrix::try_from_parts(n, nc, p_rowptr, p_col, p_val)?;
    let p_inj = CsrMatrix::from_triplets(n, nc, &inj)?;
    Ok((p, p_inj))
}

fn truncate_row(weights: &mut Vec<(usize, f64)>, max: usize) {
    if max == 0 || weights.len() <= max {
        return;
    }
    let total: f64 = weights.iter().map(|w| w.1).sum();
    weights.sort_by(|x, y| y.1.abs().total_cmp(&x.1.abs()).then(x.0.cmp(&y.0)));
    weights.truncate(max);
    let kept: f64 = weights.iter().map(|w| w.1).sum();
    if kept != 0.0 {
        let f = total / kept;
        for w in weights.iter_mut() {
            w.1 *= f;
        }
    }
}

/// Galerkin coarse operator `PᵀAP`.
///
/// When `A` is symmetric the product is checked for symmetry (relative
/// 1e-12) and then symmetrized exactly as `(C + Cᵀ) / 2`.
pub fn galerkin_product(a: &CsrMatrix, p: &CsrMatrix) -> Result<CsrMatrix> {
    if a.ncols() != p.nrows() || !a.is_square() {
        return Err(AmgError::DimensionMismatch {
            op: "galerkin_product",
            detail: format!(
                "A is {}x{}, P is {}x{}",
                a.nrows(),
                a.ncols(),
                p.nrows(),
                p.ncols()
            ),
        });
    }
    let ap = a.matmat(p)?;
    let c = p.transpose().matmat(&ap)?;
    let a_tol = 1e-12 * a.max_abs();
    if a.max_asymmetry()? > a_tol {
        return Ok(c);
    }
    let tol = 1e-12 * c.max_abs();
    let asym = c.max_asymmetry()?;
    if asym > tol {
        return Err(AmgError::NotSymmetric {
            asymmetry: asym,
            tolerance: tol,
        });
    }
    c.add_scaled(&c.transpose(), 0.5, 0.5)
}
