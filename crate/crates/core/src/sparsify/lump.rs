use super::{DeltaLog, DeltaRecord, Destination, SparsityPattern};
use crate::setup::StrengthMatrix;
use crate::sparse::CsrMatrix;

/// Row sums with `|Σ a_ij| <= ROW_SUM_ZERO_RTOL * Σ |a_ij|` count as zero
/// for the single-maximum retention rule of diagonal lumping.
pub const ROW_SUM_ZERO_RTOL: f64 = 1e-12;

/// Accumulator over a fixed pattern.
struct PatternValues<'a> {
    pattern: &'a SparsityPattern,
    rowptr: Vec<usize>,
    values: Vec<f64>,
}

impl<'a> PatternValues<'a> {
    fn new(pattern: &'a SparsityPattern, init: &CsrMatrix) -> Self {
        let mut rowptr = Vec::with_capacity(pattern.n() + 1);
        rowptr.push(0);
        let mut values = Vec::with_capacity(pattern.nnz());
        for i in 0..pattern.n() {
            for &j in pattern.row(i) {
                values.push(init.get(i, j));
            }
            rowptr.push(values.len());
        }
        PatternValues {
            pattern,
            rowptr,
            values,
        }
    }

    fn slot(&mut self, i: usize, j: usize) -> &mut f64 {
        let k = self
            .pattern
            .row(i)
            .binary_search(&j)
            .unwrap_or_else(|_| panic!("({i}, {j}) outside the keep pattern"));
        &mut self.values[self.rowptr[i] + k]
    }

    fn into_matrix(self) -> CsrMatrix {
        let n = self.pattern.n();
        let colind: Vec<usize> = (0..n).flat_map(|i| self.pattern.row(i).iter().copied()).collect();
        CsrMatrix::try_from_parts(n, n, self.rowptr, colind, self.values).expect("pattern is canonical")
    }
}

/// Lumps every entry of `a_c` outside `keep` onto strong neighbors.
///
/// A dropped `(i, j)` with value `v` is spread over
/// `W = {k : S(j, k) != 0, (i, k) ∈ keep}` with shares
/// `α_k = |S(j, k)| / Σ_{m∈W} |S(j, m)|`, applying
/// `(i,k) += α_k v`, `(k,i) += α_k v`, `(k,k) -= α_k v`.
/// Entries whose `W` is empty (under the incoming keep set) are kept
/// together with their mirrors instead.
pub fn lump_neighbors(a_c: &CsrMatrix, keep: &SparsityPattern, s_c: &StrengthMatrix) -> (CsrMatrix, DeltaLog) {
    let n = a_c.nrows();
    let lump_set = |keep: &SparsityPattern, i: usize, j: usize, out: &mut Vec<(usize, f64)>| {
        out.clear();
        let (cols, vals) = s_c.row(j);
        for (&k, &w) in cols.iter().zip(vals) {
            if w != 0.0 && keep.contains(i, k) {
                out.push((k, w.abs()));
            }
        }
    };

    let keep = keep.with_symmetric_edges(&missing_diagonals(keep, n));
    let mut w = Vec::new();
    let mut stranded = Vec::new();
    for (i, j, _) in a_c.triplets() {
        if i != j && !keep.contains(i, j) {
            lump_set(&keep, i, j, &mut w);
            if w.is_empty() {
                stranded.push((i, j));
            }
        }
    }
    let keep = keep.with_symmetric_edges(&stranded);

    let mut out = PatternValues::new(&keep, a_c);
    let mut log = DeltaLog::empty(0.0);
    for i in 0..n {
        let (cols, vals) = a_c.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if i == j || keep.contains(i, j) {
                continue;
            }
            lump_set(&keep, i, j, &mut w);
            let total: f64 = w.iter().map(|x| x.1).sum();
            let mut destinations = Vec::with_capacity(3 * w.len());
            for &(k, sk) in &w {
                let alpha = sk / total;
                *out.slot(i, k) += alpha * v;
                *out.slot(k, i) += alpha * v;
                *out.slot(k, k) -= alpha * v;
                destinations.push(Destination { row: i, col: k, fraction: alpha });
                destinations.push(Destination { row: k, col: i, fraction: alpha });
                destinations.push(Destination { row: k, col: k, fraction: -alpha });
            }
            log.records.push(DeltaRecord {
                row: i,
                col: j,
                value_removed: v,
                destinations,
            });
        }
    }
    (out.into_matrix().prune(0.0), log)
}

fn missing_diagonals(p: &SparsityPattern, n: usize) -> Vec<(usize, usize)> {
    (0..n).filter(|&i| !p.contains(i, i)).map(|i| (i, i)).collect()
}

/// Lumps every entry of `a_c` outside `keep` onto its row's diagonal.
///
/// In a row whose every off-diagonal is marked for removal and whose sum
/// is zero, the largest-magnitude off-diagonal (lowest column on ties) is
/// retained; retention is mirrored so symmetric input stays symmetric.
pub fn lump_diagonal(a_c: &CsrMatrix, keep: &SparsityPattern) -> (CsrMatrix, DeltaLog) {
    let n = a_c.nrows();
    let mut retained = Vec::new();
    for i in 0..n {
        let (cols, vals) = a_c.row(i);
        let mut any_off = false;
        let mut all_dropped = true;
        let mut best: Option<(usize, f64)> = None;
        let (mut sum, mut abs_sum) = (0.0, 0.0);
        for (&j, &v) in cols.iter().zip(vals) {
            sum += v;
            abs_sum += v.abs();
            if j == i {
                continue;
            }
            any_off = true;
            if keep.contains(i, j) {
                all_dropped = false;
            }
            if best.map_or(true, |(_, b)| v.abs() > b) {
                best = Some((j, v.abs()));
            }
        }
        if any_off && all_dropped && sum.abs() <= ROW_SUM_ZERO_RTOL * abs_sum {
            retained.push((i, best.expect("row has an off-diagonal").0));
        }
    }
    let keep = keep.with_symmetric_edges(&retained);

    let mut rowptr = Vec::with_capacity(n + 1);
    let mut colind = Vec::with_capacity(a_c.nnz());
    let mut values = Vec::with_capacity(a_c.nnz());
    rowptr.push(0);
    let mut log = DeltaLog::empty(0.0);
    for i in 0..n {
        let (cols, vals) = a_c.row(i);
        let mut diag = a_c.get(i, i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i && !keep.contains(i, j) {
                diag += v;
                log.records.push(DeltaRecord {
                    row: i,
                    col: j,
                    value_removed: v,
                    destinations: vec![Destination { row: i, col: i, fraction: 1.0 }],
                });
            }
        }
        let mut diag_written = false;
        for (&j, &v) in cols.iter().zip(vals) {
            if j > i && !diag_written {
                colind.push(i);
                values.push(diag);
                diag_written = true;
            }
            if j == i {
                colind.push(i);
                values.push(diag);
                diag_written = true;
            } else if keep.contains(i, j) {
                colind.push(j);
                values.push(v);
            }
        }
        if !diag_written {
            colind.push(i);
            values.push(diag);
        }
        rowptr.push(colind.len());
    }
    let out = CsrMatrix::try_from_parts(n, n, rowptr, colind, values).expect("canonical rows");
    (out, log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setup::strength;

    fn empty(n: usize) -> SparsityPattern {
        SparsityPattern::from_rows(n, vec![Vec::new(); n])
    }

    #[test]
    fn full_keep_set_is_identity() {
        let a = crate::problems::poisson2d_5pt(4, 4);
        let keep = SparsityPattern::of_matrix(&a);
        let s = strength(&a, 0.25).unwrap();
        let (an, log) = lump_neighbors(&a, &keep, &s);
        assert!(an.bitwise_eq(&a));
        assert!(log.is_empty());
        let (ad, log) = lump_diagonal(&a, &keep);
        assert!(ad.bitwise_eq(&a));
        assert!(log.is_empty());
    }

    #[test]
    fn diagonal_lumping_conserves_row_sum() {
        let a = CsrMatrix::from_dense(&[
            vec![4.0, -2.0, -0.2],
            vec![-2.0, 4.0, 0.0],
            vec![-0.2, 0.0, 4.0],
        ]);
        let keep = SparsityPattern::from_rows(3, vec![vec![0, 1], vec![0, 1], vec![2]]);
        let (ad, log) = lump_diagonal(&a, &keep);
        assert_eq!(ad.get(0, 0), 3.8);
        assert_eq!(ad.get(0, 2), 0.0);
        assert_eq!(ad.get(2, 2), 3.8);
        assert_eq!(log.len(), 2);
        for (x, y) in ad.row_sums().iter().zip(a.row_sums()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn single_neighbor_takes_everything() {
        // dropping (0,2): S(2, .) strong only to 1, and (0,1) is kept
        let a = CsrMatrix::from_dense(&[
            vec![4.0, -2.0, -0.5],
            vec![-2.0, 4.0, -2.0],
            vec![-0.5, -2.0, 4.0],
        ]);
        let s = strength(&a, 0.5).unwrap();
        assert_eq!(s.neighbors(2), &[1]);
        assert_eq!(s.neighbors(0), &[1]);
        let keep = SparsityPattern::from_rows(3, vec![vec![0, 1], vec![0, 1, 2], vec![1, 2]]);
        let (an, log) = lump_neighbors(&a, &keep, &s);
        let want = [[4.0, -2.5, 0.0], [-2.5, 5.0, -2.5], [0.0, -2.5, 4.0]];
        assert_eq!(an.to_dense(), want.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
        assert_eq!(log.len(), 2);
        assert_eq!(log.records[0].destinations.len(), 3);
    }

    #[test]
    fn stranded_entries_are_kept() {
        // positive couplings carry no strength, so nothing can absorb them
        let a = CsrMatrix::from_dense(&[vec![2.0, 0.1], vec![0.1, 2.0]]);
        let s = strength(&a, 0.25).unwrap();
        let (an, log) = lump_neighbors(&a, &empty(2), &s);
        assert!(an.bitwise_eq(&a));
        assert!(log.is_empty());
    }

    #[test]
    fn lumping_onto_own_row_through_mirror_strength() {
        let a = CsrMatrix::from_dense(&[vec![2.0, -0.1], vec![-0.1, 2.0]]);
        let s = strength(&a, 0.25).unwrap();
        let (an, log) = lump_neighbors(&a, &empty(2), &s);
        assert_eq!(log.len(), 2);
        assert_eq!(an.nnz(), 2);
        assert!((an.get(0, 0) - 1.9).abs() < 1e-15);
    }

    #[test]
    fn zero_row_sum_keeps_single_maximum() {
        let a = CsrMatrix::from_dense(&[
            vec![3.0, -2.0, -1.0, 0.0],
            vec![-2.0, 4.0, -1.0, -1.0],
            vec![-1.0, -1.0, 4.0, -1.0],
            vec![0.0, -1.0, -1.0, 3.0],
        ]);
        let (ad, _) = lump_diagonal(&a, &empty(4));
        // rows 0 and 1 sum to zero and share their maximum (0,1)
        assert_eq!(ad.get(0, 1), -2.0);
        assert_eq!(ad.get(1, 0), -2.0);
        assert_eq!(ad.get(0, 0), 2.0);
        assert_eq!(ad.get(1, 1), 2.0);
        assert_eq!(ad.nnz(), 6);
        assert!(ad.is_symmetric(0.0).unwrap());
    }
}
