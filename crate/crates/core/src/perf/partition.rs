use std::ops::Range;

use serde::Serialize;

use crate::error::{AmgError, Result};
use crate::sparse::CsrMatrix;

/// Contiguous balanced row blocks; the first `n mod p` blocks get one
/// extra row.
pub fn partition_rows(n: usize, p: usize) -> Result<Vec<Range<usize>>> {
    if p == 0 {
        return Err(AmgError::InvalidParameter {
            name: "p",
            detail: "need at least one process".into(),
        });
    }
    let (base, extra) = (n / p, n % p);
    let mut start = 0;
    Ok((0..p)
        .map(|q| {
            let len = base + usize::from(q < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect())
}

/// Owner of row `j` under [`partition_rows`].
fn owner(j: usize, n: usize, p: usize) -> usize {
    let (base, extra) = (n / p, n % p);
    let big = extra * (base + 1);
    if j < big {
        j / (base + 1)
    } else {
        extra + (j - big) / base
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Message {
    pub peer: usize,
    pub words: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProcessStats {
    pub rows: Range<usize>,
    pub local_nnz: usize,
    /// Off-process vector values this process needs, grouped by owner.
    pub recv: Vec<Message>,
    /// Values this process ships to others (the transpose of `recv`).
    pub send: Vec<Message>,
}

impl ProcessStats {
    /// Modeled send count: the number of owners data is received from.
    pub fn sends(&self) -> usize {
        self.recv.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionStats {
    pub per_process: Vec<ProcessStats>,
    /// Mean nonzeros per process.
    pub nnz_p: f64,
    pub s_p_max: usize,
    /// Largest single message, in words.
    pub n_p_max: usize,
    pub total_words: usize,
}

/// Communication pattern of `y = A x` with rows and vector entries both
/// distributed by [`partition_rows`].
pub fn comm_stats(a: &CsrMatrix, p: usize) -> Result<PartitionStats> {
    if !a.is_square() {
        return Err(AmgError::NotSquare {
            nrows: a.nrows(),
            ncols: a.ncols(),
        });
    }
    let n = a.nrows();
    let ranges = partition_rows(n, p)?;
    let mut per_process: Vec<ProcessStats> = Vec::with_capacity(p);
    let mut seen = vec![usize::MAX; n];
    for (q, rows) in ranges.iter().enumerate() {
        let mut words = std::collections::BTreeMap::<usize, usize>::new();
        for i in rows.clone() {
            for &j in a.row(i).0 {
                if !rows.contains(&j) && seen[j] != q {
                    seen[j] = q;
                    *words.entry(owner(j, n, p)).or_default() += 1;
                }
            }
        }
        per_process.push(ProcessStats {
            rows: rows.clone(),
            local_nnz: a.rowptr()[rows.end] - a.rowptr()[rows.start],
            recv: words.into_iter().map(|(peer, words)| Message { peer, words }).collect(),
            send: Vec::new(),
        });
    }
    for q in 0..p {
        for m in per_process[q].recv.clone() {
            per_process[m.peer].send.push(Message { peer: q, words: m.words });
        }
    }
    let s_p_max = per_process.iter().map(|s| s.sends()).max().unwrap_or(0);
    let n_p_max = per_process
        .iter()
        .flat_map(|s| s.recv.iter().map(|m| m.words))
        .max()
        .unwrap_or(0);
    let total_words = per_process.iter().flat_map(|s| s.recv.iter().map(|m| m.words)).sum();
    Ok(PartitionStats {
        per_process,
        nnz_p: a.nnz() as f64 / p as f64,
        s_p_max,
        n_p_max,
        total_words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_sizes() {
        assert_eq!(partition_rows(8, 2).unwrap(), vec![0..4, 4..8]);
        let sizes: Vec<usize> = partition_rows(7, 3).unwrap().iter().map(|r| r.len()).collect();
        assert_eq!(sizes, vec![3, 2, 2]);
        let r = partition_rows(5, 8).unwrap();
        assert_eq!(r.iter().filter(|r| r.is_empty()).count(), 3);
        assert!(partition_rows(5, 0).is_err());
    }

    #[test]
    fn owner_matches_ranges() {
        for (n, p) in [(7, 3), (5, 8), (100, 7), (64, 64)] {
            for (q, r) in partition_rows(n, p).unwrap().iter().enumerate() {
                for j in r.clone() {
                    assert_eq!(owner(j, n, p), q);
                }
            }
        }
    }

    #[test]
    fn poisson_1d_two_processes() {
        let a = crate::problems::poisson1d(8);
        let s = comm_stats(&a, 2).unwrap();
        for ps in &s.per_process {
            assert_eq!(ps.recv.len(), 1);
            assert_eq!(ps.recv[0].words, 1);
            assert_eq!(ps.send, ps.recv);
        }
        assert_eq!((s.s_p_max, s.n_p_max, s.total_words), (1, 1, 2));
    }

    #[test]
    fn single_process_and_block_diagonal_are_silent() {
        let a = crate::problems::poisson2d_5pt(6, 6);
        let s = comm_stats(&a, 1).unwrap();
        assert_eq!((s.s_p_max, s.total_words), (0, 0));
        let block = CsrMatrix::from_dense(&[
            vec![2.0, -1.0, 0.0, 0.0],
            vec![-1.0, 2.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0, -1.0],
            vec![0.0, 0.0, -1.0, 2.0],
        ]);
        assert_eq!(comm_stats(&block, 2).unwrap().s_p_max, 0);
    }
}
