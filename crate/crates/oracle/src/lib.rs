//! Dense reference implementations used as test oracles.
//!
//! Everything here works on `nalgebra::DMatrix<f64>` and is written
//! independently of the sparse library: no shared code, no shared
//! constants. Speed is irrelevant; clarity is the point.

use nalgebra::{DMatrix, DVector};

pub type Dense = DMatrix<f64>;

/// Dense matrix from `(row, col, value)` triplets, summing duplicates.
pub fn from_triplets(nrows: usize, ncols: usize, t: impl IntoIterator<Item = (usize, usize, f64)>) -> Dense {
    let mut m = Dense::zeros(nrows, ncols);
    for (i, j, v) in t {
        m[(i, j)] += v;
    }
    m
}

pub fn from_rows(rows: &[Vec<f64>]) -> Dense {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Dense::from_fn(n, m, |i, j| rows[i][j])
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(a: &Dense) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn two_norm_sym(a: &Dense) -> f64 {
    sym_eigenvalues(a).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Finite-difference and finite-element model problems by Kronecker
/// products of 1D matrices.
pub mod fem {
    use super::Dense;

    /// 1D matrices on `m` equispaced nodes with unit spacing, assembled
    /// from linear elements: stiffness `∫φ'φ'`, mass `∫φφ` and the
    /// mixed `C[a][b] = ∫φ_a' φ_b`.
    fn assemble_1d(m: usize) -> (Dense, Dense, Dense) {
        let ke = [[1.0, -1.0], [-1.0, 1.0]];
        let me = [[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]];
        let ce = [[-0.5, -0.5], [0.5, 0.5]];
        let (mut k, mut mm, mut c) = (Dense::zeros(m, m), Dense::zeros(m, m), Dense::zeros(m, m));
        for e in 0..m - 1 {
            for a in 0..2 {
                for b in 0..2 {
                    k[(e + a, e + b)] += ke[a][b];
                    mm[(e + a, e + b)] += me[a][b];
                    c[(e + a, e + b)] += ce[a][b];
                }
            }
        }
        (k, mm, c)
    }

    /// Interior block of a matrix on `(n + 2)` nodes per axis.
    fn interior(full: &Dense, dims: &[usize]) -> Dense {
        let total: Vec<usize> = dims.iter().map(|d| d + 2).collect();
        let mut keep = Vec::new();
        let count: usize = total.iter().product();
        for idx in 0..count {
            let mut rest = idx;
            let mut inside = true;
            for &t in &total {
                let c = rest % t;
                rest /= t;
                inside &= c >= 1 && c + 1 < t;
            }
            if inside {
                keep.push(idx);
            }
        }
        Dense::from_fn(keep.len(), keep.len(), |i, j| full[(keep[i], keep[j])])
    }

    /// Kronecker product in x-fastest ordering: `kron3(z, y, x)`.
    fn kron3(z: &Dense, y: &Dense, x: &Dense) -> Dense {
        z.kronecker(&y.kronecker(x))
    }

    /// `tridiag(-1, 2, -1)` on `n` points.
    pub fn laplace_1d(n: usize) -> Dense {
        Dense::from_fn(n, n, |i, j| {
            if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        })
    }

    pub fn poisson3d_7pt(nx: usize, ny: usize, nz: usize) -> Dense {
        let (lx, ly, lz) = (laplace_1d(nx), laplace_1d(ny), laplace_1d(nz));
        let (ix, iy, iz) = (Dense::identity(nx, nx), Dense::identity(ny, ny), Dense::identity(nz, nz));
        kron3(&iz, &iy, &lx) + kron3(&iz, &ly, &ix) + kron3(&lz, &iy, &ix)
    }

    pub fn poisson3d_27pt(nx: usize, ny: usize, nz: usize) -> Dense {
        let (kx, mx, _) = assemble_1d(nx + 2);
        let (ky, my, _) = assemble_1d(ny + 2);
        let (kz, mz, _) = assemble_1d(nz + 2);
        let full = kron3(&mz, &my, &kx) + kron3(&mz, &ky, &mx) + kron3(&kz, &my, &mx);
        interior(&full, &[nx, ny, nz])
    }

    /// `-∇·K∇` with `K = QᵀDQ`, `Q = [[c, s], [-s, c]]`, `D = diag(1, eps)`.
    pub fn aniso2d_9pt(nx: usize, ny: usize, theta: f64, eps: f64) -> Dense {
        let (c, s) = (theta.cos(), theta.sin());
        // QᵀDQ written out by hand
        let k11 = c * c + eps * s * s;
        let k22 = s * s + eps * c * c;
        let k12 = c * s - eps * s * c;
        let (kx, mx, cx) = assemble_1d(nx + 2);
        let (ky, my, cy) = assemble_1d(ny + 2);
        let full = my.kronecker(&kx) * k11
            + ky.kronecker(&mx) * k22
            + cy.transpose().kronecker(&cx) * k12
            + cy.kronecker(&cx.transpose()) * k12;
        interior(&full, &[nx, ny])
    }
}

/// Classical AMG building blocks, dense.
pub mod amg {
    use super::Dense;

    /// `strong[i][j]` iff `-a_ij >= theta * max_{k != i} -a_ik` with a
    /// positive row maximum.
    pub fn strength(a: &Dense, theta: f64) -> Vec<Vec<bool>> {
        let n = a.nrows();
        (0..n)
            .map(|i| {
                let mx = (0..n).filter(|&k| k != i).map(|k| -a[(i, k)]).fold(f64::NEG_INFINITY, f64::max);
                (0..n)
                    .map(|j| j != i && mx > 0.0 && a[(i, j)] != 0.0 && -a[(i, j)] >= theta * mx)
                    .collect()
            })
            .collect()
    }

    /// Direct interpolation and injection for a given C/F labelling.
    pub fn direct_interpolation(a: &Dense, strong: &[Vec<bool>], coarse: &[bool]) -> (Dense, Dense) {
        let n = a.nrows();
        let cidx: Vec<Option<usize>> = {
            let mut next = 0;
            coarse
                .iter()
                .map(|&c| {
                    c.then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        let nc = coarse.iter().filter(|&&c| c).count();
        let mut p = Dense::zeros(n, nc);
        let mut inj = Dense::zeros(n, nc);
        for i in 0..n {
            if let Some(ci) = cidx[i] {
                p[(i, ci)] = 1.0;
                inj[(i, ci)] = 1.0;
                continue;
            }
            let all: f64 = (0..n).filter(|&k| k != i).map(|k| a[(i, k)]).sum();
            let cs: f64 = (0..n).filter(|&k| coarse[k] && strong[i][k]).map(|k| a[(i, k)]).sum();
            if cs == 0.0 {
                continue;
            }
            for k in 0..n {
                if coarse[k] && strong[i][k] {
                    p[(i, cidx[k].unwrap())] = -a[(i, k)] / a[(i, i)] * all / cs;
                }
            }
        }
        (p, inj)
    }

    pub fn galerkin(a: &Dense, p: &Dense) -> Dense {
        p.transpose() * a * p
    }
}

/// Coarse-operator sparsification, dense.
pub mod sparsify {
    use super::Dense;

    pub type Pattern = Vec<Vec<bool>>;

    /// Nonzero positions of `P̂ᵀAP + PᵀAP̂` (as two separate products so
    /// cancellation between them cannot hide an edge), symmetrized, with
    /// the diagonal.
    pub fn minimal_pattern(a: &Dense, p: &Dense, inj: &Dense) -> Pattern {
        let l = inj.transpose() * a * p;
        let r = p.transpose() * a * inj;
        let n = p.ncols();
        let mut m = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                if l[(i, j)] != 0.0 || r[(i, j)] != 0.0 {
                    m[i][j] = true;
                    m[j][i] = true;
                }
            }
            m[i][i] = true;
        }
        m
    }

    pub fn keep_set(ac: &Dense, m: &Pattern, gamma: f64) -> Pattern {
        let n = ac.nrows();
        let mut keep = vec![vec![false; n]; n];
        for i in 0..n {
            keep[i][i] = true;
            let mx = (0..n).filter(|&k| k != i).map(|k| ac[(i, k)].abs()).fold(0.0, f64::max);
            for j in 0..n {
                if j != i && ac[(i, j)] != 0.0 && (m[i][j] || ac[(i, j)].abs() >= gamma * mx) {
                    keep[i][j] = true;
                    keep[j][i] = true;
                }
            }
        }
        keep
    }

    pub fn lump_diagonal(ac: &Dense, keep: &Pattern) -> Dense {
        let n = ac.nrows();
        let mut keep = keep.clone();
        for i in 0..n {
            let offs: Vec<usize> = (0..n).filter(|&j| j != i && ac[(i, j)] != 0.0).collect();
            if offs.is_empty() || offs.iter().any(|&j| keep[i][j]) {
                continue;
            }
            let sum: f64 = (0..n).map(|j| ac[(i, j)]).sum();
            let abs: f64 = (0..n).map(|j| ac[(i, j)].abs()).sum();
            if sum.abs() <= 1e-12 * abs {
                // first index attaining the maximum magnitude
                let mut best = offs[0];
                for &j in &offs {
                    if ac[(i, j)].abs() > ac[(i, best)].abs() {
                        best = j;
                    }
                }
                keep[i][best] = true;
                keep[best][i] = true;
            }
        }
        let mut out = ac.clone();
        for i in 0..n {
            for j in 0..n {
                if j != i && ac[(i, j)] != 0.0 && !keep[i][j] {
                    out[(i, i)] += ac[(i, j)];
                    out[(i, j)] = 0.0;
                }
            }
        }
        out
    }

    /// Strong-neighbor lumping with lumping weights from the strength of
    /// `ac` at `theta`.
    pub fn lump_neighbors(ac: &Dense, keep: &Pattern, theta: f64) -> Dense {
        let n = ac.nrows();
        let strong = super::amg::strength(ac, theta);
        let w = |keep: &Pattern, i: usize, j: usize| -> Vec<usize> {
            (0..n).filter(|&k| strong[j][k] && keep[i][k]).collect()
        };
        let mut keep = keep.clone();
        for i in 0..n {
            keep[i][i] = true;
        }
        let snapshot = keep.clone();
        for i in 0..n {
            for j in 0..n {
                if j != i && ac[(i, j)] != 0.0 && !snapshot[i][j] && w(&snapshot, i, j).is_empty() {
                    keep[i][j] = true;
                    keep[j][i] = true;
                }
            }
        }
        let mut out = ac.clone();
        for i in 0..n {
            for j in 0..n {
                if j == i || ac[(i, j)] == 0.0 || keep[i][j] {
                    continue;
                }
                let v = ac[(i, j)];
                out[(i, j)] -= v;
                let ks = w(&keep, i, j);
                let total: f64 = ks.iter().map(|&k| ac[(j, k)].abs()).sum();
                for k in ks {
                    let share = ac[(j, k)].abs() / total * v;
                    out[(i, k)] += share;
                    out[(k, i)] += share;
                    out[(k, k)] -= share;
                }
            }
        }
        out
    }
}

/// Relaxation and two-grid error propagation, dense.
pub mod twogrid {
    use super::{DVector, Dense};

    /// Forward then backward Gauss-Seidel by triangular solves.
    pub fn sym_gauss_seidel(a: &Dense, x: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let lower = a.lower_triangle();
        let upper = a.upper_triangle();
        let x1 = x + lower.solve_lower_triangular(&(b - a * x)).expect("nonzero diagonal");
        &x1 + upper.solve_upper_triangular(&(b - a * &x1)).expect("nonzero diagonal")
    }

    /// Error propagation of one symmetric Gauss-Seidel sweep.
    pub fn sym_gauss_seidel_operator(a: &Dense) -> Dense {
        let n = a.nrows();
        let i = Dense::identity(n, n);
        let fwd = &i - a.lower_triangle().try_inverse().expect("nonsingular") * a;
        let bwd = &i - a.upper_triangle().try_inverse().expect("nonsingular") * a;
        bwd * fwd
    }

    /// `S (I - P Ac⁻¹ Pᵀ A) S` with `S` one symmetric Gauss-Seidel sweep.
    pub fn two_grid_operator(a: &Dense, p: &Dense, ac: &Dense) -> Dense {
        let n = a.nrows();
        let s = sym_gauss_seidel_operator(a);
        let cgc = Dense::identity(n, n) - p * ac.clone().try_inverse().expect("nonsingular") * p.transpose() * a;
        &s * cgc * &s
    }
}

/// Communication volume of a distributed SpMV by exhaustive enumeration.
pub mod comm {
    use std::collections::{BTreeMap, BTreeSet};

    /// Block sizes: the first `n mod p` blocks take one extra row.
    pub fn owners(n: usize, p: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        for q in 0..p {
            let len = n / p + usize::from(q < n % p);
            out.extend(std::iter::repeat(q).take(len));
        }
        out
    }

    /// For each process, `peer -> words` it must receive, from every
    /// `(row, col)` pair of the pattern.
    pub fn receives(entries: &[(usize, usize)], n: usize, p: usize) -> Vec<BTreeMap<usize, usize>> {
        let own = owners(n, p);
        let mut needed: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); p];
        for &(i, j) in entries {
            if own[i] != own[j] {
                needed[own[i]].insert(j);
            }
        }
        needed
            .into_iter()
            .map(|cols| {
                let mut m = BTreeMap::new();
                for j in cols {
                    *m.entry(own[j]).or_insert(0) += 1;
                }
                m
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q1_laplacian_center_and_row_sum() {
        let a = fem::poisson3d_27pt(3, 3, 3);
        let c = 13;
        assert!((a[(c, c)] - 8.0 / 3.0).abs() < 1e-14);
        assert!(a.row(c).sum().abs() < 1e-14);
        let b = fem::aniso2d_9pt(3, 3, 0.0, 1.0);
        assert!((b[(4, 4)] - 8.0 / 3.0).abs() < 1e-14);
        assert!((b[(4, 0)] + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn seven_point_counts() {
        let a = fem::poisson3d_7pt(4, 4, 4);
        let nnz = a.iter().filter(|v| **v != 0.0).count();
        assert_eq!(nnz, 7 * 64 - 6 * 16);
    }

    #[test]
    fn owners_are_balanced() {
        assert_eq!(comm::owners(7, 3), vec![0, 0, 0, 1, 1, 2, 2]);
    }
}
