#![allow(dead_code)]

use amg_oracle::Dense;
use amg_sparsify::CsrMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn dense(a: &CsrMatrix) -> Dense {
    amg_oracle::from_triplets(a.nrows(), a.ncols(), a.triplets())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random `m x n` matrix with about `density * m * n` entries in [-1, 1).
pub fn random_sparse(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.gen::<f64>() < density {
                t.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    CsrMatrix::from_triplets(m, n, &t).unwrap()
}

/// Random symmetric matrix with nonpositive off-diagonals and a diagonal
/// equal to the absolute off-diagonal row sum plus `slack * U[0, 1)`.
pub fn random_sdd(rng: &mut ChaCha8Rng, n: usize, density: f64, slack: f64) -> CsrMatrix {
    let mut t = Vec::new();
    let mut diag = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < density {
                let v = -rng.gen_range(0.01..1.0);
                t.push((i, j, v));
                t.push((j, i, v));
                diag[i] -= v;
                diag[j] -= v;
            }
        }
    }
    for (i, d) in diag.iter().enumerate() {
        t.push((i, i, d + slack * rng.gen::<f64>()));
    }
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

pub fn max_diff(a: &Dense, b: &Dense) -> f64 {
    amg_oracle::max_abs_diff(a, b)
}
