//! Model problem generators.
//!
//! Finite-element operators are assembled from element matrices computed
//! by tensor-product Simpson quadrature. Simpson's rule integrates the
//! products of (bi/tri)linear basis functions and their gradients exactly,
//! and with integer-scaled weights the 3D Laplacian element matrix is
//! accumulated without rounding. Dirichlet boundary nodes are eliminated,
//! unknowns are the interior grid nodes in lexicographic order (x fastest).

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{AmgError, Result};
use crate::sparse::{read_matrix_market, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Poisson3d7pt,
    Poisson3d27pt,
    Aniso2d9pt,
    FromFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Interior nodes per axis (3 entries for 3D kinds, 2 for 2D).
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn default_theta() -> f64 {
    PI / 8.0
}

fn default_epsilon() -> f64 {
    0.001
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        let want = match self.kind {
            ProblemKind::Poisson3d7pt | ProblemKind::Poisson3d27pt => 3,
            ProblemKind::Aniso2d9pt => 2,
            ProblemKind::FromFile => {
                if self.path.is_none() {
                    return Err(AmgError::InvalidParameter {
                        name: "path",
                        detail: "from_file problems need a Matrix Market path".into(),
                    });
                }
                return Ok(());
            }
        };
        if self.dims.len() != want {
            return Err(AmgError::InvalidParameter {
                name: "dims",
                detail: format!("expected {want} grid dimensions, got {}", self.dims.len()),
            });
        }
        check_dims(&self.dims)?;
        if self.kind == ProblemKind::Aniso2d9pt {
            check_aniso(self.theta, self.epsilon)?;
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<CsrMatrix> {
        self.validate()?;
        let d = &self.dims;
        match self.kind {
            ProblemKind::Poisson3d7pt => poisson3d_7pt(d[0], d[1], d[2]),
            ProblemKind::Poisson3d27pt => poisson3d_27pt(d[0], d[1], d[2]),
            ProblemKind::Aniso2d9pt => aniso2d_9pt(d[0], d[1], self.theta, self.epsilon),
            ProblemKind::FromFile => read_matrix_market(self.path.as_ref().expect("validated")),
        }
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(AmgError::InvalidParameter {
            name: "dims",
            detail: format!("every grid dimension must be >= 2, got {d}"),
        });
    }
    Ok(())
}

fn check_aniso(theta: f64, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(AmgError::InvalidParameter {
            name: "epsilon",
            detail: format!("must be positive, got {epsilon}"),
        });
    }
    if !(0.0..2.0 * PI).contains(&theta) {
        return Err(AmgError::InvalidParameter {
            name: "theta",
            detail: format!("must lie in [0, 2pi), got {theta}"),
        });
    }
    Ok(())
}

/// 1D Laplacian `tridiag(-1, 2, -1)` of size `n`.
pub fn poisson1d(n: usize) -> CsrMatrix {
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, -1.0));
        }
        t.push((i, i, 2.0));
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
        }
    }
    CsrMatrix::from_triplets(n, n, &t).expect("indices in range")
}

/// 2D five-point Laplacian on an `nx` by `ny` interior grid.
pub fn poisson2d_5pt(nx: usize, ny: usize) -> CsrMatrix {
    let n = nx * ny;
    let mut t = Vec::with_capacity(5 * n);
    for y in 0..ny {
        for x in 0..nx {
            let i = x + nx * y;
            if y > 0 {
                t.push((i, i - nx, -1.0));
            }
            if x > 0 {
                t.push((i, i - 1, -1.0));
            }
            t.push((i, i, 4.0));
            if x + 1 < nx {
                t.push((i, i + 1, -1.0));
            }
            if y + 1 < ny {
                t.push((i, i + nx, -1.0));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &t).expect("indices in range")
}

/// Seven-point finite-difference Laplacian: diagonal 6, axis neighbors -1.
pub fn poisson3d_7pt(nx: usize, ny: usize, nz: usize) -> Result<CsrMatrix> {
    check_dims(&[nx, ny, nz])?;
    let n = nx * ny * nz;
    let idx = |x: usize, y: usize, z: usize| x + nx * (y + ny * z);
    let mut t = Vec::with_capacity(7 * n);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let i = idx(x, y, z);
                if z > 0 {
                    t.push((i, idx(x, y, z - 1), -1.0));
                }
                if y > 0 {
                    t.push((i, idx(x, y - 1, z), -1.0));
                }
                if x > 0 {
                    t.push((i, idx(x - 1, y, z), -1.0));
                }
                t.push((i, i, 6.0));
                if x + 1 < nx {
                    t.push((i, idx(x + 1, y, z), -1.0));
                }
                if y + 1 < ny {
                    t.push((i, idx(x, y + 1, z), -1.0));
                }
                if z + 1 < nz {
                    t.push((i, idx(x, y, z + 1), -1.0));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &t)
}

// 1D Simpson rule on [0, 1] with weights scaled by 6.
const SIMPSON_NODES: [f64; 3] = [0.0, 0.5, 1.0];
const SIMPSON_WEIGHTS: [f64; 3] = [1.0, 4.0, 1.0];
const SIMPSON_SCALE: f64 = 6.0;

#[inline]
fn basis(a: usize, t: f64) -> f64 {
    if a == 0 {
        1.0 - t
    } else {
        t
    }
}

#[inline]
fn basis_deriv(a: usize) -> f64 {
    if a == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Trilinear element stiffness for `-Δ` on the unit cube, scaled by 216.
/// Local node `a` sits at corner `(a & 1, (a >> 1) & 1, (a >> 2) & 1)`.
fn q1_hex_stiffness_scaled() -> [[f64; 8]; 8] {
    let mut k = [[0.0; 8]; 8];
    for (qx, &x) in SIMPSON_NODES.iter().enumerate() {
        for (qy, &y) in SIMPSON_NODES.iter().enumerate() {
            for (qz, &z) in SIMPSON_NODES.iter().enumerate() {
                let w = SIMPSON_WEIGHTS[qx] * SIMPSON_WEIGHTS[qy] * SIMPSON_WEIGHTS[qz];
                let grad = |a: usize| {
                    let (ax, ay, az) = (a & 1, (a >> 1) & 1, (a >> 2) & 1);
                    [
                        basis_deriv(ax) * basis(ay, y) * basis(az, z),
                        basis(ax, x) * basis_deriv(ay) * basis(az, z),
                        basis(ax, x) * basis(ay, y) * basis_deriv(az),
                    ]
                };
                for (a, row) in k.iter_mut().enumerate() {
                    let ga = grad(a);
                    for (b, kab) in row.iter_mut().enumerate() {
                        let gb = grad(b);
                        *kab += w * (ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2]);
                    }
                }
            }
        }
    }
    k
}

/// Bilinear element matrix for `-∇·K∇` on the unit square, scaled by 36.
fn q1_quad_stiffness_scaled(kt: [[f64; 2]; 2]) -> [[f64; 4]; 4] {
    let mut k = [[0.0; 4]; 4];
    for (qx, &x) in SIMPSON_NODES.iter().enumerate() {
        for (qy, &y) in SIMPSON_NODES.iter().enumerate() {
            let w = SIMPSON_WEIGHTS[qx] * SIMPSON_WEIGHTS[qy];
            let grad = |a: usize| {
                let (ax, ay) = (a & 1, (a >> 1) & 1);
                [
                    basis_deriv(ax) * basis(ay, y),
                    basis(ax, x) * basis_deriv(ay),
                ]
            };
            for (a, row) in k.iter_mut().enumerate() {
                let ga = grad(a);
                let kga = [
                    kt[0][0] * ga[0] + kt[0][1] * ga[1],
                    kt[1][0] * ga[0] + kt[1][1] * ga[1],
                ];
                for (b, kab) in row.iter_mut().enumerate() {
                    let gb = grad(b);
                    *kab += w * (kga[0] * gb[0] + kga[1] * gb[1]);
                }
            }
        }
    }
    // rounding of the off-diagonal tensor terms differs between (a, b)
    // and (b, a); mirror the upper triangle
    for a in 0..4 {
        for b in 0..a {
            k[a][b] = k[b][a];
        }
    }
    k
}

/// Q1 (trilinear) finite-element Laplacian on a uniform hexahedral mesh
/// with `nx * ny * nz` interior nodes.
///
/// The element connectivity is the 27-point stencil; in exact arithmetic
/// the assembled axis-neighbor couplings cancel to zero and are not stored,
/// so interior rows hold 21 nonzeros (center 8/3, edge -1/6, corner -1/12).
pub fn poisson3d_27pt(nx: usize, ny: usize, nz: usize) -> Result<CsrMatrix> {
    check_dims(&[nx, ny, nz])?;
    let ke = q1_hex_stiffness_scaled();
    let scale = SIMPSON_SCALE.powi(3);
    let n = nx * ny * nz;
    let node = |x: usize, y: usize, z: usize| -> Option<usize> {
        let inside = (1..=nx).contains(&x) && (1..=ny).contains(&y) && (1..=nz).contains(&z);
        inside.then(|| (x - 1) + nx * ((y - 1) + ny * (z - 1)))
    };
    let mut t = Vec::with_capacity(64 * (nx + 1) * (ny + 1) * (nz + 1));
    for ez in 0..=nz {
        for ey in 0..=ny {
            for ex in 0..=nx {
                let g: [Option<usize>; 8] = std::array::from_fn(|a| {
                    node(ex + (a & 1), ey + ((a >> 1) & 1), ez + ((a >> 2) & 1))
                });
                for a in 0..8 {
                    let Some(i) = g[a] else { continue };
                    for b in 0..8 {
                        if let Some(j) = g[b] {
                            t.push((i, j, ke[a][b]));
                        }
                    }
                }
            }
        }
    }
    let scaled = CsrMatrix::from_triplets(n, n, &t)?;
    Ok(rescale(scaled, 1.0 / scale))
}

/// Q1 (bilinear) finite-element discretization of `-∇·(QᵀDQ)∇u` with
/// `Q` the rotation by `theta` and `D = diag(1, epsilon)`.
pub fn aniso2d_9pt(nx: usize, ny: usize, theta: f64, epsilon: f64) -> Result<CsrMatrix> {
    check_dims(&[nx, ny])?;
    check_aniso(theta, epsilon)?;
    let ke = q1_quad_stiffness_scaled(diffusion_tensor(theta, epsilon));
    let scale = SIMPSON_SCALE.powi(2);
    let n = nx * ny;
    let node = |x: usize, y: usize| -> Option<usize> {
        ((1..=nx).contains(&x) && (1..=ny).contains(&y)).then(|| (x - 1) + nx * (y - 1))
    };
    let mut t = Vec::with_capacity(16 * (nx + 1) * (ny + 1));
    for ey in 0..=ny {
        for ex in 0..=nx {
            let g: [Option<usize>; 4] =
                std::array::from_fn(|a| node(ex + (a & 1), ey + ((a >> 1) & 1)));
            for a in 0..4 {
                let Some(i) = g[a] else { continue };
                for b in 0..4 {
                    if let Some(j) = g[b] {
                        t.push((i, j, ke[a][b]));
                    }
                }
            }
        }
    }
    let scaled = CsrMatrix::from_triplets(n, n, &t)?;
    Ok(rescale(scaled, 1.0 / scale))
}

/// `QᵀDQ` with `Q = [[cos, sin], [-sin, cos]]`, `D = diag(1, epsilon)`.
pub fn diffusion_tensor(theta: f64, epsilon: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    let q = [[c, s], [-s, c]];
    let d = [1.0, epsilon];
    let mut k = [[0.0; 2]; 2];
    for (i, row) in k.iter_mut().enumerate() {
        for (j, kij) in row.iter_mut().enumerate() {
            *kij = (0..2).map(|m| q[m][i] * d[m] * q[m][j]).sum();
        }
    }
    k
}

fn rescale(a: CsrMatrix, factor: f64) -> CsrMatrix {
    let t: Vec<_> = a.triplets().map(|(i, j, v)| (i, j, v * factor)).collect();
    CsrMatrix::from_triplets(a.nrows(), a.ncols(), &t).expect("same shape")
}
