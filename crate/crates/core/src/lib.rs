//! Classical algebraic multigrid with lossless coarse-operator
//! sparsification.
//!
//! A Galerkin hierarchy is built with Ruge–Stüben coarsening and direct
//! interpolation ([`setup::amg_setup`]). Its coarse operators can then be
//! thinned out by the Sparse or Hybrid Galerkin methods
//! ([`sparsify::sparse_hybrid_setup`]) while every `PᵀAP` is kept, so
//! [`solve::adaptive_solve`] can put entries back when convergence suffers.
//! [`perf`] evaluates an α–β model of distributed SpMV cost per level.

pub mod error;
pub mod perf;
pub mod problems;
pub mod rng;
pub mod setup;
pub mod solve;
pub mod sparse;
pub mod sparsify;

pub use error::{AmgError, Result};
pub use sparse::CsrMatrix;
