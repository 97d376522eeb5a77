//! Sparse matrix storage, arithmetic and Matrix Market I/O.

mod csr;
mod matrix_market;

pub use csr::CsrMatrix;
pub use matrix_market::{parse_matrix_market, read_matrix_market, write_matrix_market};
