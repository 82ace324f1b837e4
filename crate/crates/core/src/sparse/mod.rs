//! Sparse matrices, block composition and direct factorization.

pub mod block;
pub mod csr;
pub mod lu;
pub mod ordering;

pub use block::{block_compose, BlockSystem};
pub use csr::{SparseMatrix, TripletBuilder};
pub use lu::{factorize, Factorization};
