//! Sparse storage and a banded direct solver.

mod band;
mod csr;
mod edges;
mod rcm;

pub use band::BandLu;
pub use csr::CsrMatrix;
pub use edges::EdgeOperator;
pub use rcm::reverse_cuthill_mckee;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot:e} at row {row})")]
    Singular { row: usize, pivot: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
