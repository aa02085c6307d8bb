//! Dense complex linear algebra on finite tensor-product Hilbert spaces.
//!
//! Flat indices follow the leftmost-slowest convention everywhere: for a
//! layout `[d0, d1, …]` the flat index of `(i0, i1, …)` is
//! `((i0·d1 + i1)·d2 + …)`.

mod density;
mod eigen;
mod layout;
mod matrix;
mod operator;
mod state;

pub use density::{entropy_of_spectrum, DensityMatrix};
pub use eigen::{hermitian_eigendecomposition, hermitian_eigenvalues, HermitianEigen};
pub(crate) use layout::FactorSplit;
pub use layout::TensorLayout;
pub use matrix::CMatrix;
pub use operator::{DiagonalOperator, Operator};
pub use state::{tensor_product, StateVector};

use crate::error::Result;

/// Max elementwise deviation from Hermiticity accepted for density matrices
/// and eigensolver input.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Accepted deviation of `‖ψ‖` from one where unit norm is required.
pub const NORM_TOL: f64 = 1e-10;

pub fn outer_product(psi: &StateVector) -> Result<DensityMatrix> {
    DensityMatrix::pure(psi)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    rho.von_neumann_entropy()
}

pub fn coherence_norm(rho: &DensityMatrix) -> f64 {
    rho.coherence_norm()
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}
