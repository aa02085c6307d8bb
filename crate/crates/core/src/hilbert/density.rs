use num_complex::Complex64 as C64;

use super::eigen::{hermitian_eigendecomposition, hermitian_eigenvalues};
use super::layout::{FactorSplit, TensorLayout};
use super::matrix::CMatrix;
use super::state::StateVector;
use super::{HERMITIAN_TOL, NORM_TOL, POSITIVITY_TOL, TRACE_TOL};
use crate::error::{Error, Result};

/// Positive, unit-trace Hermitian matrix on a tensor-factored space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: TensorLayout,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(layout: TensorLayout, matrix: CMatrix) -> Result<Self> {
        let rho = Self::unchecked(layout, matrix)?;
        let deviation = rho.matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = rho.matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace });
        }
        let min = hermitian_eigenvalues(&rho.matrix)?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive { eigenvalue: min });
        }
        Ok(rho)
    }

    /// Shape checks only, for matrices that are valid by construction.
    fn unchecked(layout: TensorLayout, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        layout.check_flat(matrix.rows())?;
        Ok(Self { layout, matrix })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        let a = psi.amplitudes();
        let matrix = CMatrix::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj());
        Self::unchecked(psi.layout().clone(), matrix)
    }

    /// `diag(p)` on a single factor.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let layout = TensorLayout::single(probabilities.len())?;
        Self::new(layout, CMatrix::from_real_diagonal(probabilities))
    }

    pub fn maximally_mixed(layout: TensorLayout) -> Self {
        let n = layout.flat_dim();
        let matrix = CMatrix::identity(n).scale(C64::new(1.0 / n as f64, 0.0));
        Self { layout, matrix }
    }

    /// Reduced state of `|ψ⟩⟨ψ|` on the `keep` factors, contracting the
    /// amplitudes directly instead of forming the full projector.
    pub fn reduce_pure(psi: &StateVector, keep: &[usize]) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        let split = FactorSplit::new(psi.layout(), keep)?;
        let a = psi.amplitudes();
        let dk = split.kept.flat_dim();
        let dt = split.traced_dim;
        let mut matrix = CMatrix::zeros(dk, dk);
        for i in 0..dk {
            for j in i..dk {
                let s: C64 = (0..dt)
                    .map(|t| a[split.full_index(i, t)] * a[split.full_index(j, t)].conj())
                    .sum();
                matrix[(i, j)] = s;
                matrix[(j, i)] = s.conj();
            }
        }
        Self::unchecked(split.kept, matrix)
    }

    pub fn layout(&self) -> &TensorLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    /// `Tr_{rest}(ρ)`, keeping the listed factors in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let split = FactorSplit::new(&self.layout, keep)?;
        let dk = split.kept.flat_dim();
        let dt = split.traced_dim;
        let mut matrix = CMatrix::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..dk {
                matrix[(i, j)] = (0..dt)
                    .map(|t| self.matrix[(split.full_index(i, t), split.full_index(j, t))])
                    .sum();
            }
        }
        Self::unchecked(split.kept, matrix)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            layout: self.layout.concat(&other.layout),
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `−Σ λ ln λ` in nats, eigenvalues clipped to `[0, 1]`.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        Ok(entropy_of_spectrum(&self.eigenvalues()?))
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest normalized off-diagonal magnitude `|ρ_ij| / √(ρ_ii ρ_jj)`.
    pub fn coherence_norm(&self) -> f64 {
        let n = self.dim();
        let diag: Vec<f64> = (0..n).map(|i| self.matrix[(i, i)].re).collect();
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = diag[i] * diag[j];
                if i != j && w > 1e-30 {
                    best = best.max(self.matrix[(i, j)].norm() / w.sqrt());
                }
            }
        }
        best
    }

    /// Largest `|ρ_ij|` with `i ≠ j`.
    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    best = best.max(self.matrix[(i, j)].norm());
                }
            }
        }
        best
    }

    /// Smallest eigenvalue, for positivity checks.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigendecomposition(&self.matrix)?
            .values
            .first()
            .copied()
            .unwrap_or(0.0))
    }
}

pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum()
}
