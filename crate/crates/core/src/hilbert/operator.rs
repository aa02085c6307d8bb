use num_complex::Complex64 as C64;

use super::layout::TensorLayout;
use super::matrix::CMatrix;
use super::state::StateVector;
use crate::error::{Error, Result};

/// Square operator on a tensor-factored space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    layout: TensorLayout,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(layout: TensorLayout, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        layout.check_flat(matrix.rows())?;
        Ok(Self { layout, matrix })
    }

    pub fn identity(layout: TensorLayout) -> Self {
        let matrix = CMatrix::identity(layout.flat_dim());
        Self { layout, matrix }
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

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.matrix.hermitian_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.matrix.unitary_deviation() <= tol
    }

    pub fn dagger(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            matrix: self.matrix.dagger(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: self.matrix.add(&other.matrix),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: self.matrix.sub(&other.matrix),
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            layout: self.layout.clone(),
            matrix: self.matrix.scale(s),
        }
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: self.matrix.matmul(&other.matrix),
        })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: self.matrix.commutator(&other.matrix),
        })
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.layout.check_flat(psi.dim())?;
        StateVector::new(psi.layout().clone(), self.matrix.mul_vec(psi.amplitudes()))
    }

    /// `⟨bra|self|ket⟩`.
    pub fn matrix_element(&self, bra: &StateVector, ket: &StateVector) -> Result<C64> {
        bra.inner(&self.apply(ket)?)
    }

    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        self.matrix_element(psi, psi)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// Real diagonal operator, stored as its diagonal. Used where operators are
/// diagonal in the configuration basis and the flat dimension is too large
/// for dense storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    layout: TensorLayout,
    diagonal: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(layout: TensorLayout, diagonal: Vec<f64>) -> Result<Self> {
        layout.check_flat(diagonal.len())?;
        Ok(Self { layout, diagonal })
    }

    pub fn zeros(layout: TensorLayout) -> Self {
        let diagonal = vec![0.0; layout.flat_dim()];
        Self { layout, diagonal }
    }

    pub fn layout(&self) -> &TensorLayout {
        &self.layout
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            layout: self.layout.clone(),
            diagonal: self.diagonal.iter().map(|x| x * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.diagonal.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.layout.check_flat(psi.dim())?;
        let amps = psi
            .amplitudes()
            .iter()
            .zip(&self.diagonal)
            .map(|(a, d)| a * d)
            .collect();
        StateVector::new(psi.layout().clone(), amps)
    }

    /// Unitary `exp(i·s·self)`.
    pub fn exp_i(&self, s: f64) -> Vec<C64> {
        self.diagonal
            .iter()
            .map(|&d| C64::from_polar(1.0, s * d))
            .collect()
    }

    pub fn to_operator(&self) -> Operator {
        Operator {
            layout: self.layout.clone(),
            matrix: CMatrix::from_real_diagonal(&self.diagonal),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            layout: self.layout.clone(),
            diagonal: self
                .diagonal
                .iter()
                .zip(&other.diagonal)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}
