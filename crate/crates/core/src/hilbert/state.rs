use num_complex::Complex64 as C64;

use super::layout::TensorLayout;
use crate::error::{Error, Result};

/// Complex amplitudes over a tensor-factored space. Unit norm is not
/// enforced; operations that need it say so.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: TensorLayout,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(layout: TensorLayout, amplitudes: Vec<C64>) -> Result<Self> {
        layout.check_flat(amplitudes.len())?;
        Ok(Self { layout, amplitudes })
    }

    /// Single-factor state with the given amplitudes.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let layout = TensorLayout::single(amplitudes.len())?;
        Self::new(layout, amplitudes)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(layout: TensorLayout, index: usize) -> Result<Self> {
        let dim = layout.flat_dim();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { layout, amplitudes })
    }

    pub fn layout(&self) -> &TensorLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            layout: self.layout.clone(),
            amplitudes: self.amplitudes.iter().map(|&a| a * s).collect(),
        }
    }

    /// `self + other`; layouts must agree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            layout: self.layout.clone(),
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `self ⊗ other` with `self` as the slower-varying block.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|&b| a * b));
        }
        Self {
            layout: self.layout.concat(&other.layout),
            amplitudes,
        }
    }
}

pub fn tensor_product(a: &StateVector, b: &StateVector) -> StateVector {
    a.tensor(b)
}
