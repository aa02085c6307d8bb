use serde::Serialize;

use crate::error::{Error, Result};

/// Ordered subsystem dimensions. The leftmost factor varies slowest in the
/// flat index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TensorLayout {
    dims: Vec<usize>,
}

impl TensorLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidLayout(
                "layout needs at least one factor".into(),
            ));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidLayout(format!(
                "factor {pos} has dimension 0"
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidLayout("flat dimension overflows usize".into()))?;
        Ok(Self { dims })
    }

    /// Single-factor layout of dimension `dim`.
    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn flat_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Flat-index stride of each factor.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn to_multi(&self, mut flat: usize) -> Vec<usize> {
        let mut multi = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            multi[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
        multi
    }

    /// Panics if `multi` does not fit the layout.
    pub fn to_flat(&self, multi: &[usize]) -> usize {
        assert_eq!(multi.len(), self.dims.len(), "multi-index has wrong length");
        multi.iter().zip(&self.dims).fold(0, |acc, (&m, &d)| {
            assert!(m < d, "multi-index digit {m} out of range {d}");
            acc * d + m
        })
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims }
    }

    /// Layout of the listed factors, in the given order.
    pub fn select(&self, factors: &[usize]) -> Result<Self> {
        let mut dims = Vec::with_capacity(factors.len());
        for &f in factors {
            dims.push(*self.dims.get(f).ok_or(Error::FactorOutOfRange {
                index: f,
                factors: self.dims.len(),
            })?);
        }
        Self::new(dims)
    }

    pub(crate) fn check_flat(&self, len: usize) -> Result<()> {
        if len == self.flat_dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.flat_dim(),
                found: len,
            })
        }
    }
}

/// Splits the flat space of `layout` into kept and traced factor groups.
///
/// `table[k * traced_dim + t]` is the flat index whose kept digits encode `k`
/// and traced digits encode `t`, both in original factor order.
pub(crate) struct FactorSplit {
    pub kept: TensorLayout,
    pub traced_dim: usize,
    pub table: Vec<usize>,
}

impl FactorSplit {
    pub fn new(layout: &TensorLayout, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let n = layout.num_factors();
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if let Some(&bad) = kept.iter().find(|&&k| k >= n) {
            return Err(Error::FactorOutOfRange {
                index: bad,
                factors: n,
            });
        }
        let traced: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
        let kept_layout = layout.select(&kept)?;
        let traced_dims: Vec<usize> = traced.iter().map(|&k| layout.dims()[k]).collect();
        let traced_dim: usize = traced_dims.iter().product();

        let kept_strides = kept_layout.strides();
        let traced_strides = if traced.is_empty() {
            Vec::new()
        } else {
            TensorLayout::new(traced_dims)?.strides()
        };
        // factor -> (is_kept, stride within its group)
        let mut role = vec![(false, 0usize); n];
        for (i, &k) in kept.iter().enumerate() {
            role[k] = (true, kept_strides[i]);
        }
        for (i, &k) in traced.iter().enumerate() {
            role[k] = (false, traced_strides[i]);
        }

        let full = layout.flat_dim();
        let mut table = vec![0usize; full];
        let dims = layout.dims();
        let mut digits = vec![0usize; n];
        for f in 0..full {
            let (mut ik, mut it) = (0usize, 0usize);
            for k in 0..n {
                let (is_kept, stride) = role[k];
                if is_kept {
                    ik += digits[k] * stride;
                } else {
                    it += digits[k] * stride;
                }
            }
            table[ik * traced_dim + it] = f;
            // odometer increment, rightmost fastest
            for k in (0..n).rev() {
                digits[k] += 1;
                if digits[k] < dims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        Ok(Self {
            kept: kept_layout,
            traced_dim,
            table,
        })
    }

    pub fn full_index(&self, kept: usize, traced: usize) -> usize {
        self.table[kept * self.traced_dim + traced]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_zero_dimension() {
        assert!(TensorLayout::new(vec![2, 0]).is_err());
        assert!(TensorLayout::new(vec![]).is_err());
    }

    #[test]
    fn leftmost_is_slowest() {
        let l = TensorLayout::new(vec![2, 3]).unwrap();
        assert_eq!(l.to_flat(&[1, 0]), 3);
        assert_eq!(l.to_multi(4), vec![1, 1]);
        assert_eq!(l.strides(), vec![3, 1]);
    }

    #[test]
    fn split_table_is_a_permutation() {
        let l = TensorLayout::new(vec![2, 3, 2]).unwrap();
        let split = FactorSplit::new(&l, &[2, 0]).unwrap();
        let mut seen = split.table.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..12).collect::<Vec<_>>());
        // kept (f0=1, f2=1) -> kept index 3; traced f1=2
        assert_eq!(split.full_index(3, 2), l.to_flat(&[1, 2, 1]));
    }

    proptest! {
        #[test]
        fn flat_multi_roundtrip(dims in prop::collection::vec(1usize..5, 1..5), seed in 0usize..10_000) {
            let l = TensorLayout::new(dims).unwrap();
            let flat = seed % l.flat_dim();
            prop_assert_eq!(l.to_flat(&l.to_multi(flat)), flat);
        }
    }
}
