//! Sparse and dense vectors over `f64`.
//!
//! `SparseVec` stores `(index, value)` pairs with strictly increasing indices,
//! no explicit zeros, and every index below the declared dimension. All
//! constructors enforce those invariants, so downstream kernels can iterate
//! entries without revalidating.

use crate::error::{Error, Result};

/// Immutable sparse vector: sorted `(index, value)` pairs plus a dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVec {
    /// Builds from unordered pairs: sorts by index, drops exact zeros,
    /// rejects duplicate or out-of-range indices.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        pairs.retain(|&(_, v)| v != 0.0);
        pairs.sort_unstable_by_key(|&(i, _)| i);
        for win in pairs.windows(2) {
            if win[0].0 == win[1].0 {
                return Err(Error::DuplicateIndex { index: win[0].0 });
            }
        }
        if let Some(&(i, _)) = pairs.last() {
            if i >= dim {
                return Err(Error::IndexOutOfBounds { index: i, dim });
            }
        }
        Ok(Self {
            dim,
            entries: pairs,
        })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Dot product against a dense vector of the same dimension.
    pub fn dot(&self, w: &DenseVec) -> Result<f64> {
        if w.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: w.dim(),
            });
        }
        Ok(self.entries.iter().map(|&(i, v)| v * w[i]).sum())
    }

    pub fn to_dense(&self) -> DenseVec {
        let mut w = DenseVec::zeros(self.dim);
        for &(i, v) in &self.entries {
            w[i] = v;
        }
        w
    }

    /// Scales every stored value; scaling by zero empties the vector.
    pub fn scaled(&self, a: f64) -> Self {
        let entries = if a == 0.0 {
            Vec::new()
        } else {
            self.entries.iter().map(|&(i, v)| (i, a * v)).collect()
        };
        Self {
            dim: self.dim,
            entries,
        }
    }
}

/// Dense vector newtype; indexing is unchecked, dimensions are checked at the
/// operation boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVec(Vec<f64>);

impl DenseVec {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn linf_distance(&self, other: &DenseVec) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `self[i] += a * x[i]` over the support of `x`; coordinates outside the
    /// support are left bit-identical.
    pub fn axpy_sparse(&mut self, a: f64, x: &SparseVec) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        for (i, v) in x.iter() {
            self.0[i] += a * v;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.0 {
            *v *= a;
        }
    }

    pub fn bits_eq(&self, other: &DenseVec) -> bool {
        self.dim() == other.dim()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl std::ops::Index<usize> for DenseVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for DenseVec {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}
