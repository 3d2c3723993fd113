use crate::error::{Error, Result};

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Validates ordering and bounds; explicit zeros are dropped.
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut prev: Option<usize> = None;
        for (pos, &(i, v)) in entries.iter().enumerate() {
            if i >= dim {
                return Err(Error::InvalidParameter(format!(
                    "sparse index {i} out of range for dimension {dim}"
                )));
            }
            if prev.is_some_and(|p| p >= i) {
                return Err(Error::InvalidParameter(format!(
                    "sparse indices must be strictly increasing (entry {pos})"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(pos));
            }
            prev = Some(i);
        }
        let entries = entries.into_iter().filter(|&(_, v)| v != 0.0).collect();
        Ok(Self { dim, entries })
    }

    pub fn from_dense(x: &[f64]) -> Self {
        Self {
            dim: x.len(),
            entries: x
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i, *v))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }
}
