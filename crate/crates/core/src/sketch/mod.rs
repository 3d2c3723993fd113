//! Base sketches: CountSketch, degree-two TensorSketch, SRHT, TensorSRHT and OSNAP.
//!
//! Each sketch has a fast application path and an independent explicit-matrix
//! construction read directly off its definition, used by the oracles.

mod countsketch;
mod osnap;
mod srht;
mod tensorsketch;
mod tensorsrht;

pub use countsketch::CountSketch;
pub use osnap::{Osnap, OsnapVariant};
pub use srht::Srht;
pub use tensorsketch::TensorSketch2;
pub use tensorsrht::TensorSrht;

use crate::error::{check_dim, Result};
use crate::tensor::{DenseMatrix, SizeGuard, SparseVector};

/// A random linear map `R^input_dim → R^output_dim`.
pub trait Sketch: Send + Sync {
    fn input_dim(&self) -> usize;

    fn output_dim(&self) -> usize;

    /// Writes `S·x` into `out`. Lengths must already match.
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    /// Writes `S·x` for sparse `x`; the default densifies.
    fn apply_sparse_into(&self, x: &SparseVector, out: &mut [f64]) {
        self.apply_into(&x.to_dense(), out);
    }

    /// Dense `output_dim × input_dim` matrix built from the definition.
    fn explicit_matrix(&self, guard: &SizeGuard) -> Result<DenseMatrix>;

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.input_dim(), x.len())?;
        let mut out = vec![0.0; self.output_dim()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    fn apply_sparse(&self, x: &SparseVector) -> Result<Vec<f64>> {
        check_dim(self.input_dim(), x.dim())?;
        let mut out = vec![0.0; self.output_dim()];
        self.apply_sparse_into(x, &mut out);
        Ok(out)
    }
}

/// A sketch on `R^{side²}` that can be applied to `u ⊗ v` without forming it.
pub trait PairSketch: Sketch {
    fn side_dim(&self) -> usize;

    /// Writes `S·(u ⊗ v)` into `out`. Lengths must already match.
    fn apply_pair_into(&self, u: &[f64], v: &[f64], out: &mut [f64]);

    fn apply_pair(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.side_dim(), u.len())?;
        check_dim(self.side_dim(), v.len())?;
        let mut out = vec![0.0; self.output_dim()];
        self.apply_pair_into(u, v, &mut out);
        Ok(out)
    }
}

impl<S: Sketch + ?Sized> Sketch for Box<S> {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).apply_into(x, out)
    }
    fn apply_sparse_into(&self, x: &SparseVector, out: &mut [f64]) {
        (**self).apply_sparse_into(x, out)
    }
    fn explicit_matrix(&self, guard: &SizeGuard) -> Result<DenseMatrix> {
        (**self).explicit_matrix(guard)
    }
}

/// Identity map; the deterministic "sketch" used to sanity-check the oracles.
#[derive(Clone, Copy, Debug)]
pub struct IdentitySketch {
    pub dim: usize,
}

impl Sketch for IdentitySketch {
    fn input_dim(&self) -> usize {
        self.dim
    }
    fn output_dim(&self) -> usize {
        self.dim
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
    fn explicit_matrix(&self, guard: &SizeGuard) -> Result<DenseMatrix> {
        guard.admit((self.dim * self.dim) as u128)?;
        Ok(DenseMatrix::identity(self.dim))
    }
}

pub(crate) fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}
