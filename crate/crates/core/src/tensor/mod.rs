//! Containers, tensor/Kronecker primitives and the fast transforms.

mod dense;
pub mod fft;
pub mod fwht;
mod guard;
mod ops;
mod sparse;

pub use dense::{dot, norm2, DenseMatrix};
pub use fft::{cyclic_convolution, fft, ComplexBuffer, FftPlan};
pub use fwht::{fwht, fwht_inplace, hadamard_entry};
pub use guard::{materialization_stats, SizeGuard, DEFAULT_SIZE_GUARD, SIZE_GUARD_ENV};
pub(crate) use guard::checked_pow;
pub use ops::{flatten, kron_all, kron_matrix, reshape, self_tensor, tensor_all, tensor_product};
pub use sparse::SparseVector;
