//! Oblivious sketches for high-degree tensor products.
//!
//! The central object is [`RecursiveSketch`], a binary tree of base sketches
//! that maps `x^{⊗p} ∈ R^{d^p}` to `R^m` in time roughly linear in `p`, without
//! ever forming the `d^p`-dimensional tensor. Leaves reduce `x` with
//! CountSketch or OSNAP; internal nodes combine pairs of children with a
//! degree-two TensorSketch or TensorSRHT.
//!
//! On top of that the crate provides a Gaussian-kernel feature map (truncated
//! Taylor series of polynomial sketches), sketch-and-solve ridge regression,
//! and brute-force/statistical oracles for checking all of it.

pub mod error;
pub mod hashing;
pub mod kernel;
pub mod oracle;
pub mod recursive;
pub mod sketch;
pub mod tensor;

pub use error::{Error, Result};
pub use recursive::{RecursiveSketch, SketchConfig, SketchVariant, SketchedMatrix};
