//! Kernel applications: exact Gram matrices, statistical dimension, the
//! Gaussian feature map, sketch-and-solve ridge regression and the OSE/AMP
//! error evaluators.

mod eval;
mod gaussian;
mod gram;
mod ridge;
mod taylor;

pub use eval::{amp_error, ose_spectral_error};
pub use gaussian::{
    truncated_features, truncated_gaussian_gram, DegreeSizing, FeatureVariant, GaussianFeatureMap, GaussianMapConfig,
    KernelJob,
};
pub use gram::{gram_gaussian, gram_polynomial, statistical_dimension, statistical_dimension_of};
pub use ridge::{exact_ridge_regression, ridge_objective, sketch_ridge_regression, RidgeSizing, RidgeSolution};
pub use taylor::{gaussian_degree, taylor_tail, MAX_TAYLOR_DEGREE};
