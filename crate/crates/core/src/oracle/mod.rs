//! Independent checks: a dense eigensolver, Monte-Carlo moment estimation,
//! the spectral-property test and the degree-q TensorSketch variance probe.

mod eig;
mod moments;
mod probe;
mod spectral;

pub use eig::{clamped_psd_eigen, operator_norm, psd_sqrt_inv, symmetric_eig, EigenDecomposition};
pub use moments::{estimate_moments, monte_carlo, monte_carlo_samples, MomentEstimate, MIN_TRIALS};
pub use probe::{recursive_moment_probe, tensorsketch_variance_probe, VarianceProbe};
pub use spectral::{
    spectral_deviation, spectral_property_test, tensorsrht_spectral_dim, SpectralReport, SpectralTestConfig,
};
