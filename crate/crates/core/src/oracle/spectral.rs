use rayon::prelude::*;

use super::eig::operator_norm;
use crate::error::{check_dim, Error, Result};
use crate::hashing::SeedPath;
use crate::sketch::Sketch;
use crate::tensor::DenseMatrix;

/// Parameters of the `(μ_F, μ_2, ε, δ, n)` spectral property.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralTestConfig {
    /// Budget on `‖U‖_F²`.
    pub mu_f: f64,
    /// Budget on `‖U‖_op²`.
    pub mu_2: f64,
    pub eps: f64,
    pub delta: f64,
    pub n: usize,
}

impl SpectralTestConfig {
    pub fn new(mu_f: f64, mu_2: f64, eps: f64, delta: f64, n: usize) -> Result<Self> {
        if !(mu_f > 0.0 && mu_2 > 0.0 && eps > 0.0 && delta > 0.0 && n > 0) {
            return Err(Error::InvalidParameter(
                "spectral test parameters must all be positive".into(),
            ));
        }
        Ok(Self {
            mu_f,
            mu_2,
            eps,
            delta,
            n,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub trials: usize,
    pub passes: usize,
    pub pass_rate: f64,
    /// `1 − δ`.
    pub target_rate: f64,
    pub deviations: Vec<f64>,
}

/// `‖(SU)ᵀ(SU) − UᵀU‖_op`.
pub fn spectral_deviation<S: Sketch + ?Sized>(s: &S, u: &DenseMatrix) -> Result<f64> {
    check_dim(s.input_dim(), u.rows())?;
    let cols: Vec<Vec<f64>> = u.columns().map(|c| s.apply(c)).collect::<Result<_>>()?;
    let su = DenseMatrix::from_columns(s.output_dim(), &cols)?;
    operator_norm(&su.gram().sub(&u.gram())?)
}

/// Fraction of fresh sketches whose deviation on `U` stays within `cfg.eps`.
pub fn spectral_property_test<S, F>(
    factory: F,
    u: &DenseMatrix,
    cfg: &SpectralTestConfig,
    trials: usize,
    seed: &SeedPath,
) -> Result<SpectralReport>
where
    S: Sketch,
    F: Fn(&SeedPath) -> Result<S> + Sync,
{
    check_dim(cfg.n, u.cols())?;
    let fro_sq = u.frobenius_norm().powi(2);
    let op_sq = operator_norm(u)?.powi(2);
    let slack = 1.0 + 1e-12;
    if fro_sq > cfg.mu_f * slack || op_sq > cfg.mu_2 * slack {
        return Err(Error::InvalidParameter(format!(
            "U violates the norm budgets: ‖U‖_F² = {fro_sq}, ‖U‖_op² = {op_sq}"
        )));
    }
    let deviations: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| spectral_deviation(&factory(&seed.derive("trial", 0, t))?, u))
        .collect::<Result<_>>()?;
    let passes = deviations.iter().filter(|&&d| d <= cfg.eps).count();
    Ok(SpectralReport {
        trials,
        passes,
        pass_rate: passes as f64 / trials.max(1) as f64,
        target_rate: 1.0 - cfg.delta,
        deviations,
    })
}

/// Target dimension `c·ln(n/δ)·ln²(ndk/(εδ))·μ_F·μ_2/ε²` sufficient for
/// `I_k × TensorSRHT` to have the spectral property.
pub fn tensorsrht_spectral_dim(cfg: &SpectralTestConfig, d: usize, k: usize, c: f64) -> usize {
    let n = cfg.n as f64;
    let a = (n / cfg.delta).ln().max(1.0);
    let b = (n * d as f64 * k as f64 / (cfg.eps * cfg.delta)).ln().max(1.0);
    (c * a * b * b * cfg.mu_f * cfg.mu_2 / (cfg.eps * cfg.eps)).ceil().max(1.0) as usize
}
