use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::hashing::SeedPath;
use crate::sketch::Sketch;
use crate::tensor::dot;

/// Minimum trial count accepted by [`estimate_moments`].
pub const MIN_TRIALS: usize = 1000;

/// Empirical mean and variance of a scalar statistic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub trials: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub std_err: f64,
}

impl MomentEstimate {
    /// Welford accumulation over the samples in order.
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (k, &x) in samples.iter().enumerate() {
            let delta = x - mean;
            mean += delta / (k + 1) as f64;
            m2 += delta * (x - mean);
        }
        let trials = samples.len();
        let variance = if trials > 1 {
            (m2 / (trials - 1) as f64).max(0.0)
        } else {
            0.0
        };
        Self {
            trials,
            mean,
            variance,
            std_err: if trials > 0 { (variance / trials as f64).sqrt() } else { 0.0 },
        }
    }

    /// Number of standard errors between the mean and `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_err == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.std_err
        }
    }

    /// Whether the mean lies within `k` standard errors of `target`, with a
    /// relative round-off allowance for zero-variance statistics.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err + 1e-12 * target.abs().max(1e-300)
    }
}

/// Evaluates `statistic` once per trial on an independent derived seed.
///
/// Trials may run in parallel; the samples come back in trial order, so any
/// reduction over them is independent of the thread count.
pub fn monte_carlo_samples<F>(trials: usize, seed: &SeedPath, statistic: F) -> Result<Vec<f64>>
where
    F: Fn(&SeedPath) -> Result<f64> + Sync,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|t| statistic(&seed.derive("trial", 0, t)))
        .collect()
}

pub fn monte_carlo<F>(trials: usize, seed: &SeedPath, statistic: F) -> Result<MomentEstimate>
where
    F: Fn(&SeedPath) -> Result<f64> + Sync,
{
    Ok(MomentEstimate::from_samples(&monte_carlo_samples(trials, seed, statistic)?))
}

/// Moments of `(Sx)ᵀ(Sy)` over fresh sketches `S = factory(seed_t)`.
pub fn estimate_moments<S, F>(
    factory: F,
    x: &[f64],
    y: &[f64],
    trials: usize,
    seed: &SeedPath,
) -> Result<MomentEstimate>
where
    S: Sketch,
    F: Fn(&SeedPath) -> Result<S> + Sync,
{
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_TRIALS} trials required (got {trials})"
        )));
    }
    check_dim(x.len(), y.len())?;
    monte_carlo(trials, seed, |s| {
        let sk = factory(s)?;
        Ok(dot(&sk.apply(x)?, &sk.apply(y)?))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{CountSketch, IdentitySketch};

    #[test]
    fn welford_matches_two_pass() {
        let mut rng = SeedPath::new(1).rng();
        use rand::Rng;
        let samples: Vec<f64> = (0..5000).map(|_| 1e3 + rng.gen_range(-1.0..1.0)).collect();
        let est = MomentEstimate::from_samples(&samples);
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((est.mean - mean).abs() <= 1e-10 * mean.abs());
        assert!((est.variance - var).abs() <= 1e-10 * var);
        assert!((est.std_err - (var / n).sqrt()).abs() <= 1e-10 * est.std_err);
    }

    #[test]
    fn identity_sketch_is_exact() {
        let x = [1.0, 2.0, 3.0];
        let y = [0.5, -1.0, 2.0];
        let est = estimate_moments(
            |_| Ok(IdentitySketch { dim: 3 }),
            &x,
            &y,
            1000,
            &SeedPath::new(0),
        )
        .unwrap();
        assert_eq!(est.mean, 4.5);
        assert_eq!(est.variance, 0.0);
        assert!(est.within(4.5, 4.0));
    }

    #[test]
    fn too_few_trials() {
        let r = estimate_moments(|_| Ok(IdentitySketch { dim: 1 }), &[1.0], &[1.0], 10, &SeedPath::new(0));
        assert!(r.is_err());
    }

    #[test]
    fn countsketch_unit_vector_and_variance_scaling() {
        let e1 = {
            let mut v = vec![0.0; 32];
            v[0] = 1.0;
            v
        };
        let est = estimate_moments(
            |s| CountSketch::new(32, 16, s),
            &e1,
            &e1,
            20_000,
            &SeedPath::new(3),
        )
        .unwrap();
        // ‖S e₁‖² is exactly 1 for CountSketch
        assert!(est.within(1.0, 4.0));

        let x = crate::sketch::testutil::random_vec(1, 32);
        let y = crate::sketch::testutil::random_vec(2, 32);
        let var = |m| {
            estimate_moments(|s| CountSketch::new(32, m, s), &x, &y, 100_000, &SeedPath::new(m as u64))
                .unwrap()
                .variance
        };
        let ratio = var(16) / var(32);
        assert!((1.5..=2.7).contains(&ratio), "variance ratio {ratio}");
    }

    #[test]
    fn samples_are_thread_count_independent() {
        let f = |s: &SeedPath| -> Result<f64> {
            let cs = CountSketch::new(8, 4, s)?;
            Ok(cs.apply(&[1.0; 8])?.iter().sum())
        };
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| monte_carlo_samples(2000, &SeedPath::new(8), f).unwrap());
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| monte_carlo_samples(2000, &SeedPath::new(8), f).unwrap());
        assert_eq!(a, b);
    }
}
