//! Moment probes contrasting the monolithic degree-q TensorSketch with the
//! recursive construction.
//!
//! The monolithic sketch `M(x^{⊗q}) = F⁻¹((FC₁x) ∘ ⋯ ∘ (FC_q x))` has a
//! variance that grows like `3^q`; it exists here only as a probe.

use num_complex::Complex64;

use super::moments::{monte_carlo, monte_carlo_samples, MomentEstimate, MIN_TRIALS};
use crate::error::{check_dim, Error, Result};
use crate::hashing::SeedPath;
use crate::recursive::{RecursiveSketch, SketchVariant};
use crate::sketch::{CountSketch, Sketch};
use crate::tensor::{dot, norm2, FftPlan};

/// Moments of `‖Mx^{⊗q}‖² / ‖x^{⊗q}‖²` for `x` = all-ones.
#[derive(Clone, Debug)]
pub struct VarianceProbe {
    pub d: usize,
    pub q: usize,
    pub m: usize,
    /// Normalized squared norm; its mean is 1.
    pub second: MomentEstimate,
    /// Normalized fourth moment `‖Mx‖⁴ / ‖x^{⊗q}‖⁴`.
    pub fourth: MomentEstimate,
    /// `3^q / (2m²)`.
    pub lower_bound: f64,
}

impl VarianceProbe {
    /// `Var[‖Mx‖²]·m / ‖x^{⊗q}‖⁴`.
    pub fn scaled_variance(&self) -> f64 {
        self.second.variance * self.m as f64
    }
}

fn monolithic_norm_sq(d: usize, q: usize, m: usize, seed: &SeedPath) -> Result<f64> {
    let plan = FftPlan::new(m)?;
    let ones = vec![1.0; d];
    let mut prod = vec![Complex64::new(1.0, 0.0); m];
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for i in 1..=q {
        let c = CountSketch::new(d, m, &seed.derive("factor", 0, i as u64))?.apply(&ones)?;
        for (b, v) in buf.iter_mut().zip(&c) {
            *b = Complex64::new(*v, 0.0);
        }
        plan.process_raw(&mut buf, false);
        prod.iter_mut().zip(&buf).for_each(|(p, b)| *p *= b);
    }
    // Parseval for the unnormalized transform
    Ok(prod.iter().map(|z| z.norm_sqr()).sum::<f64>() / m as f64)
}

/// Empirical moments of the degree-`q` TensorSketch on `x = 1 ∈ R^d`.
pub fn tensorsketch_variance_probe(d: usize, q: usize, m: usize, trials: usize, seed: &SeedPath) -> Result<VarianceProbe> {
    if q == 0 || q > d {
        return Err(Error::InvalidParameter(format!("probe needs 1 <= q <= d (got q = {q}, d = {d})")));
    }
    if !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!("at least {MIN_TRIALS} trials required (got {trials})")));
    }
    let scale = (d as f64).powi(q as i32);
    let samples = monte_carlo_samples(trials, seed, |s| Ok(monolithic_norm_sq(d, q, m, s)? / scale))?;
    let squares: Vec<f64> = samples.iter().map(|v| v * v).collect();
    let second = MomentEstimate::from_samples(&samples);
    let fourth = MomentEstimate::from_samples(&squares);
    Ok(VarianceProbe {
        d,
        q,
        m,
        second,
        fourth,
        lower_bound: 3f64.powi(q as i32) / (2.0 * (m * m) as f64),
    })
}

/// Moments of `⟨Πx^{⊗p}, Πy^{⊗p}⟩ / (‖x‖^p‖y‖^p)` over fresh recursive sketches.
#[allow(clippy::too_many_arguments)]
pub fn recursive_moment_probe(
    p: usize,
    m: usize,
    variant: SketchVariant,
    x: &[f64],
    y: &[f64],
    trials: usize,
    seed: &SeedPath,
) -> Result<MomentEstimate> {
    check_dim(x.len(), y.len())?;
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!("at least {MIN_TRIALS} trials required (got {trials})")));
    }
    let scale = (norm2(x) * norm2(y)).powi(p as i32);
    if scale == 0.0 {
        return Err(Error::InvalidParameter("probe vectors must be nonzero".into()));
    }
    monte_carlo(trials, seed, |s| {
        let sk = RecursiveSketch::build(x.len(), p, m, variant, s.value())?;
        Ok(dot(&sk.apply_point(x)?, &sk.apply_point(y)?) / scale)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::estimate_moments;

    #[test]
    fn degree_one_matches_countsketch() {
        let seed = SeedPath::new(8);
        let probe = tensorsketch_variance_probe(8, 1, 16, 4000, &seed).unwrap();
        let ones = vec![1.0; 8];
        let direct = estimate_moments(
            |s| CountSketch::new(8, 16, &s.derive("factor", 0, 1)),
            &ones,
            &ones,
            4000,
            &SeedPath::new(9),
        )
        .unwrap();
        let direct_mean = direct.mean / 8.0;
        let direct_err = direct.std_err / 8.0;
        let gap = (probe.second.mean - direct_mean).abs();
        assert!(gap <= 3.0 * (probe.second.std_err.powi(2) + direct_err.powi(2)).sqrt());
        // fourth moment ≈ 1 + O(1/m)
        assert!(probe.fourth.mean > 1.0 && probe.fourth.mean < 1.5);
    }

    #[test]
    fn fourth_moment_exceeds_lower_bound_and_grows() {
        let seed = SeedPath::new(2);
        let mut prev = 0.0;
        for q in 2..=5 {
            let probe = tensorsketch_variance_probe(8, q, 16, 4000, &seed).unwrap();
            assert!(probe.second.within(1.0, 4.0), "q = {q}: mean {}", probe.second.mean);
            assert!(probe.fourth.mean + 3.0 * probe.fourth.std_err >= probe.lower_bound);
            assert!(probe.scaled_variance() > prev);
            prev = probe.scaled_variance();
        }
    }

    #[test]
    fn probe_validates_arguments() {
        let s = SeedPath::new(0);
        assert!(tensorsketch_variance_probe(4, 5, 16, 1000, &s).is_err());
        assert!(tensorsketch_variance_probe(4, 2, 12, 1000, &s).is_err());
        assert!(tensorsketch_variance_probe(4, 2, 16, 10, &s).is_err());
        assert!(recursive_moment_probe(2, 8, SketchVariant::ConstProb, &[0.0; 3], &[1.0; 3], 1000, &s).is_err());
    }

    #[test]
    fn recursive_probe_is_unbiased() {
        let x = [0.5, -1.0, 0.25];
        let y = [1.0, 0.5, -0.5];
        let target = dot(&x, &y).powi(3) / (norm2(&x) * norm2(&y)).powi(3);
        let est = recursive_moment_probe(3, 16, SketchVariant::ConstProb, &x, &y, 5000, &SeedPath::new(4)).unwrap();
        assert!(est.within(target, 4.0), "{est:?} vs {target}");
    }
}
