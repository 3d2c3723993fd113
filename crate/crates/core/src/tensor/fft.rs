//! Power-of-two complex FFT with unitary normalization, backed by `rustfft`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_dim, Error, Result};

/// Complex buffer whose length is a power of two.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexBuffer(Vec<Complex64>);

impl ComplexBuffer {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if !values.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(values.len()));
        }
        Ok(Self(values))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, FftPlan>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

/// Cached forward/inverse transforms for one length.
#[derive(Clone)]
pub struct FftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPlan").field("len", &self.len).finish()
    }
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        Ok(PLANS.with(|cell| {
            let (planner, cache) = &mut *cell.borrow_mut();
            cache
                .entry(len)
                .or_insert_with(|| FftPlan {
                    len,
                    forward: planner.plan_fft_forward(len),
                    inverse: planner.plan_fft_inverse(len),
                })
                .clone()
        }))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized transform in place (`Σ_k x_k e^{∓2πi jk/L}`).
    pub fn process_raw(&self, data: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(data.len(), self.len);
        if inverse {
            self.inverse.process(data);
        } else {
            self.forward.process(data);
        }
    }

    /// Transform in place with `1/√L` scaling in both directions.
    pub fn process_unitary(&self, data: &mut [Complex64], inverse: bool) {
        self.process_raw(data, inverse);
        let scale = 1.0 / (self.len as f64).sqrt();
        for c in data.iter_mut() {
            *c *= scale;
        }
    }

    /// Cyclic convolution of real sequences of length `L`:
    /// `out_r = Σ_s a_s · b_{(r − s) mod L}`.
    ///
    /// Both inputs share one complex transform (`a + i·b`), split by conjugate symmetry.
    pub fn cyclic_convolution(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        let n = self.len;
        let mut z: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
        self.process_raw(&mut z, false);
        let mut prod = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let zk = z[k];
            let zr = z[(n - k) % n].conj();
            let fa = (zk + zr) * 0.5;
            let fb = (zk - zr) * Complex64::new(0.0, -0.5);
            prod[k] = fa * fb;
        }
        self.process_raw(&mut prod, true);
        let inv = 1.0 / n as f64;
        for (o, c) in out.iter_mut().zip(&prod) {
            *o = c.re * inv;
        }
    }
}

/// Unitary DFT (or inverse DFT) of a power-of-two buffer.
pub fn fft(buf: ComplexBuffer, inverse: bool) -> Result<ComplexBuffer> {
    let plan = FftPlan::new(buf.len())?;
    let mut values = buf.into_values();
    plan.process_unitary(&mut values, inverse);
    Ok(ComplexBuffer(values))
}

/// Cyclic convolution of two equal-length power-of-two real sequences.
pub fn cyclic_convolution(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_dim(a.len(), b.len())?;
    let plan = FftPlan::new(a.len())?;
    let mut out = vec![0.0; a.len()];
    plan.cyclic_convolution(a, b, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn impulse_has_flat_spectrum() {
        let out = fft(ComplexBuffer::from_real(&[1.0, 0.0, 0.0, 0.0]).unwrap(), false).unwrap();
        for c in out.values() {
            assert!((c.re - 0.5).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let values: Vec<Complex64> = (0..16)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let buf = ComplexBuffer::new(values.clone()).unwrap();
        let spec = fft(buf.clone(), false).unwrap();
        assert!((spec.norm() - buf.norm()).abs() < 1e-12 * buf.norm());
        let back = fft(spec, true).unwrap();
        for (a, b) in back.values().iter().zip(&values) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(ComplexBuffer::from_real(&[1.0; 6]), Err(Error::NotPowerOfTwo(6)));
        assert!(FftPlan::new(12).is_err());
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let out = cyclic_convolution(&[1.0, 2.0, 0.0, 0.0], &[3.0, 4.0, 0.0, 0.0]).unwrap();
        let expected = [3.0, 10.0, 8.0, 0.0];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).abs() < 1e-12);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = cyclic_convolution(&a, &b).unwrap();
        for r in 0..32 {
            let direct: f64 = (0..32).map(|s| a[s] * b[(r + 32 - s) % 32]).sum();
            assert!((fast[r] - direct).abs() < 1e-12);
        }
    }
}
