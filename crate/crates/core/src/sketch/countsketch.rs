use super::Sketch;
use crate::error::{Error, Result};
use crate::hashing::{KWiseHash, SeedPath, SignHash, DEFAULT_INDEPENDENCE};
use crate::tensor::{DenseMatrix, SizeGuard, SparseVector};

/// CountSketch: `S_{r,i} = σ(i)·1[h(i) = r]`.
#[derive(Clone, Debug)]
pub struct CountSketch {
    d: usize,
    m: usize,
    hash: KWiseHash,
    sign: SignHash,
    buckets: Vec<u32>,
    signs: Vec<f64>,
}

impl CountSketch {
    pub fn new(d: usize, m: usize, seed: &SeedPath) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!("CountSketch needs d, m >= 1 (got {d}, {m})")));
        }
        if m > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("target dimension {m} too large")));
        }
        let hash = KWiseHash::new(&seed.derive("bucket", 0, 0), DEFAULT_INDEPENDENCE, m)?;
        let sign = SignHash::new(&seed.derive("sign", 0, 0));
        let buckets = (0..d as u64).map(|i| hash.eval(i) as u32).collect();
        let signs = (0..d as u64).map(|i| sign.eval(i)).collect();
        Ok(Self {
            d,
            m,
            hash,
            sign,
            buckets,
            signs,
        })
    }

    #[inline]
    pub fn bucket(&self, i: usize) -> usize {
        self.buckets[i] as usize
    }

    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        self.signs[i]
    }
}

impl Sketch for CountSketch {
    fn input_dim(&self) -> usize {
        self.d
    }

    fn output_dim(&self) -> usize {
        self.m
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for ((&xi, &b), &s) in x.iter().zip(&self.buckets).zip(&self.signs) {
            out[b as usize] += s * xi;
        }
    }

    fn apply_sparse_into(&self, x: &SparseVector, out: &mut [f64]) {
        out.fill(0.0);
        for &(i, v) in x.entries() {
            out[self.buckets[i] as usize] += self.signs[i] * v;
        }
    }

    fn explicit_matrix(&self, guard: &SizeGuard) -> Result<DenseMatrix> {
        guard.admit(self.m as u128 * self.d as u128)?;
        let mut s = DenseMatrix::zeros(self.m, self.d);
        for i in 0..self.d {
            s.set(self.hash.eval(i as u64), i, self.sign.eval(i as u64));
        }
        Ok(s)
    }
}
