use rand::Rng;

use super::{next_pow2, Sketch};
use crate::error::{Error, Result};
use crate::hashing::SeedPath;
use crate::tensor::{fwht_inplace, hadamard_entry, DenseMatrix, SizeGuard};

/// Subsampled randomized Hadamard transform `S = (1/√m)·P·H·D` with ±1 `H`.
///
/// Inputs are zero-padded to the next power of two; rows are sampled
/// uniformly with replacement.
#[derive(Clone, Debug)]
pub struct Srht {
    d: usize,
    d_pad: usize,
    m: usize,
    signs: Vec<f64>,
    rows: Vec<usize>,
}

impl Srht {
    pub fn new(d: usize, m: usize, seed: &SeedPath) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!("SRHT needs d, m >= 1 (got {d}, {m})")));
        }
        let d_pad = next_pow2(d);
        let mut rng = seed.derive("diagonal", 0, 0).rng();
        let signs = (0..d_pad).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let mut rng = seed.derive("rows", 0, 0).rng();
        let rows = (0..m).map(|_| rng.gen_range(0..d_pad)).collect();
        Ok(Self {
            d,
            d_pad,
            m,
            signs,
            rows,
        })
    }

    pub fn padded_dim(&self) -> usize {
        self.d_pad
    }

    pub fn sampled_rows(&self) -> &[usize] {
        &self.rows
    }
}

impl Sketch for Srht {
    fn input_dim(&self) -> usize {
        self.d
    }

    fn output_dim(&self) -> usize {
        self.m
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let mut buf = vec![0.0; self.d_pad];
        for ((b, &xi), &s) in buf.iter_mut().zip(x).zip(&self.signs) {
            *b = s * xi;
        }
        fwht_inplace(&mut buf, false).expect("padded length is a power of two");
        let scale = 1.0 / (self.m as f64).sqrt();
        for (o, &r) in out.iter_mut().zip(&self.rows) {
            *o = buf[r] * scale;
        }
    }

    fn explicit_matrix(&self, guard: &SizeGuard) -> Result<DenseMatrix> {
        guard.admit(self.m as u128 * self.d as u128)?;
        let scale = 1.0 / (self.m as f64).sqrt();
        Ok(DenseMatrix::from_fn(self.m, self.d, |r, i| {
            scale * hadamard_entry(self.rows[r], i) * self.signs[i]
        }))
    }
}
