use rand::Rng;

use super::{next_pow2, PairSketch, Sketch};
use crate::error::{Error, Result};
use crate::hashing::SeedPath;
use crate::tensor::{fwht_inplace, hadamard_entry, DenseMatrix, SizeGuard};

/// TensorSRHT `S = (1/√m)·P·(H D₁ × H D₂)` on `R^{d²}`.
///
/// On `u ⊗ v`, row `r` is `(1/√m)·(H D₁ u)_{i_r}·(H D₂ v)_{j_r}`: two Hadamard
/// transforms plus `m` products.
#[derive(Clone, Debug)]
pub struct TensorSrht {
    d: usize,
    d_pad: usize,
    m: usize,
    signs1: Vec<f64>,
    signs2: Vec<f64>,
    rows: Vec<(usize, usize)>,
}

impl TensorSrht {
    pub fn new(d: usize, m: usize, seed: &SeedPath) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "TensorSRHT needs d, m >= 1 (got {d}, {m})"
            )));
        }
        let d_pad = next_pow2(d);
        let draw_signs = |index| {
            let mut rng = seed.derive("diagonal", 0, index).rng();
            (0..d_pad)
                .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect::<Vec<f64>>()
        };
        let signs1 = draw_signs(1);
        let signs2 = draw_signs(2);
        let mut rng = seed.derive("rows", 0, 0).rng();
        let rows = (0..m)
            .map(|_| (rng.gen_range(0..d_pad), rng.gen_range(0..d_pad)))
            .collect();
        Ok(Self {
            d,
            d_pad,
            m,
            signs1,
            signs2,
            rows,
        })
    }

    pub fn sampled_pairs(&self) -> &[(usize, usize)] {
        &self.rows
    }

    fn transform(&self, x: &[f64], signs: &[f64]) -> Vec<f64> {
        let mut buf = vec![0.0; self.d_pad];
        for ((b, &xi), &s) in buf.iter_mut().zip(x).zip(signs) {
            *b = s * xi;
        }
        fwht_inplace(&mut buf, false).expect("padded length is a power of two");
        buf
    }
}

impl Sketch for TensorSrht {
    fn input_dim(&self) -> usize {
        self.d * self.d
    }

    fn output_dim(&self) -> usize {
        self.m
    }

    /// General `d²` input: transform every column of the `(d, d)`-reshaping by
    /// `H D₁`, then contract each sampled row against `(H D₂)_{j_r, ·}`.
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        let left: Vec<Vec<f64>> = (0..d)
            .map(|j| self.transform(&x[j * d..(j + 1) * d], &self.signs1))
            .collect();
        let scale = 1.0 / (self.m as f64).sqrt();
        for (o, &(i, j)) in out.iter_mut().zip(&self.rows) {
            let mut acc = 0.0;
            for (col, l) in left.iter().enumerate() {
                acc += l[i] * hadamard_entry(j, col) * self.signs2[col];
            }
            *o = acc * scale;
        }
    }

    fn explicit_matrix(&self, guard: &SizeGuard) -> Result<DenseMatrix> {
        let d = self.d;
        guard.admit(self.m as u128 * (d * d) as u128)?;
        let scale = 1.0 / (self.m as f64).sqrt();
        Ok(DenseMatrix::from_fn(self.m, d * d, |r, c| {
            let (i, j) = (c % d, c / d);
            let (ri, rj) = self.rows[r];
            scale
                * hadamard_entry(ri, i)
                * self.signs1[i]
                * hadamard_entry(rj, j)
                * self.signs2[j]
        }))
    }
}

impl PairSketch for TensorSrht {
    fn side_dim(&self) -> usize {
        self.d
    }

    fn apply_pair_into(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        let a = self.transform(u, &self.signs1);
        let b = self.transform(v, &self.signs2);
        let scale = 1.0 / (self.m as f64).sqrt();
        for (o, &(i, j)) in out.iter_mut().zip(&self.rows) {
            *o = scale * a[i] * b[j];
        }
    }
}
