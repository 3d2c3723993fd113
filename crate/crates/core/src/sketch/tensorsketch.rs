use super::{CountSketch, PairSketch, Sketch};
use crate::error::{Error, Result};
use crate::tensor::{DenseMatrix, FftPlan, SizeGuard};
use crate::hashing::SeedPath;

/// Degree-two TensorSketch on `R^{d²}`:
/// `S_{r,(i,j)} = σ₁(i)·σ₂(j)·1[h₁(i) + h₂(j) ≡ r (mod m)]`.
///
/// On `u ⊗ v` this is the cyclic convolution of the two CountSketches `C₁u`
/// and `C₂v`, computed with one length-`m` FFT, which is why `m` must be a
/// power of two.
#[derive(Clone, Debug)]
pub struct TensorSketch2 {
    first: CountSketch,
    second: CountSketch,
    plan: FftPlan,
}

impl TensorSketch2 {
    pub fn new(d: usize, m: usize, seed: &SeedPath) -> Result<Self> {
        if !m.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(m));
        }
        Ok(Self {
            first: CountSketch::new(d, m, &seed.derive("factor", 0, 1))?,
            second: CountSketch::new(d, m, &seed.derive("factor", 0, 2))?,
            plan: FftPlan::new(m)?,
        })
    }

    fn m(&self) -> usize {
        self.plan.len()
    }

    fn d(&self) -> usize {
        self.first.input_dim()
    }
}

impl Sketch for TensorSketch2 {
    fn input_dim(&self) -> usize {
        self.d() * self.d()
    }

    fn output_dim(&self) -> usize {
        self.m()
    }

    /// Direct scatter of an arbitrary (not necessarily rank-one) `d²` vector.
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let (d, m) = (self.d(), self.m());
        out.fill(0.0);
        for j in 0..d {
            let (hj, sj) = (self.second.bucket(j), self.second.sign(j));
            for i in 0..d {
                let v = x[i + d * j];
                if v != 0.0 {
                    out[(self.first.bucket(i) + hj) & (m - 1)] += self.first.sign(i) * sj * v;
                }
            }
        }
    }

    fn explicit_matrix(&self, guard: &SizeGuard) -> Result<DenseMatrix> {
        let (d, m) = (self.d(), self.m());
        guard.admit(m as u128 * (d * d) as u128)?;
        let c1 = self.first.explicit_matrix(guard)?;
        let c2 = self.second.explicit_matrix(guard)?;
        let mut s = DenseMatrix::zeros(m, d * d);
        for j in 0..d {
            for i in 0..d {
                let r1 = (0..m).find(|&r| c1.get(r, i) != 0.0).expect("one nonzero per column");
                let r2 = (0..m).find(|&r| c2.get(r, j) != 0.0).expect("one nonzero per column");
                s.set((r1 + r2) % m, i + d * j, c1.get(r1, i) * c2.get(r2, j));
            }
        }
        Ok(s)
    }
}

impl PairSketch for TensorSketch2 {
    fn side_dim(&self) -> usize {
        self.d()
    }

    fn apply_pair_into(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        let m = self.m();
        let mut a = vec![0.0; m];
        let mut b = vec![0.0; m];
        self.first.apply_into(u, &mut a);
        self.second.apply_into(v, &mut b);
        self.plan.cyclic_convolution(&a, &b, out);
    }
}
