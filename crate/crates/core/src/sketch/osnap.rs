use std::collections::HashMap;

use rand::Rng;

use super::Sketch;
use crate::error::{Error, Result};
use crate::hashing::SeedPath;
use crate::tensor::{DenseMatrix, SizeGuard, SparseVector};

/// How OSNAP places the nonzeros of each column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OsnapVariant {
    /// Exactly `s` distinct rows per column (seeded partial Fisher–Yates).
    #[default]
    ExactSparsity,
    /// Each entry independently nonzero with probability `s/m`.
    Bernoulli,
}

/// OSNAP: sparse embedding with `±1/√s` entries, `s` per column on average
/// (exactly `s` for [`OsnapVariant::ExactSparsity`]).
#[derive(Clone, Debug)]
pub struct Osnap {
    d: usize,
    m: usize,
    s: usize,
    variant: OsnapVariant,
    columns: Vec<Vec<(u32, f64)>>,
}

impl Osnap {
    pub fn new(d: usize, m: usize, s: usize, variant: OsnapVariant, seed: &SeedPath) -> Result<Self> {
        if d == 0 || m == 0 || s == 0 {
            return Err(Error::InvalidParameter(format!(
                "OSNAP needs d, m, s >= 1 (got {d}, {m}, {s})"
            )));
        }
        if s > m {
            return Err(Error::InvalidParameter(format!("sparsity {s} exceeds target dimension {m}")));
        }
        if m > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("target dimension {m} too large")));
        }
        let value = 1.0 / (s as f64).sqrt();
        let mut rng = seed.derive("columns", 0, 0).rng();
        let mut columns = Vec::with_capacity(d);
        for _ in 0..d {
            let mut rows = match variant {
                OsnapVariant::ExactSparsity => partial_fisher_yates(&mut rng, m, s),
                OsnapVariant::Bernoulli => {
                    let p = s as f64 / m as f64;
                    (0..m).filter(|_| rng.gen::<f64>() < p).collect()
                }
            };
            rows.sort_unstable();
            columns.push(
                rows.into_iter()
                    .map(|r| (r as u32, if rng.gen::<bool>() { value } else { -value }))
                    .collect(),
            );
        }
        Ok(Self {
            d,
            m,
            s,
            variant,
            columns,
        })
    }

    pub fn sparsity(&self) -> usize {
        self.s
    }

    pub fn variant(&self) -> OsnapVariant {
        self.variant
    }

    pub fn column(&self, j: usize) -> &[(u32, f64)] {
        &self.columns[j]
    }
}

/// First `s` entries of a Fisher–Yates shuffle of `0..m`, touching only O(s) state.
fn partial_fisher_yates(rng: &mut impl Rng, m: usize, s: usize) -> Vec<usize> {
    // virtual array a[i] = i except where overridden
    let mut swapped: HashMap<usize, usize> = HashMap::with_capacity(2 * s);
    let mut out = Vec::with_capacity(s);
    for t in 0..s {
        let k = rng.gen_range(t..m);
        let at_k = *swapped.get(&k).unwrap_or(&k);
        let at_t = *swapped.get(&t).unwrap_or(&t);
        swapped.insert(k, at_t);
        out.push(at_k);
    }
    out
}

impl Sketch for Osnap {
    fn input_dim(&self) -> usize {
        self.d
    }

    fn output_dim(&self) -> usize {
        self.m
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (col, &xj) in self.columns.iter().zip(x) {
            if xj == 0.0 {
                continue;
            }
            for &(r, v) in col {
                out[r as usize] += v * xj;
            }
        }
    }

    fn apply_sparse_into(&self, x: &SparseVector, out: &mut [f64]) {
        out.fill(0.0);
        for &(j, xj) in x.entries() {
            for &(r, v) in &self.columns[j] {
                out[r as usize] += v * xj;
            }
        }
    }

    fn explicit_matrix(&self, guard: &SizeGuard) -> Result<DenseMatrix> {
        guard.admit(self.m as u128 * self.d as u128)?;
        let mut out = DenseMatrix::zeros(self.m, self.d);
        for (j, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                out.set(r as usize, j, v);
            }
        }
        Ok(out)
    }
}
