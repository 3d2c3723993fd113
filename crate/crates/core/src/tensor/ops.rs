//! Tensor products, reshaping and Kronecker products.
//!
//! Index convention throughout the crate: in `u ⊗ v` the first factor varies
//! fastest, so entry `i + a·j` holds `u_i · v_j` for `u ∈ R^a`.

use super::dense::DenseMatrix;
use super::guard::{checked_pow, SizeGuard};
use crate::error::{check_dim, Error, Result};

pub fn tensor_product(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let len = u
        .len()
        .checked_mul(v.len())
        .ok_or_else(|| Error::SizeOverflow(format!("{} * {}", u.len(), v.len())))?;
    let mut out = Vec::with_capacity(len);
    for &b in v {
        out.extend(u.iter().map(|&a| a * b));
    }
    Ok(out)
}

/// `x^{⊗p}`, materialized. Oracle use only: refuses when `d^p` exceeds the guard.
pub fn self_tensor(x: &[f64], p: usize, guard: &SizeGuard) -> Result<Vec<f64>> {
    guard.admit(checked_pow(x.len(), p))?;
    let mut out = vec![1.0];
    for _ in 0..p {
        out = tensor_product(&out, x)?;
    }
    Ok(out)
}

/// Tensor product of several vectors, `xs[0]` varying fastest.
pub fn tensor_all(xs: &[&[f64]], guard: &SizeGuard) -> Result<Vec<f64>> {
    let total = xs
        .iter()
        .fold(1u128, |acc, x| acc.saturating_mul(x.len() as u128));
    guard.admit(total)?;
    let mut out = vec![1.0];
    for x in xs {
        out = tensor_product(&out, x)?;
    }
    Ok(out)
}

/// `(m, n)`-reshaping: entry `(i, j)` is `v[i + m·j]`.
pub fn reshape(v: &[f64], m: usize, n: usize) -> Result<DenseMatrix> {
    let len = m
        .checked_mul(n)
        .ok_or_else(|| Error::SizeOverflow(format!("{m} * {n}")))?;
    check_dim(len, v.len())?;
    DenseMatrix::new(m, n, v.to_vec())
}

/// Inverse of [`reshape`].
pub fn flatten(a: &DenseMatrix) -> Vec<f64> {
    a.data().to_vec()
}

/// Kronecker product `A × B` laid out so that `(A × B)(u ⊗ v) = (Au) ⊗ (Bv)`.
pub fn kron_matrix(a: &DenseMatrix, b: &DenseMatrix, guard: &SizeGuard) -> Result<DenseMatrix> {
    let (m1, n1) = a.shape();
    let (m2, n2) = b.shape();
    let rows = m1
        .checked_mul(m2)
        .ok_or_else(|| Error::SizeOverflow(format!("{m1} * {m2}")))?;
    let cols = n1
        .checked_mul(n2)
        .ok_or_else(|| Error::SizeOverflow(format!("{n1} * {n2}")))?;
    guard.admit(rows as u128 * cols as u128)?;
    let mut out = DenseMatrix::zeros(rows, cols);
    for c2 in 0..n2 {
        for c1 in 0..n1 {
            let col = out.col_mut(c1 + n1 * c2);
            for r2 in 0..m2 {
                let bv = b.get(r2, c2);
                if bv == 0.0 {
                    continue;
                }
                for r1 in 0..m1 {
                    col[r1 + m1 * r2] = a.get(r1, c1) * bv;
                }
            }
        }
    }
    Ok(out)
}

/// `A_1 × A_2 × ⋯ × A_k` with the same layout as [`kron_matrix`].
pub fn kron_all(factors: &[&DenseMatrix], guard: &SizeGuard) -> Result<DenseMatrix> {
    let mut acc = DenseMatrix::identity(1);
    for f in factors {
        acc = kron_matrix(&acc, f, guard)?;
    }
    Ok(acc)
}
