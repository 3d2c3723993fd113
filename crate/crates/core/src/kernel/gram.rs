use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::symmetric_eig;
use crate::tensor::{dot, DenseMatrix};

fn symmetric_from_upper(n: usize, entry: impl Fn(usize, usize) -> f64 + Sync) -> DenseMatrix {
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| (0..n).map(|i| if i <= j { entry(i, j) } else { entry(j, i) }).collect())
        .collect();
    DenseMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `K_{ij} = (x_iᵀx_j)^p` for the columns of `X`.
pub fn gram_polynomial(x: &DenseMatrix, p: usize) -> DenseMatrix {
    symmetric_from_upper(x.cols(), |i, j| dot(x.col(i), x.col(j)).powi(p as i32))
}

/// `G_{ij} = exp(−‖x_i − x_j‖²/2)`.
pub fn gram_gaussian(x: &DenseMatrix) -> DenseMatrix {
    symmetric_from_upper(x.cols(), |i, j| {
        let dist: f64 = x.col(i).iter().zip(x.col(j)).map(|(a, b)| (a - b) * (a - b)).sum();
        (-dist / 2.0).exp()
    })
}

/// `Σ_i λ_i/(λ_i + λ)` with eigenvalues clamped at zero.
pub fn statistical_dimension(eigenvalues: &[f64], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive (got {lambda})")));
    }
    Ok(eigenvalues
        .iter()
        .map(|&v| {
            let v = v.max(0.0);
            v / (v + lambda)
        })
        .sum())
}

/// `tr(K(K + λI)⁻¹)` of a symmetric PSD matrix.
pub fn statistical_dimension_of(k: &DenseMatrix, lambda: f64) -> Result<f64> {
    statistical_dimension(&symmetric_eig(k)?.values, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{self_tensor, SizeGuard};

    fn data(seed: u64, d: usize, n: usize) -> DenseMatrix {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        DenseMatrix::from_fn(d, n, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
    }

    #[test]
    fn polynomial_special_cases() {
        let x = data(1, 3, 5);
        let k1 = gram_polynomial(&x, 1);
        let xtx = x.transpose().matmul(&x).unwrap();
        assert!(k1.sub(&xtx).unwrap().frobenius_norm() < 1e-14);
        assert_eq!(gram_polynomial(&DenseMatrix::identity(2), 3), DenseMatrix::identity(2));
    }

    #[test]
    fn polynomial_matches_materialized_tensors() {
        let x = data(2, 3, 6);
        let g = SizeGuard::new(1 << 20);
        let k = gram_polynomial(&x, 3);
        for i in 0..6 {
            for j in 0..6 {
                let ti = self_tensor(x.col(i), 3, &g).unwrap();
                let tj = self_tensor(x.col(j), 3, &g).unwrap();
                assert!((k.get(i, j) - dot(&ti, &tj)).abs() < 1e-10);
            }
        }
        assert!(k.max_asymmetry() < 1e-12);
    }

    #[test]
    fn gaussian_entries() {
        let x = DenseMatrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]).unwrap();
        let g = gram_gaussian(&x);
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(0, 2), 1.0);
        assert!((g.get(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
        let g = gram_gaussian(&data(3, 4, 8));
        let eig = symmetric_eig(&g).unwrap();
        assert!(*eig.values.last().unwrap() >= -1e-10);
        assert!(g.data().iter().all(|v| *v > 0.0 && *v <= 1.0));
    }

    #[test]
    fn statistical_dimension_values() {
        assert_eq!(statistical_dimension(&[1.0; 6], 1.0).unwrap(), 3.0);
        assert!((statistical_dimension(&[4.0, 1.0], 1.0).unwrap() - 1.3).abs() < 1e-15);
        assert_eq!(statistical_dimension(&[-1e-12, 0.0], 1.0).unwrap(), 0.0);
        assert!(statistical_dimension(&[1.0], 0.0).is_err());
        let mut prev = f64::INFINITY;
        for lam in [0.01, 0.1, 1.0, 10.0, 1e3, 1e6] {
            let s = statistical_dimension(&[5.0, 2.0, 0.5, 0.0], lam).unwrap();
            assert!(s < prev && s <= 3.0);
            prev = s;
        }
        assert!(prev < 1e-5);
    }
}
