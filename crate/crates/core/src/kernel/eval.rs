use crate::error::{check_dim, Error, Result};
use crate::oracle::{operator_norm, psd_sqrt_inv};
use crate::sketch::Sketch;
use crate::tensor::DenseMatrix;

/// `‖(K+λI)^{−1/2}(SᵀS − K)(K+λI)^{−1/2}‖_op` for a sketched `m × n` matrix `S`.
///
/// A value `≤ ε` is equivalent to
/// `(1−ε)(K + λI) ⪯ SᵀS + λI ⪯ (1+ε)(K + λI)`.
pub fn ose_spectral_error(sketched: &DenseMatrix, k_exact: &DenseMatrix, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive (got {lambda})")));
    }
    check_dim(k_exact.rows(), sketched.cols())?;
    let w = psd_sqrt_inv(k_exact, lambda)?;
    let diff = sketched.gram().sub(&k_exact.symmetrized())?;
    let sandwich = w.matmul(&diff)?.matmul(&w)?;
    operator_norm(&sandwich.symmetrized())
}

/// `‖CᵀΠᵀΠD − CᵀD‖_F / (‖C‖_F‖D‖_F)`, or 0 when either norm vanishes.
pub fn amp_error<S: Sketch + ?Sized>(c: &DenseMatrix, d: &DenseMatrix, sketch: &S) -> Result<f64> {
    check_dim(c.rows(), d.rows())?;
    check_dim(sketch.input_dim(), c.rows())?;
    let scale = c.frobenius_norm() * d.frobenius_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sketch_cols = |a: &DenseMatrix| -> Result<DenseMatrix> {
        let cols: Vec<Vec<f64>> = a.columns().map(|col| sketch.apply(col)).collect::<Result<_>>()?;
        DenseMatrix::from_columns(sketch.output_dim(), &cols)
    };
    let approx = sketch_cols(c)?.transpose().matmul(&sketch_cols(d)?)?;
    let exact = c.transpose().matmul(d)?;
    Ok(approx.sub(&exact)?.frobenius_norm() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::symmetric_eig;
    use crate::sketch::IdentitySketch;

    fn spd(seed: u64, n: usize) -> DenseMatrix {
        let mut state = seed | 1;
        let a = DenseMatrix::from_fn(n, n, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        });
        a.transpose().matmul(&a).unwrap()
    }

    #[test]
    fn exact_gram_gives_zero() {
        let a = DenseMatrix::from_fn(5, 4, |i, j| (i as f64 - j as f64).sin());
        let k = a.gram();
        assert!(ose_spectral_error(&a, &k, 0.1).unwrap() < 1e-10);
    }

    #[test]
    fn closed_form_scaling() {
        // SᵀS = (1+ε)I, K = I, λ = 1 → ε/2
        let eps = 0.3;
        let s = DenseMatrix::identity(4).scale((1.0 + eps as f64).sqrt());
        let e = ose_spectral_error(&s, &DenseMatrix::identity(4), 1.0).unwrap();
        assert!((e - eps / 2.0).abs() < 1e-12);
        assert!(ose_spectral_error(&s, &DenseMatrix::identity(4), 0.0).is_err());
    }

    #[test]
    fn agrees_with_brute_force_sandwich() {
        let lambda = 0.5;
        for seed in 0..30 {
            let k = spd(seed, 6);
            let noise = spd(seed + 100, 6).scale(0.05 * (seed % 7) as f64);
            let target = k.add(&noise).unwrap();
            let l = target.cholesky().unwrap();
            let s = l.transpose();
            let err = ose_spectral_error(&s, &k, lambda).unwrap();
            for eps in [0.05, 0.1, 0.2, 0.4, 0.8] {
                let reg = k.add_diagonal(lambda);
                let sk = s.gram().add_diagonal(lambda);
                let upper = reg.scale(1.0 + eps).sub(&sk).unwrap();
                let lower = sk.sub(&reg.scale(1.0 - eps)).unwrap();
                let min_eig = |m: &DenseMatrix| *symmetric_eig(m).unwrap().values.last().unwrap();
                let brute = min_eig(&upper) >= -1e-10 && min_eig(&lower) >= -1e-10;
                if (err - eps).abs() > 1e-8 {
                    assert_eq!(err <= eps, brute, "seed {seed}, eps {eps}, err {err}");
                }
            }
        }
    }

    #[test]
    fn amp_special_cases() {
        let c = DenseMatrix::from_fn(4, 3, |i, j| (i + 2 * j) as f64);
        let d = DenseMatrix::from_fn(4, 2, |i, j| (i * j) as f64 - 1.0);
        assert_eq!(amp_error(&c, &d, &IdentitySketch { dim: 4 }).unwrap(), 0.0);
        assert_eq!(amp_error(&DenseMatrix::zeros(4, 3), &d, &IdentitySketch { dim: 4 }).unwrap(), 0.0);

        // one unit vector: |‖Πx‖² − 1|
        use crate::hashing::SeedPath;
        use crate::sketch::Srht;
        let s = Srht::new(8, 4, &SeedPath::new(3)).unwrap();
        let mut x = vec![0.0; 8];
        x[0] = 0.6;
        x[3] = 0.8;
        let xm = DenseMatrix::new(8, 1, x.clone()).unwrap();
        let sx = s.apply(&x).unwrap();
        let expect = (sx.iter().map(|v| v * v).sum::<f64>() - 1.0).abs();
        assert!((amp_error(&xm, &xm, &s).unwrap() - expect).abs() < 1e-12);
    }
}
