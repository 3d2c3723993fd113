use crate::error::{check_dim, Error, Result};
use crate::tensor::DenseMatrix;

const MAX_SWEEPS: usize = 60;

/// Eigen-decomposition of a symmetric matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DenseMatrix,
}

impl EigenDecomposition {
    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        DenseMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v.get(i, k) * fl[k] * v.get(j, k)).sum()
        })
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Cyclic Jacobi eigensolver. The input is symmetrized first; iteration stops
/// once the off-diagonal Frobenius norm drops below `1e-12·‖M‖_F`.
pub fn symmetric_eig(m: &DenseMatrix) -> Result<EigenDecomposition> {
    check_dim(m.rows(), m.cols())?;
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius_norm();
    let tol = 1e-12 * scale;

    let off_norm = |a: &DenseMatrix| {
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    s += a.get(i, j) * a.get(i, j);
                }
            }
        }
        s.sqrt()
    };

    let mut converged = scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged || off_norm(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for r in 0..n {
                    let arp = a.get(r, p);
                    let arq = a.get(r, q);
                    a.set(r, p, c * arp - s * arq);
                    a.set(r, q, s * arp + c * arq);
                }
                for r in 0..n {
                    let apr = a.get(p, r);
                    let aqr = a.get(q, r);
                    a.set(p, r, c * apr - s * aqr);
                    a.set(q, r, s * apr + c * aqr);
                }
                for r in 0..n {
                    let vrp = v.get(r, p);
                    let vrq = v.get(r, q);
                    v.set(r, p, c * vrp - s * vrq);
                    v.set(r, q, s * vrp + c * vrq);
                }
            }
        }
    }
    if !converged && off_norm(&a) > tol {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)));
    let values = order.iter().map(|&i| a.get(i, i)).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, k| v.get(r, order[k]));
    Ok(EigenDecomposition { values, vectors })
}

/// Spectral norm: `max |λ|` for symmetric input, `√λ_max(MᵀM)` otherwise.
pub fn operator_norm(m: &DenseMatrix) -> Result<f64> {
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    if m.rows() == m.cols() && m.max_asymmetry() <= 1e-14 * scale {
        let eig = symmetric_eig(m)?;
        return Ok(eig.values.iter().fold(0.0f64, |acc, l| acc.max(l.abs())));
    }
    let g = if m.rows() >= m.cols() {
        m.gram()
    } else {
        m.transpose().gram()
    };
    let eig = symmetric_eig(&g)?;
    Ok(eig.values[0].max(0.0).sqrt())
}

/// Eigenvalues of a PSD matrix with round-off negatives clamped to zero.
///
/// Values below `−1e-10·‖K‖_op` are not round-off and are reported as an error.
pub fn clamped_psd_eigen(k: &DenseMatrix) -> Result<EigenDecomposition> {
    let mut eig = symmetric_eig(k)?;
    let norm = eig.values.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let threshold = -1e-10 * norm.max(f64::MIN_POSITIVE);
    for l in eig.values.iter_mut() {
        if *l < threshold {
            return Err(Error::InvalidParameter(format!(
                "matrix is not positive semidefinite (eigenvalue {l:e})"
            )));
        }
        *l = l.max(0.0);
    }
    Ok(eig)
}

/// `(K + λI)^{−1/2}` for symmetric PSD `K` and `λ > 0`.
pub fn psd_sqrt_inv(k: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive (got {lambda})")));
    }
    let eig = clamped_psd_eigen(k)?;
    Ok(eig.reconstruct_with(|l| 1.0 / (l + lambda).sqrt()).symmetrized())
}
