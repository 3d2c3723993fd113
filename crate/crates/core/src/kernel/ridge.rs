use super::gram::{gram_polynomial, statistical_dimension_of};
use crate::error::{check_dim, Error, Result};
use crate::recursive::{target_dim_const_prob, target_dim_high_prob, RecursiveSketch, SketchVariant};
use crate::tensor::{dot, DenseMatrix};

/// Target dimension for [`sketch_ridge_regression`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RidgeSizing {
    Fixed(usize),
    /// From the exact statistical dimension of the polynomial Gram matrix
    /// via the ConstProb sizing helper with constant `c`.
    Auto { eps: f64, c: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RidgeSolution {
    pub coefficients: Vec<f64>,
    /// `‖Ay − φ(b)‖² + λ‖y‖²` with `A = [x_i^{⊗p}]`, `φ(b) = b^{⊗p}`, via the kernel trick.
    pub objective: f64,
    /// `‖ΠAy − Πφ(b)‖² + λ‖y‖²`; equals `objective` for the exact solver.
    pub sketched_objective: f64,
    /// Sketch dimension; 0 for the exact solver.
    pub m: usize,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("lambda must be positive (got {lambda})")))
    }
}

/// `k_b[i] = (x_iᵀb)^p`.
fn kernel_vector(x: &DenseMatrix, b: &[f64], p: usize) -> Vec<f64> {
    x.columns().map(|c| dot(c, b).powi(p as i32)).collect()
}

/// Exact objective `yᵀKy − 2yᵀk_b + ‖b‖^{2p} + λ‖y‖²`, never forming `A`.
pub fn ridge_objective(x: &DenseMatrix, b: &[f64], p: usize, lambda: f64, y: &[f64]) -> Result<f64> {
    check_dim(x.rows(), b.len())?;
    check_dim(x.cols(), y.len())?;
    let k = gram_polynomial(x, p);
    Ok(objective_with(&k, &kernel_vector(x, b, p), dot(b, b).powi(p as i32), lambda, y))
}

fn objective_with(k: &DenseMatrix, kb: &[f64], bb: f64, lambda: f64, y: &[f64]) -> f64 {
    let ky = k.matvec(y).expect("square Gram");
    (dot(y, &ky) - 2.0 * dot(y, kb) + bb + lambda * dot(y, y)).max(0.0)
}

/// Exact solution `y* = (K + λI)⁻¹k_b` of the polynomial-kernel ridge problem.
pub fn exact_ridge_regression(x: &DenseMatrix, b: &[f64], p: usize, lambda: f64) -> Result<RidgeSolution> {
    check_lambda(lambda)?;
    check_dim(x.rows(), b.len())?;
    let k = gram_polynomial(x, p);
    let kb = kernel_vector(x, b, p);
    let y = k.add_diagonal(lambda).solve_spd(&kb)?;
    let objective = objective_with(&k, &kb, dot(b, b).powi(p as i32), lambda, &y);
    Ok(RidgeSolution {
        coefficients: y,
        objective,
        sketched_objective: objective,
        m: 0,
    })
}

/// Sketch-and-solve: `((ΠA)ᵀΠA + λI)y = (ΠA)ᵀΠφ(b)` with one sketch instance
/// for both `A` and `φ(b)`, solved by Cholesky.
pub fn sketch_ridge_regression(
    x: &DenseMatrix,
    b: &[f64],
    p: usize,
    lambda: f64,
    sizing: RidgeSizing,
    variant: SketchVariant,
    seed: u64,
) -> Result<RidgeSolution> {
    check_lambda(lambda)?;
    check_dim(x.rows(), b.len())?;
    let (m, variant) = match sizing {
        RidgeSizing::Fixed(m) => (m, variant),
        RidgeSizing::Auto { eps, c } => {
            let s = statistical_dimension_of(&gram_polynomial(x, p), lambda)?;
            match variant {
                SketchVariant::ConstProb => (target_dim_const_prob(p, s, eps, c)?, variant),
                SketchVariant::HighProb { .. } => {
                    let hp = target_dim_high_prob(p, s, eps, x.cols(), x.rows(), 0.1, (c, c))?;
                    (hp.m, SketchVariant::HighProb { sparsity: hp.sparsity })
                }
            }
        }
    };
    let sk = RecursiveSketch::build(x.rows(), p, m, variant, seed)?;
    let sa = sk.apply_matrix(x)?.data;
    let sb = sk.apply_point(b)?;
    let rhs: Vec<f64> = sa.columns().map(|c| dot(c, &sb)).collect();
    let y = sa.gram().add_diagonal(lambda).solve_spd(&rhs)?;

    let fitted = sa.matvec(&y)?;
    let residual: f64 = fitted.iter().zip(&sb).map(|(f, t)| (f - t) * (f - t)).sum();
    Ok(RidgeSolution {
        objective: ridge_objective(x, b, p, lambda, &y)?,
        sketched_objective: residual + lambda * dot(&y, &y),
        coefficients: y,
        m: sk.output_dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{self_tensor, SizeGuard};

    fn data(seed: u64) -> (DenseMatrix, Vec<f64>) {
        let mut rng = crate::hashing::SeedPath::new(seed).rng();
        use rand::Rng;
        let x = DenseMatrix::from_fn(4, 6, |_, _| rng.gen_range(-1.0..1.0));
        let b: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (x, b)
    }

    #[test]
    fn objective_matches_materialized_form() {
        let g = SizeGuard::new(1 << 20);
        let (x, b) = data(1);
        let y: Vec<f64> = (0..6).map(|i| 0.1 * i as f64 - 0.2).collect();
        let cols: Vec<Vec<f64>> = x.columns().map(|c| self_tensor(c, 3, &g).unwrap()).collect();
        let a = DenseMatrix::from_columns(64, &cols).unwrap();
        let phi = self_tensor(&b, 3, &g).unwrap();
        let ay = a.matvec(&y).unwrap();
        let direct: f64 = ay.iter().zip(&phi).map(|(u, v)| (u - v) * (u - v)).sum::<f64>() + 0.7 * dot(&y, &y);
        let trick = ridge_objective(&x, &b, 3, 0.7, &y).unwrap();
        assert!((direct - trick).abs() < 1e-10 * direct.max(1.0));
    }

    #[test]
    fn exact_solution_is_stationary() {
        let (x, b) = data(2);
        let sol = exact_ridge_regression(&x, &b, 2, 0.3).unwrap();
        for k in 0..6 {
            for h in [1e-4, -1e-4] {
                let mut y = sol.coefficients.clone();
                y[k] += h;
                assert!(ridge_objective(&x, &b, 2, 0.3, &y).unwrap() >= sol.objective);
            }
        }
    }

    #[test]
    fn limits() {
        let (x, b) = data(3);
        let sol = exact_ridge_regression(&x, &b, 2, 1e12).unwrap();
        assert!(sol.coefficients.iter().all(|v| v.abs() < 1e-9));
        assert!((sol.objective - dot(&b, &b).powi(2)).abs() < 1e-6);

        let b0 = x.col(0).to_vec();
        let sol = exact_ridge_regression(&x, &b0, 2, 1e-9).unwrap();
        assert!(sol.objective < 1e-6);
        assert!(exact_ridge_regression(&x, &b0, 2, 0.0).is_err());
    }

    #[test]
    fn sketched_solver_is_close_with_large_m() {
        let (x, b) = data(4);
        let exact = exact_ridge_regression(&x, &b, 2, 0.5).unwrap();
        let sk = sketch_ridge_regression(&x, &b, 2, 0.5, RidgeSizing::Fixed(4096), SketchVariant::ConstProb, 7).unwrap();
        assert_eq!(sk.m, 4096);
        assert!(sk.objective >= exact.objective * (1.0 - 1e-12));
        assert!(sk.objective <= exact.objective * 1.2);
        let auto = sketch_ridge_regression(
            &x,
            &b,
            2,
            0.5,
            RidgeSizing::Auto { eps: 0.5, c: 1e-3 },
            SketchVariant::HighProb { sparsity: 1 },
            7,
        );
        assert!(auto.is_ok());
    }
}
