//! The file-producing subcommands. Each is a pure function of its input
//! files and arguments; wall-clock timing is reported by the caller on stderr
//! and never enters an output file.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tskit::kernel::{
    exact_ridge_regression, gram_gaussian, gram_polynomial, sketch_ridge_regression, statistical_dimension_of,
    taylor_tail, DegreeSizing, FeatureVariant, GaussianFeatureMap, GaussianMapConfig, KernelJob, RidgeSizing,
};
use tskit::recursive::{target_dim_const_prob_delta, target_dim_high_prob, DEFAULT_CONST_PROB_C, DEFAULT_HIGH_PROB_C};
use tskit::tensor::{dot, DenseMatrix, SparseVector};
use tskit::{RecursiveSketch, SketchVariant};

use crate::args::{GaussianArgs, KrrArgs, SketchArgs, VariantArg, DEFAULT_SPARSITY};
use crate::error::CliError;
use crate::io::{read_matrix, write_bytes, write_matrix};

pub const MANIFEST_TAG: &str = "kmat_manifest_v1";

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

fn nnz(x: &DenseMatrix) -> usize {
    x.data().iter().filter(|v| **v != 0.0).count()
}

fn recursive_variant(v: VariantArg, sparsity: Option<usize>, m: usize) -> SketchVariant {
    match v {
        VariantArg::ConstProb => SketchVariant::ConstProb,
        VariantArg::HighProb => SketchVariant::HighProb {
            sparsity: sparsity.unwrap_or(DEFAULT_SPARSITY.min(m.max(1))),
        },
    }
}

fn require_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive (got {v})")))
    }
}

/// Inputs with at most a quarter of their entries nonzero go through the
/// sparse leaf path.
pub fn prefers_sparse(x: &DenseMatrix) -> bool {
    4 * nnz(x) <= x.rows() * x.cols()
}

/// `Π^p X` for the columns of `X`, as written by the `sketch` command.
pub fn sketch_matrix(sk: &RecursiveSketch, x: &DenseMatrix) -> Result<DenseMatrix, CliError> {
    let out = if prefers_sparse(x) {
        let cols: Vec<SparseVector> = x.columns().map(SparseVector::from_dense).collect();
        sk.apply_matrix_sparse(&cols)?
    } else {
        sk.apply_matrix(x)?
    };
    Ok(out.data)
}

pub fn sketch(a: &SketchArgs) -> Result<Value, CliError> {
    let x = read_matrix(&a.input)?;
    let (d, n) = x.shape();
    let p = a.p;
    if p == 0 {
        return Err(CliError::Usage("--p must be at least 1".into()));
    }
    let (m, variant, s_lambda) = match a.m {
        Some(m) => (m, recursive_variant(a.variant, a.sparsity, m), None),
        None => {
            let lambda = a
                .lambda
                .ok_or_else(|| CliError::Usage("either --m or --lambda is required".into()))?;
            require_positive("lambda", lambda)?;
            let s = statistical_dimension_of(&gram_polynomial(&x, p), lambda)?;
            match a.variant {
                VariantArg::ConstProb => (
                    target_dim_const_prob_delta(p, s, a.eps, a.delta, a.const_c)?,
                    SketchVariant::ConstProb,
                    Some(s),
                ),
                VariantArg::HighProb => {
                    let hp = target_dim_high_prob(p, s, a.eps, n, d, a.delta, (a.const_c1, a.const_c2))?;
                    let sparsity = a.sparsity.unwrap_or(hp.sparsity);
                    (hp.m, SketchVariant::HighProb { sparsity }, Some(s))
                }
            }
        }
    };
    let sk = RecursiveSketch::build(d, p, m, variant, a.common.seed)?;
    let out = sketch_matrix(&sk, &x)?;
    write_matrix(&a.output, &out, a.common.format)?;
    let manifest = json!({
        "tag": MANIFEST_TAG,
        "command": "sketch",
        "seed": a.common.seed,
        "variant": variant.name(),
        "p": p,
        "d": d,
        "n": n,
        "m": sk.output_dim(),
        "s": variant.sparsity(),
        "nnz": nnz(&x),
        "leaf_input": if prefers_sparse(&x) { "sparse" } else { "dense" },
        "s_lambda": s_lambda,
        "format": a.common.format.name(),
    });
    write_json(&manifest_path(&a.output), &manifest)?;
    Ok(manifest)
}

pub fn gaussian_features(a: &GaussianArgs) -> Result<Value, CliError> {
    let x = read_matrix(&a.input)?;
    let (d, n) = x.shape();
    require_positive("lambda", a.lambda)?;
    let radius = match a.radius {
        Some(r) => r,
        None => x.columns().map(|c| dot(c, c)).fold(0.0, f64::max),
    };
    let job = KernelJob::new(a.lambda, a.eps, a.delta, radius)?;
    let variant = match a.variant {
        VariantArg::ConstProb => FeatureVariant::ConstProb,
        VariantArg::HighProb => FeatureVariant::HighProb,
    };
    let fixed_sparsity = a.m.map(|m| a.sparsity.unwrap_or(DEFAULT_SPARSITY.min(m.max(1))));
    let (sizing, s_lambda) = match (a.m, fixed_sparsity) {
        (Some(m), Some(sparsity)) => (DegreeSizing::Fixed { m, sparsity }, None),
        _ => {
            let c1 = a.const_c1.unwrap_or(match variant {
                FeatureVariant::ConstProb => DEFAULT_CONST_PROB_C,
                FeatureVariant::HighProb => DEFAULT_HIGH_PROB_C.0,
            });
            let s = statistical_dimension_of(&gram_gaussian(&x), a.lambda)?;
            (DegreeSizing::Theory { c1, c2: a.const_c2 }, Some(s))
        }
    };
    let map = GaussianFeatureMap::build(GaussianMapConfig {
        d,
        n,
        job,
        s_lambda: s_lambda.unwrap_or(1.0),
        variant,
        sizing,
        seed: a.common.seed,
    })?;
    let out = map.apply(&x)?;
    write_matrix(&a.output, &out.data, a.common.format)?;
    let q = map.degree();
    let manifest = json!({
        "tag": MANIFEST_TAG,
        "command": "gaussian-features",
        "seed": a.common.seed,
        "variant": a.variant_name(),
        "d": d,
        "n": n,
        "m": map.output_dim(),
        "s": fixed_sparsity.filter(|_| variant == FeatureVariant::HighProb),
        "nnz": nnz(&x),
        "lambda": a.lambda,
        "eps": a.eps,
        "delta": a.delta,
        "radius": radius,
        "s_lambda": s_lambda,
        "q_taylor": q,
        "block_dims": map.block_dims(),
        "taylor_tail": taylor_tail(q, radius, n),
        "tail_target": a.eps * a.lambda / 2.0,
        "format": a.common.format.name(),
    });
    write_json(&manifest_path(&a.output), &manifest)?;
    Ok(manifest)
}

impl GaussianArgs {
    fn variant_name(&self) -> &'static str {
        match self.variant {
            VariantArg::ConstProb => "const-prob",
            VariantArg::HighProb => "high-prob",
        }
    }
}

fn vector_from(m: &DenseMatrix) -> Result<Vec<f64>, CliError> {
    if m.cols() == 1 || m.rows() == 1 {
        Ok(m.data().to_vec())
    } else {
        Err(CliError::Validation(format!(
            "--b must be a single row or column (got {}x{})",
            m.rows(),
            m.cols()
        )))
    }
}

/// Returns the JSON report printed on stdout.
pub fn krr(a: &KrrArgs) -> Result<Value, CliError> {
    require_positive("lambda", a.lambda)?;
    if a.p == 0 {
        return Err(CliError::Usage("--p must be at least 1".into()));
    }
    let x = read_matrix(&a.input)?;
    let b = vector_from(&read_matrix(&a.b)?)?;
    let exact = exact_ridge_regression(&x, &b, a.p, a.lambda)?;
    let sizing = match a.m {
        Some(m) => RidgeSizing::Fixed(m),
        None => RidgeSizing::Auto {
            eps: a.eps,
            c: a.const_c,
        },
    };
    let variant = recursive_variant(a.variant, a.sparsity, a.m.unwrap_or(usize::MAX));
    let sol = sketch_ridge_regression(&x, &b, a.p, a.lambda, sizing, variant, a.common.seed)?;
    let coefficients = DenseMatrix::new(sol.coefficients.len(), 1, sol.coefficients.clone())?;
    write_matrix(&a.output, &coefficients, a.common.format)?;
    let ratio = if exact.objective > 0.0 {
        sol.objective / exact.objective
    } else if sol.objective == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    let report = json!({
        "objective_exact_opt": exact.objective,
        "objective_sketched_solution": sol.objective,
        "ratio": ratio,
    });
    let manifest = json!({
        "tag": MANIFEST_TAG,
        "command": "krr",
        "seed": a.common.seed,
        "variant": variant.name(),
        "p": a.p,
        "d": x.rows(),
        "n": x.cols(),
        "m": sol.m,
        "s": a.m.and(variant.sparsity()),
        "nnz": nnz(&x),
        "lambda": a.lambda,
        "objective_exact_opt": exact.objective,
        "objective_sketched_solution": sol.objective,
        "objective_in_sketch_space": sol.sketched_objective,
        "ratio": ratio,
        "format": a.common.format.name(),
    });
    write_json(&manifest_path(&a.output), &manifest)?;
    Ok(report)
}
