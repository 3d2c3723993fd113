use rayon::prelude::*;

use super::gram::gram_polynomial;
use super::taylor::gaussian_degree;
use crate::error::{check_dim, Error, Result};
use crate::hashing::SeedPath;
use crate::recursive::{
    target_dim_const_prob_delta, target_dim_high_prob, Provenance, RecursiveSketch, SketchVariant, SketchedMatrix,
};
use crate::sketch::{CountSketch, Osnap, OsnapVariant, Sketch};
use crate::tensor::{dot, self_tensor, DenseMatrix, SizeGuard};

/// Parameters of a kernel problem: ridge `λ`, accuracy `ε`, failure
/// probability `δ` and the squared-radius bound `r` (`‖x_i‖² ≤ r`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelJob {
    pub lambda: f64,
    pub eps: f64,
    pub delta: f64,
    pub r: f64,
}

impl KernelJob {
    pub fn new(lambda: f64, eps: f64, delta: f64, r: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be positive (got {lambda})")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1) (got {eps})")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1) (got {delta})")));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be finite and >= 0 (got {r})")));
        }
        Ok(Self { lambda, eps, delta, r })
    }
}

/// Which sketch family backs the per-degree blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureVariant {
    ConstProb,
    HighProb,
}

/// How the per-degree target dimensions are chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DegreeSizing {
    /// The recursive module's sizing helpers at accuracy `ε/9` and failure
    /// probability `δ/(q+1)`. ConstProb uses `c1`; HighProb uses `(c1, c2)`.
    Theory { c1: f64, c2: f64 },
    /// The same `m` (and OSNAP sparsity) for every degree `≥ 1`.
    Fixed { m: usize, sparsity: usize },
}

/// Inputs of [`GaussianFeatureMap::build`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianMapConfig {
    pub d: usize,
    /// Dataset size, used for the truncation degree and sizing.
    pub n: usize,
    pub job: KernelJob,
    /// Estimate of the `λ`-statistical dimension of the Gaussian Gram matrix.
    pub s_lambda: f64,
    pub variant: FeatureVariant,
    pub sizing: DegreeSizing,
    pub seed: u64,
}

#[derive(Clone, Debug)]
enum Block {
    Constant,
    Count(CountSketch),
    Osnap(Osnap),
    Tree(RecursiveSketch),
}

impl Block {
    fn dim(&self) -> usize {
        match self {
            Block::Constant => 1,
            Block::Count(s) => s.output_dim(),
            Block::Osnap(s) => s.output_dim(),
            Block::Tree(s) => s.output_dim(),
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            Block::Constant => out[0] = 1.0,
            Block::Count(s) => s.apply_into(x, out),
            Block::Osnap(s) => s.apply_into(x, out),
            Block::Tree(s) => out.copy_from_slice(&s.apply_point(x)?),
        }
        Ok(())
    }

    fn explicit(&self, d: usize, guard: &SizeGuard) -> Result<DenseMatrix> {
        match self {
            Block::Constant => Ok(DenseMatrix::identity(1)),
            Block::Count(s) => s.explicit_matrix(guard),
            Block::Osnap(s) => s.explicit_matrix(guard),
            Block::Tree(s) => {
                let e = s.explicit_matrix(guard)?;
                debug_assert_eq!(e.cols(), d.pow(s.degree() as u32));
                Ok(e)
            }
        }
    }
}

/// `S_g(x) = e^{−‖x‖²/2}·(Π⁰(1) ⊕ Π¹x ⊕ Π²x^{⊗2}/√2! ⊕ ⋯ ⊕ Π^q x^{⊗q}/√q!)`.
#[derive(Clone, Debug)]
pub struct GaussianFeatureMap {
    config: GaussianMapConfig,
    q: usize,
    blocks: Vec<Block>,
    offsets: Vec<usize>,
}

impl GaussianFeatureMap {
    pub fn build(config: GaussianMapConfig) -> Result<Self> {
        let GaussianMapConfig {
            d,
            n,
            job,
            s_lambda,
            variant,
            sizing,
            seed,
        } = config;
        if d == 0 {
            return Err(Error::InvalidParameter("input dimension must be positive".into()));
        }
        let q = gaussian_degree(job.r, n, job.eps, job.lambda)?;
        let eps_l = job.eps / 9.0;
        let delta_l = job.delta / (q + 1) as f64;
        let dims = |l: usize| -> Result<(usize, usize)> {
            match sizing {
                DegreeSizing::Fixed { m, sparsity } => Ok((m, sparsity)),
                DegreeSizing::Theory { c1, c2 } => match variant {
                    FeatureVariant::ConstProb => Ok((target_dim_const_prob_delta(l, s_lambda, eps_l, delta_l, c1)?, 1)),
                    FeatureVariant::HighProb => {
                        let hp = target_dim_high_prob(l, s_lambda, eps_l, n, d, delta_l, (c1, c2))?;
                        Ok((hp.m, hp.sparsity))
                    }
                },
            }
        };
        let root = SeedPath::new(seed);
        let mut blocks = vec![Block::Constant];
        for l in 1..=q {
            let (m, s) = dims(l)?;
            let path = root.derive("degree", 0, l as u64);
            blocks.push(match (l, variant) {
                (1, FeatureVariant::ConstProb) => Block::Count(CountSketch::new(d, m, &path)?),
                (1, FeatureVariant::HighProb) => Block::Osnap(Osnap::new(d, m, s, OsnapVariant::ExactSparsity, &path)?),
                (_, FeatureVariant::ConstProb) => {
                    Block::Tree(RecursiveSketch::build(d, l, m, SketchVariant::ConstProb, path.value())?)
                }
                (_, FeatureVariant::HighProb) => Block::Tree(RecursiveSketch::build(
                    d,
                    l,
                    m,
                    SketchVariant::HighProb { sparsity: s },
                    path.value(),
                )?),
            });
        }
        let mut offsets = vec![0];
        for b in &blocks {
            offsets.push(offsets.last().unwrap() + b.dim());
        }
        Ok(Self {
            config,
            q,
            blocks,
            offsets,
        })
    }

    pub fn config(&self) -> &GaussianMapConfig {
        &self.config
    }

    /// Taylor truncation degree.
    pub fn degree(&self) -> usize {
        self.q
    }

    /// Output dimensions `m_0..m_q`.
    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::dim).collect()
    }

    /// `m = Σ_l m_l`.
    pub fn output_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn check_radius(&self, j: usize, x: &[f64]) -> Result<f64> {
        check_dim(self.config.d, x.len())?;
        let norm_sq = dot(x, x);
        let radius = self.config.job.r;
        if norm_sq > radius * (1.0 + 1e-12) {
            return Err(Error::RadiusViolation {
                column: j,
                norm_sq,
                radius,
            });
        }
        Ok(norm_sq)
    }

    /// `S_g(x)` for one point; `column` only labels a radius violation.
    pub fn apply_point(&self, x: &[f64], column: usize) -> Result<Vec<f64>> {
        let norm_sq = self.check_radius(column, x)?;
        let mut out = vec![0.0; self.output_dim()];
        let mut inv_sqrt_fact = 1.0;
        for (l, block) in self.blocks.iter().enumerate() {
            if l > 0 {
                inv_sqrt_fact /= (l as f64).sqrt();
            }
            let seg = &mut out[self.offsets[l]..self.offsets[l + 1]];
            block.apply(x, seg)?;
            seg.iter_mut().for_each(|v| *v *= inv_sqrt_fact);
        }
        let damp = (-norm_sq / 2.0).exp();
        out.iter_mut().for_each(|v| *v *= damp);
        Ok(out)
    }

    /// `S_g(X)`, columns in parallel. The first radius violation (lowest column) is reported.
    pub fn apply(&self, x: &DenseMatrix) -> Result<SketchedMatrix> {
        check_dim(self.config.d, x.rows())?;
        for j in 0..x.cols() {
            self.check_radius(j, x.col(j))?;
        }
        let cols: Vec<Vec<f64>> = (0..x.cols())
            .into_par_iter()
            .map(|j| self.apply_point(x.col(j), j))
            .collect::<Result<_>>()?;
        Ok(SketchedMatrix {
            data: DenseMatrix::from_columns(self.output_dim(), &cols)?,
            provenance: Provenance {
                seed: self.config.seed,
                variant: self.top_variant(),
                p: self.q,
                d: self.config.d,
                m: self.output_dim(),
            },
        })
    }

    /// Variant of the highest-degree block, as recorded in provenance.
    fn top_variant(&self) -> SketchVariant {
        match self.blocks.last() {
            Some(Block::Tree(t)) => t.variant(),
            Some(Block::Osnap(o)) => SketchVariant::HighProb { sparsity: o.sparsity() },
            _ => match self.config.variant {
                FeatureVariant::ConstProb => SketchVariant::ConstProb,
                FeatureVariant::HighProb => SketchVariant::HighProb { sparsity: 1 },
            },
        }
    }

    /// Explicit per-degree matrices `Π^l` (`m_l × d^l`), for oracle checks.
    pub fn explicit_blocks(&self, guard: &SizeGuard) -> Result<Vec<DenseMatrix>> {
        self.blocks.iter().map(|b| b.explicit(self.config.d, guard)).collect()
    }
}

/// Exact truncated feature vector `e^{−‖x‖²/2}·(x^{⊗0} ⊕ x^{⊗1}/√1! ⊕ ⋯ ⊕ x^{⊗q}/√q!)`.
pub fn truncated_features(x: &[f64], q: usize, guard: &SizeGuard) -> Result<Vec<f64>> {
    let damp = (-dot(x, x) / 2.0).exp();
    let mut out = Vec::new();
    let mut inv_sqrt_fact = 1.0;
    for l in 0..=q {
        if l > 0 {
            inv_sqrt_fact /= (l as f64).sqrt();
        }
        out.extend(self_tensor(x, l, guard)?.into_iter().map(|v| v * inv_sqrt_fact * damp));
    }
    Ok(out)
}

/// `D·P·D` with `P = Σ_{l≤q} (XᵀX)^{∘l}/l!` and `D = diag(e^{−‖x_i‖²/2})`.
pub fn truncated_gaussian_gram(x: &DenseMatrix, q: usize) -> DenseMatrix {
    let n = x.cols();
    let mut p = DenseMatrix::zeros(n, n);
    let mut fact = 1.0;
    for l in 0..=q {
        if l > 0 {
            fact *= l as f64;
        }
        p = p.add(&gram_polynomial(x, l).scale(1.0 / fact)).expect("same shape");
    }
    let damp: Vec<f64> = x.columns().map(|c| (-dot(c, c) / 2.0).exp()).collect();
    DenseMatrix::from_fn(n, n, |i, j| damp[i] * p.get(i, j) * damp[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{gram_gaussian, ose_spectral_error, taylor_tail};
    use crate::oracle::operator_norm;

    fn dataset(seed: u64, d: usize, n: usize, r: f64) -> DenseMatrix {
        let mut rng = SeedPath::new(seed).rng();
        use rand::Rng;
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let scale = (r * rng.gen_range(0.2..1.0) / dot(&v, &v)).sqrt();
                v.into_iter().map(|a| a * scale).collect()
            })
            .collect();
        DenseMatrix::from_columns(d, &cols).unwrap()
    }

    fn config(d: usize, n: usize, r: f64, m: usize, variant: FeatureVariant) -> GaussianMapConfig {
        GaussianMapConfig {
            d,
            n,
            job: KernelJob::new(0.1, 0.5, 0.1, r).unwrap(),
            s_lambda: 4.0,
            variant,
            sizing: DegreeSizing::Fixed { m, sparsity: 2 },
            seed: 11,
        }
    }

    #[test]
    fn job_validation() {
        assert!(KernelJob::new(0.0, 0.5, 0.1, 1.0).is_err());
        assert!(KernelJob::new(0.1, 1.0, 0.1, 1.0).is_err());
        assert!(KernelJob::new(0.1, 0.5, 0.0, 1.0).is_err());
        assert!(KernelJob::new(0.1, 0.5, 0.1, -1.0).is_err());
    }

    #[test]
    fn zero_radius_gives_constant_feature() {
        let map = GaussianFeatureMap::build(config(3, 4, 0.0, 8, FeatureVariant::ConstProb)).unwrap();
        assert_eq!(map.degree(), 0);
        assert_eq!(map.block_dims(), vec![1]);
        let x = DenseMatrix::zeros(3, 4);
        let s = map.apply(&x).unwrap();
        assert_eq!(s.data.gram(), DenseMatrix::from_fn(4, 4, |_, _| 1.0));
    }

    #[test]
    fn bookkeeping_and_origin() {
        for v in [FeatureVariant::ConstProb, FeatureVariant::HighProb] {
            let map = GaussianFeatureMap::build(config(3, 8, 1.0, 8, v)).unwrap();
            assert_eq!(map.degree(), 5);
            assert_eq!(map.block_dims().iter().sum::<usize>(), map.output_dim());
            assert_eq!(map.block_dims(), vec![1, 8, 8, 8, 8, 8]);
            let z = map.apply_point(&[0.0; 3], 0).unwrap();
            assert_eq!(z[0], 1.0);
            assert!(z[1..].iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn theory_sizing_splits_accuracy() {
        let mut cfg = config(3, 8, 1.0, 8, FeatureVariant::ConstProb);
        cfg.sizing = DegreeSizing::Theory { c1: 1e-3, c2: 1e-3 };
        let map = GaussianFeatureMap::build(cfg).unwrap();
        let q = map.degree();
        for (l, &m) in map.block_dims().iter().enumerate().skip(1) {
            let expect = target_dim_const_prob_delta(l, 4.0, 0.5 / 9.0, 0.1 / (q + 1) as f64, 1e-3).unwrap();
            assert_eq!(m, expect);
        }
        cfg.variant = FeatureVariant::HighProb;
        cfg.sizing = DegreeSizing::Theory { c1: 1e-9, c2: 1e-9 };
        let map = GaussianFeatureMap::build(cfg).unwrap();
        assert_eq!(map.block_dims().len(), q + 1);
    }

    #[test]
    fn radius_violation_names_column() {
        let map = GaussianFeatureMap::build(config(2, 3, 1.0, 4, FeatureVariant::ConstProb)).unwrap();
        let x = DenseMatrix::from_rows(&[&[0.1, 0.5, 2.0], &[0.1, 0.5, 0.0]]).unwrap();
        match map.apply(&x) {
            Err(Error::RadiusViolation { column, .. }) => assert_eq!(column, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explicit_features_match_truncated_gram() {
        let g = SizeGuard::new(1 << 22);
        let x = dataset(1, 3, 6, 1.0);
        let q = 4;
        let cols: Vec<Vec<f64>> = x.columns().map(|c| truncated_features(c, q, &g).unwrap()).collect();
        let z = DenseMatrix::from_columns(cols[0].len(), &cols).unwrap();
        let dpd = truncated_gaussian_gram(&x, q);
        assert!(z.gram().sub(&dpd).unwrap().frobenius_norm() < 1e-12);
        assert!(ose_spectral_error(&z, &dpd, 0.1).unwrap() < 1e-8);
    }

    #[test]
    fn sketch_matches_explicit_blocks() {
        let g = SizeGuard::new(1 << 22);
        for v in [FeatureVariant::ConstProb, FeatureVariant::HighProb] {
            let mut cfg = config(3, 8, 1.0, 4, v);
            cfg.job.lambda = 0.5;
            let map = GaussianFeatureMap::build(cfg).unwrap();
            assert_eq!(map.degree(), 4);
            let blocks = map.explicit_blocks(&g).unwrap();
            let x = dataset(2, 3, 5, 1.0);
            let fast = map.apply(&x).unwrap().data;
            for j in 0..5 {
                let xj = x.col(j);
                let damp = (-dot(xj, xj) / 2.0).exp();
                let mut slow = Vec::new();
                let mut fact = 1.0;
                for (l, b) in blocks.iter().enumerate() {
                    if l > 0 {
                        fact *= l as f64;
                    }
                    let t = self_tensor(xj, l, &g).unwrap();
                    slow.extend(b.matvec(&t).unwrap().into_iter().map(|v| v * damp / fact.sqrt()));
                }
                let diff = fast.col(j).iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(diff < 1e-12);
            }
        }
    }

    #[test]
    fn truncation_error_within_tail_bound() {
        for (seed, r) in [(1, 0.5), (2, 1.0), (3, 2.0)] {
            let x = dataset(seed, 3, 6, r);
            let g = gram_gaussian(&x);
            let damp: Vec<f64> = x.columns().map(|c| (dot(c, c) / 2.0).exp()).collect();
            // K = D⁻¹GD⁻¹ is the un-damped exponential kernel
            let k = DenseMatrix::from_fn(6, 6, |i, j| damp[i] * g.get(i, j) * damp[j]);
            for q in 0..8 {
                let dpd = truncated_gaussian_gram(&x, q);
                let p = DenseMatrix::from_fn(6, 6, |i, j| damp[i] * dpd.get(i, j) * damp[j]);
                let gap = operator_norm(&k.sub(&p).unwrap().symmetrized()).unwrap();
                assert!(gap <= taylor_tail(q, r, 6) * (1.0 + 1e-10) + 1e-12, "r = {r}, q = {q}");
            }
        }
    }
}
