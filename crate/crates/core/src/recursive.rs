//! The recursive tensor sketch.
//!
//! For degree `p` let `q = 2^⌈log₂ p⌉`. Leaves `T_1..T_q : R^d → R^m` reduce
//! the input; level by level, internal nodes `S : R^{m²} → R^m` merge
//! adjacent pairs of children until a single `R^m` vector remains. When
//! `p < q` the leaves `T_{p+1}..T_q` are fed `e₁`, which realizes
//! `Π^p(v) = Π^q(v ⊗ e₁^{⊗(q−p)})`.

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::hashing::SeedPath;
use crate::sketch::{CountSketch, Osnap, OsnapVariant, PairSketch, Sketch, TensorSketch2, TensorSrht};
use crate::tensor::{checked_pow, kron_all, kron_matrix, DenseMatrix, SizeGuard, SparseVector};

/// Which base sketches populate the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SketchVariant {
    /// CountSketch leaves, TensorSketch internal nodes (constant success probability).
    ConstProb,
    /// OSNAP leaves with the given column sparsity, TensorSRHT internal nodes.
    HighProb { sparsity: usize },
}

impl SketchVariant {
    pub fn name(&self) -> &'static str {
        match self {
            SketchVariant::ConstProb => "const-prob",
            SketchVariant::HighProb { .. } => "high-prob",
        }
    }

    pub fn sparsity(&self) -> Option<usize> {
        match self {
            SketchVariant::ConstProb => None,
            SketchVariant::HighProb { sparsity } => Some(*sparsity),
        }
    }
}

/// Everything needed to regenerate a [`RecursiveSketch`] bit for bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchConfig {
    pub d: usize,
    pub p: usize,
    /// Requested target dimension; ConstProb rounds it up to a power of two.
    pub m: usize,
    pub variant: SketchVariant,
    pub seed: u64,
    pub osnap: OsnapVariant,
}

impl SketchConfig {
    pub fn new(d: usize, p: usize, m: usize, variant: SketchVariant, seed: u64) -> Self {
        Self {
            d,
            p,
            m,
            variant,
            seed,
            osnap: OsnapVariant::ExactSparsity,
        }
    }
}

#[derive(Clone, Debug)]
enum Leaf {
    Count(CountSketch),
    Osnap(Osnap),
}

impl Leaf {
    fn as_sketch(&self) -> &dyn Sketch {
        match self {
            Leaf::Count(s) => s,
            Leaf::Osnap(s) => s,
        }
    }
}

#[derive(Clone, Debug)]
enum Internal {
    Tensor(TensorSketch2),
    Srht(TensorSrht),
}

impl Internal {
    fn apply_pair_into(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        match self {
            Internal::Tensor(s) => s.apply_pair_into(u, v, out),
            Internal::Srht(s) => s.apply_pair_into(u, v, out),
        }
    }

    fn explicit_matrix(&self, guard: &SizeGuard) -> Result<DenseMatrix> {
        match self {
            Internal::Tensor(s) => s.explicit_matrix(guard),
            Internal::Srht(s) => s.explicit_matrix(guard),
        }
    }
}

/// Provenance of a sketched matrix: enough to rebuild the sketch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    pub variant: SketchVariant,
    pub p: usize,
    pub d: usize,
    pub m: usize,
}

/// `Π^p A` for the columns of some input, with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchedMatrix {
    pub data: DenseMatrix,
    pub provenance: Provenance,
}

/// Instantiated sketch tree for `Π^p : R^{d^p} → R^m`.
#[derive(Clone, Debug)]
pub struct RecursiveSketch {
    config: SketchConfig,
    q: usize,
    m: usize,
    leaves: Vec<Leaf>,
    /// `levels[0]` merges the leaf outputs (`q/2` nodes); the last level has one node.
    levels: Vec<Vec<Internal>>,
    /// `T_j e₁` for the padding leaves `j = p+1..q`.
    padding: Vec<Vec<f64>>,
}

impl RecursiveSketch {
    pub fn build(d: usize, p: usize, m: usize, variant: SketchVariant, master_seed: u64) -> Result<Self> {
        Self::from_config(SketchConfig::new(d, p, m, variant, master_seed))
    }

    pub fn from_config(config: SketchConfig) -> Result<Self> {
        let SketchConfig { d, p, m, variant, seed, osnap } = config;
        if d == 0 {
            return Err(Error::InvalidParameter("input dimension must be positive".into()));
        }
        if p < 2 {
            return Err(Error::InvalidParameter(format!("degree must be at least 2 (got {p})")));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("target dimension must be positive".into()));
        }
        let q = p.next_power_of_two();
        let m = match variant {
            SketchVariant::ConstProb => m.next_power_of_two(),
            SketchVariant::HighProb { sparsity } => {
                if sparsity == 0 || sparsity > m {
                    return Err(Error::InvalidParameter(format!(
                        "OSNAP sparsity {sparsity} must lie in [1, m = {m}]"
                    )));
                }
                m
            }
        };
        let root = SeedPath::new(seed);

        let leaves = (1..=q)
            .map(|j| {
                let s = root.derive("leaf", 0, j as u64);
                Ok(match variant {
                    SketchVariant::ConstProb => Leaf::Count(CountSketch::new(d, m, &s)?),
                    SketchVariant::HighProb { sparsity } => Leaf::Osnap(Osnap::new(d, m, sparsity, osnap, &s)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut levels = Vec::new();
        let mut width = q;
        while width > 1 {
            // nodes S^{width}_1 .. S^{width}_{width/2}
            let nodes = (1..=width / 2)
                .map(|j| {
                    let s = root.derive("internal", width as u64, j as u64);
                    Ok(match variant {
                        SketchVariant::ConstProb => Internal::Tensor(TensorSketch2::new(m, m, &s)?),
                        SketchVariant::HighProb { .. } => Internal::Srht(TensorSrht::new(m, m, &s)?),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            levels.push(nodes);
            width /= 2;
        }

        let mut e1 = vec![0.0; d];
        e1[0] = 1.0;
        let padding = leaves[p..]
            .iter()
            .map(|l| l.as_sketch().apply(&e1))
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            config: SketchConfig { m, ..config },
            q,
            m,
            leaves,
            levels,
            padding,
        })
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.config.d
    }

    pub fn degree(&self) -> usize {
        self.config.p
    }

    /// Padded degree `q = 2^⌈log₂ p⌉`.
    pub fn padded_degree(&self) -> usize {
        self.q
    }

    pub fn output_dim(&self) -> usize {
        self.m
    }

    pub fn variant(&self) -> SketchVariant {
        self.config.variant
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Node counts per level, from the leaves' parents up to the root.
    pub fn internal_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.len()).collect()
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            seed: self.config.seed,
            variant: self.config.variant,
            p: self.config.p,
            d: self.config.d,
            m: self.m,
        }
    }

    /// Leaf outputs `Y⁰_1..Y⁰_q`, concatenated (`q·m` values).
    pub fn leaf_outputs(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.config.d, x.len())?;
        let mut y = vec![0.0; self.q * self.m];
        for (leaf, block) in self.leaves.iter().zip(y.chunks_exact_mut(self.m)).take(self.config.p) {
            leaf.as_sketch().apply_into(x, block);
        }
        self.fill_padding(&mut y);
        Ok(y)
    }

    /// Sparse-input version of [`Self::leaf_outputs`]; cost proportional to `nnz(x)`.
    pub fn leaf_outputs_sparse(&self, x: &SparseVector) -> Result<Vec<f64>> {
        check_dim(self.config.d, x.dim())?;
        let mut y = vec![0.0; self.q * self.m];
        for (leaf, block) in self.leaves.iter().zip(y.chunks_exact_mut(self.m)).take(self.config.p) {
            leaf.as_sketch().apply_sparse_into(x, block);
        }
        self.fill_padding(&mut y);
        Ok(y)
    }

    fn fill_padding(&self, y: &mut [f64]) {
        let p = self.config.p;
        for (k, pad) in self.padding.iter().enumerate() {
            y[(p + k) * self.m..(p + k + 1) * self.m].copy_from_slice(pad);
        }
    }

    /// Runs the internal levels on `q·m` leaf outputs:
    /// `Y^l_j = S_j(Y^{l−1}_{2j−1} ⊗ Y^{l−1}_{2j})`, two ping-pong buffers.
    pub fn combine(&self, leaf_outputs: Vec<f64>) -> Result<Vec<f64>> {
        let m = self.m;
        check_dim(self.q * m, leaf_outputs.len())?;
        let mut cur = leaf_outputs;
        let mut next = vec![0.0; (self.q / 2).max(1) * m];
        let mut width = self.q;
        for level in &self.levels {
            for (j, node) in level.iter().enumerate() {
                let (left, right) = cur[2 * j * m..(2 * j + 2) * m].split_at(m);
                node.apply_pair_into(left, right, &mut next[j * m..(j + 1) * m]);
            }
            width /= 2;
            std::mem::swap(&mut cur, &mut next);
        }
        debug_assert_eq!(width, 1);
        cur.truncate(m);
        Ok(cur)
    }

    /// `Π^p(x^{⊗p})` without forming `x^{⊗p}`.
    pub fn apply_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.combine(self.leaf_outputs(x)?)
    }

    pub fn apply_sparse(&self, x: &SparseVector) -> Result<Vec<f64>> {
        self.combine(self.leaf_outputs_sparse(x)?)
    }

    /// `Π^p(x_1 ⊗ x_2 ⊗ ⋯ ⊗ x_p)` for `p` possibly distinct vectors.
    pub fn apply_multilinear(&self, xs: &[&[f64]]) -> Result<Vec<f64>> {
        check_dim(self.config.p, xs.len())?;
        let mut y = vec![0.0; self.q * self.m];
        for ((leaf, block), x) in self.leaves.iter().zip(y.chunks_exact_mut(self.m)).zip(xs) {
            check_dim(self.config.d, x.len())?;
            leaf.as_sketch().apply_into(x, block);
        }
        self.fill_padding(&mut y);
        self.combine(y)
    }

    /// `Π^p v` for an arbitrary materialized `v ∈ R^{d^p}` (first factor fastest),
    /// by linearity over its nonzero basis tensors. Oracle-scale inputs only.
    pub fn apply_tensor(&self, v: &[f64], guard: &SizeGuard) -> Result<Vec<f64>> {
        let len = guard.admit(checked_pow(self.config.d, self.config.p))?;
        check_dim(len, v.len())?;
        let mut out = vec![0.0; self.m];
        self.accumulate_tensor(v.iter().copied().enumerate(), &mut out);
        Ok(out)
    }

    fn accumulate_tensor(&self, entries: impl Iterator<Item = (usize, f64)>, out: &mut [f64]) {
        let (d, p, m) = (self.config.d, self.config.p, self.m);
        let mut y = vec![0.0; self.q * m];
        for (idx, coef) in entries {
            if coef == 0.0 {
                continue;
            }
            // a basis tensor e_{i_1} ⊗ ⋯ ⊗ e_{i_p} reads one column per leaf
            let mut rest = idx;
            for (leaf, block) in self.leaves.iter().zip(y.chunks_exact_mut(m)).take(p) {
                let mut e = vec![0.0; d];
                e[rest % d] = 1.0;
                rest /= d;
                leaf.as_sketch().apply_into(&e, block);
            }
            self.fill_padding(&mut y);
            let z = self.combine(y.clone()).expect("leaf buffer has q·m entries");
            out.iter_mut().zip(&z).for_each(|(o, zi)| *o += coef * zi);
        }
    }

    /// Sketches every column of the `d × n` matrix `X`, columns in parallel.
    pub fn apply_matrix(&self, x: &DenseMatrix) -> Result<SketchedMatrix> {
        check_dim(self.config.d, x.rows())?;
        let cols: Vec<Vec<f64>> = (0..x.cols())
            .into_par_iter()
            .map(|j| self.apply_point(x.col(j)))
            .collect::<Result<_>>()?;
        self.finish(&cols)
    }

    pub fn apply_matrix_sparse(&self, columns: &[SparseVector]) -> Result<SketchedMatrix> {
        let cols: Vec<Vec<f64>> = columns
            .par_iter()
            .map(|c| self.apply_sparse(c))
            .collect::<Result<_>>()?;
        self.finish(&cols)
    }

    fn finish(&self, cols: &[Vec<f64>]) -> Result<SketchedMatrix> {
        Ok(SketchedMatrix {
            data: DenseMatrix::from_columns(self.m, cols)?,
            provenance: self.provenance(),
        })
    }

    /// Leaf matrices with the padding leaves restricted to `e₁` (`m × 1`).
    fn leaf_factors(&self, guard: &SizeGuard) -> Result<Vec<DenseMatrix>> {
        let p = self.config.p;
        self.leaves
            .iter()
            .enumerate()
            .map(|(j, leaf)| {
                let t = leaf.as_sketch().explicit_matrix(guard)?;
                if j < p {
                    Ok(t)
                } else {
                    DenseMatrix::new(self.m, 1, t.col(0).to_vec())
                }
            })
            .collect()
    }

    /// Dense `m × d^p` matrix of `Π^p`, composed from the base sketches'
    /// explicit matrices: `(S^2 ⋯ S^q)·(T_1 × ⋯ × T_p × T_{p+1}e₁ × ⋯ × T_q e₁)`
    /// with `S^l = S^l_1 × ⋯ × S^l_{l/2}`.
    pub fn explicit_matrix(&self, guard: &SizeGuard) -> Result<DenseMatrix> {
        let (d, p) = (self.config.d, self.config.p);
        guard.admit(self.m as u128 * checked_pow(d, p))?;
        let leaves = self.leaf_factors(guard)?;
        let refs: Vec<&DenseMatrix> = leaves.iter().collect();
        let mut acc = kron_all(&refs, guard)?;
        for level in &self.levels {
            let nodes = level
                .iter()
                .map(|n| n.explicit_matrix(guard))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&DenseMatrix> = nodes.iter().collect();
            acc = kron_all(&refs, guard)?.matmul(&acc)?;
        }
        Ok(acc)
    }

    /// Same matrix as [`Self::explicit_matrix`], assembled through the
    /// one-node-at-a-time factorizations
    /// `T^q = M_q ⋯ M_1`, `M_j = I_{d^{q−j}} × T_{q−j+1} × I_{m^{j−1}}` and
    /// `S^l = M_{l/2} ⋯ M_1`, `M_j = I_{m^{l−2j}} × S^l_{l/2−j+1} × I_{m^{j−1}}`,
    /// followed by the padding embedding `v ↦ v ⊗ e₁^{⊗(q−p)}`.
    pub fn explicit_matrix_factored(&self, guard: &SizeGuard) -> Result<DenseMatrix> {
        let (d, p, q, m) = (self.config.d, self.config.p, self.q, self.m);
        let eye = |k: usize| -> Result<DenseMatrix> {
            guard.admit((k as u128) * (k as u128))?;
            Ok(DenseMatrix::identity(k))
        };
        let pow = |b: usize, e: usize| -> Result<usize> {
            usize::try_from(checked_pow(b, e)).map_err(|_| Error::SizeOverflow(format!("{b}^{e}")))
        };

        // padding embedding E : R^{d^p} → R^{d^q}
        let mut e1 = DenseMatrix::zeros(d, 1);
        e1.set(0, 0, 1.0);
        let mut factors = vec![eye(pow(d, p)?)?];
        factors.extend(std::iter::repeat(e1).take(q - p));
        let refs: Vec<&DenseMatrix> = factors.iter().collect();
        let mut acc = kron_all(&refs, guard)?;

        for j in 1..=q {
            let leaf = self.leaves[q - j].as_sketch().explicit_matrix(guard)?;
            let mj = kron_all(&[&eye(pow(d, q - j)?)?, &leaf, &eye(pow(m, j - 1)?)?], guard)?;
            acc = mj.matmul(&acc)?;
        }
        let mut width = q;
        for level in &self.levels {
            for j in 1..=width / 2 {
                let node = level[width / 2 - j].explicit_matrix(guard)?;
                let left = kron_matrix(&eye(pow(m, width - 2 * j)?)?, &node, guard)?;
                let mj = kron_matrix(&left, &eye(pow(m, j - 1)?)?, guard)?;
                acc = mj.matmul(&acc)?;
            }
            width /= 2;
        }
        Ok(acc)
    }
}

/// `Π^p` as a linear map on materialized tensors `R^{d^p} → R^m`. The input
/// dimension saturates at `usize::MAX`; only oracle-scale inputs are sensible.
impl Sketch for RecursiveSketch {
    fn input_dim(&self) -> usize {
        usize::try_from(checked_pow(self.config.d, self.config.p)).unwrap_or(usize::MAX)
    }

    fn output_dim(&self) -> usize {
        self.m
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        self.accumulate_tensor(x.iter().copied().enumerate(), out);
    }

    fn apply_sparse_into(&self, x: &SparseVector, out: &mut [f64]) {
        out.fill(0.0);
        self.accumulate_tensor(x.entries().iter().copied(), out);
    }

    fn explicit_matrix(&self, guard: &SizeGuard) -> Result<DenseMatrix> {
        RecursiveSketch::explicit_matrix(self, guard)
    }
}

/// Smallest power of two `≥ x` (and `≥ 1`), refusing absurd sizes.
fn pow2_at_least(x: f64) -> Result<usize> {
    if !x.is_finite() || x > (1u64 << 40) as f64 {
        return Err(Error::SizeOverflow(format!("target dimension {x:e}")));
    }
    Ok((x.ceil().max(1.0) as usize).next_power_of_two())
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0, 1) (got {v})")))
    }
}

/// Default constant for [`target_dim_const_prob`].
pub const DEFAULT_CONST_PROB_C: f64 = 8.0;
/// Default constants `(c₁, c₂)` for [`target_dim_high_prob`].
pub const DEFAULT_HIGH_PROB_C: (f64, f64) = (0.25, 0.25);

/// Heuristic target dimension for the ConstProb variant: the next power of
/// two `≥ c·p·s_λ²/ε²`. The underlying bound is asymptotic; `c` is a
/// calibration constant, not a derived one. Success probability is the
/// fixed 9/10 of the underlying statement.
pub fn target_dim_const_prob(p: usize, s_lambda: f64, eps: f64, c: f64) -> Result<usize> {
    target_dim_const_prob_delta(p, s_lambda, eps, 0.1, c)
}

/// As [`target_dim_const_prob`] for failure probability `δ`: the bound grows
/// as `1/δ`, normalized so that `δ = 1/10` gives the same value.
pub fn target_dim_const_prob_delta(p: usize, s_lambda: f64, eps: f64, delta: f64, c: f64) -> Result<usize> {
    check_unit_interval("eps", eps)?;
    check_unit_interval("delta", delta)?;
    let s = s_lambda.max(1.0);
    pow2_at_least(c * p as f64 * s * s / (eps * eps) * (0.1 / delta))
}

/// Target dimension and OSNAP sparsity for the HighProb variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HighProbDims {
    pub m: usize,
    pub sparsity: usize,
}

/// `m = next_pow2(c₁·p⁴·L·s_λ/ε²)`, `s = ⌈c₂·p⁴·L/ε²⌉` with
/// `L = log₂³(n·d/(ε·δ))`; `s` is clamped to `[1, m]`.
pub fn target_dim_high_prob(
    p: usize,
    s_lambda: f64,
    eps: f64,
    n: usize,
    d: usize,
    delta: f64,
    (c1, c2): (f64, f64),
) -> Result<HighProbDims> {
    check_unit_interval("eps", eps)?;
    check_unit_interval("delta", delta)?;
    let s_lambda = s_lambda.max(1.0);
    let log = ((n.max(1) * d.max(1)) as f64 / (eps * delta)).log2().max(0.0);
    let base = (p as f64).powi(4) * log.powi(3) / (eps * eps);
    let m = pow2_at_least(c1 * base * s_lambda)?;
    let sparsity = ((c2 * base).ceil().max(1.0) as usize).min(m);
    Ok(HighProbDims { m, sparsity })
}
