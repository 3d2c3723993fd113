//! Timing runs behind `tskit bench`.
//!
//! Three experiments, each reporting the median wall time over `reps`
//! repetitions after one untimed warm-up run: dense inputs at `n` and `2n`
//! columns, dense inputs at degree `p` and `2p`, and 1%- and 2%-dense sparse
//! inputs where only the leaf phase is timed. The guarded-materialization counters are read before and after.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use tskit::hashing::SeedPath;
use tskit::tensor::{materialization_stats, DenseMatrix, SparseVector};
use tskit::{RecursiveSketch, SketchVariant};

use crate::error::CliError;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub d: usize,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub sparse_d: usize,
    pub sparse_n: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            d: 64,
            n: 2000,
            p: 2,
            m: 256,
            sparse_d: 200_000,
            sparse_n: 256,
            reps: 5,
            seed: crate::args::DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BenchRow {
    pub experiment: &'static str,
    pub variant: &'static str,
    pub phase: &'static str,
    pub d: usize,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub s: Option<usize>,
    pub nnz: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Guarded materializations (count, elements) that happened during the runs.
    pub materializations: (u64, u64),
}

impl BenchReport {
    /// `wall_ms` of the row matching the predicate.
    pub fn time(&self, pred: impl Fn(&BenchRow) -> bool) -> Option<f64> {
        self.rows.iter().find(|r| pred(r)).map(|r| r.wall_ms)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

fn median_ms(reps: usize, mut f: impl FnMut() -> Result<(), CliError>) -> Result<f64, CliError> {
    f()?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        f()?;
        times.push(t.elapsed().as_secs_f64() * 1e3);
    }
    times.sort_by(|a, b| a.total_cmp(b));
    Ok(times[times.len() / 2])
}

fn dense_input(seed: &SeedPath, d: usize, n: usize) -> DenseMatrix {
    let mut rng = seed.rng();
    DenseMatrix::from_fn(d, n, |_, _| rng.gen_range(-1.0..1.0))
}

/// `n` columns of dimension `d`, each with exactly `⌈density·d⌉` nonzeros.
pub fn sparse_input(seed: &SeedPath, d: usize, n: usize, density: f64) -> Vec<SparseVector> {
    let k = ((density * d as f64).ceil() as usize).clamp(1, d);
    (0..n as u64)
        .map(|j| {
            let mut rng = seed.derive("column", 0, j).rng();
            let mut idx = rand::seq::index::sample(&mut rng, d, k).into_vec();
            idx.sort_unstable();
            let entries = idx.into_iter().map(|i| (i, rng.gen_range(-1.0..1.0))).collect();
            SparseVector::new(d, entries).expect("indices in range")
        })
        .collect()
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, CliError> {
    let before = materialization_stats();
    let root = SeedPath::new(cfg.seed);
    let mut rows = Vec::new();
    let reps = cfg.reps;

    let dense_row = |experiment, p: usize, n: usize, rows: &mut Vec<BenchRow>| -> Result<(), CliError> {
        let x = dense_input(&root.derive("dense", p as u64, n as u64), cfg.d, n);
        let sk = RecursiveSketch::build(cfg.d, p, cfg.m, SketchVariant::ConstProb, cfg.seed)?;
        let wall_ms = median_ms(reps, || sk.apply_matrix(&x).map(|_| ()).map_err(Into::into))?;
        rows.push(BenchRow {
            experiment,
            variant: "const-prob",
            phase: "total",
            d: cfg.d,
            n,
            p,
            m: sk.output_dim(),
            s: None,
            nnz: cfg.d * n,
            wall_ms,
        });
        Ok(())
    };
    dense_row("n-doubling", cfg.p, cfg.n, &mut rows)?;
    dense_row("n-doubling", cfg.p, 2 * cfg.n, &mut rows)?;
    dense_row("degree", cfg.p, cfg.n, &mut rows)?;
    dense_row("degree", 2 * cfg.p, cfg.n, &mut rows)?;

    for variant in [SketchVariant::ConstProb, SketchVariant::HighProb { sparsity: 4 }] {
        let sk = RecursiveSketch::build(cfg.sparse_d, cfg.p, cfg.m, variant, cfg.seed)?;
        for density in [0.01, 0.02] {
            let cols = sparse_input(&root.derive("sparse", 0, (density * 1e4) as u64), cfg.sparse_d, cfg.sparse_n, density);
            let nnz: usize = cols.iter().map(SparseVector::nnz).sum();
            let leaf = median_ms(reps, || {
                cols.par_iter()
                    .map(|c| sk.leaf_outputs_sparse(c).map(|_| ()))
                    .collect::<tskit::Result<()>>()
                    .map_err(Into::into)
            })?;
            let total = median_ms(reps, || sk.apply_matrix_sparse(&cols).map(|_| ()).map_err(Into::into))?;
            for (phase, wall_ms) in [("leaf", leaf), ("total", total)] {
                rows.push(BenchRow {
                    experiment: "nnz-doubling",
                    variant: variant.name(),
                    phase,
                    d: cfg.sparse_d,
                    n: cfg.sparse_n,
                    p: cfg.p,
                    m: sk.output_dim(),
                    s: variant.sparsity(),
                    nnz,
                    wall_ms,
                });
            }
        }
    }

    let after = materialization_stats();
    Ok(BenchReport {
        rows,
        materializations: (after.0 - before.0, after.1 - before.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_input_density() {
        let cols = sparse_input(&SeedPath::new(1), 1000, 3, 0.01);
        assert!(cols.iter().all(|c| c.nnz() == 10 && c.dim() == 1000));
    }

    #[test]
    fn tiny_bench_produces_all_rows() {
        let cfg = BenchConfig {
            d: 8,
            n: 16,
            p: 2,
            m: 16,
            sparse_d: 1000,
            sparse_n: 4,
            reps: 1,
            seed: 1,
        };
        let r = run_bench(&cfg).unwrap();
        assert_eq!(r.rows.len(), 12);
        let csv = String::from_utf8(r.to_csv().unwrap()).unwrap();
        assert!(csv.starts_with("experiment,variant,phase,d,n,p,m,s,nnz,wall_ms\n"));
        assert_eq!(csv.lines().count(), 13);
    }
}
