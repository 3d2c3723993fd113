//! Statistical verification suites behind `tskit verify`.
//!
//! Every suite is deterministic given its seed and trial count, and reports
//! each check as a statistic compared against a threshold.

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use tskit::hashing::SeedPath;
use tskit::kernel::{amp_error, gaussian_degree, gram_polynomial, ose_spectral_error, statistical_dimension_of, taylor_tail};
use tskit::oracle::{
    recursive_moment_probe, spectral_property_test, tensorsketch_variance_probe, tensorsrht_spectral_dim,
    SpectralTestConfig,
};
use tskit::recursive::target_dim_const_prob;
use tskit::sketch::TensorSrht;
use tskit::tensor::{dot, norm2, DenseMatrix};
use tskit::{RecursiveSketch, SketchVariant};

use crate::args::Suite;
use crate::error::CliError;

/// Calibrated constant of the ConstProb sizing rule used by the `ose` suite.
pub const OSE_CONST_C: f64 = 1.0;
/// Calibrated `c` in `m = c·p/ε²` for the `amp` suite.
pub const AMP_CONST_C: f64 = 4.0;
/// Calibrated constant of the TensorSRHT spectral sizing rule.
pub const SPECTRAL_CONST_C: f64 = 0.02;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub relation: &'static str,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            relation: "<=",
            threshold,
            passed: statistic <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            relation: ">=",
            threshold,
            passed: statistic >= threshold,
        }
    }

    pub fn below(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            relation: "<",
            threshold,
            passed: statistic < threshold,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub table: Vec<Value>,
}

impl SuiteReport {
    fn new(suite: &'static str, seed: u64, trials: usize, checks: Vec<Check>, table: Vec<Value>) -> Self {
        Self {
            suite,
            seed,
            trials,
            passed: checks.iter().all(|c| c.passed),
            checks,
            table,
        }
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Unbiased => "unbiased",
        Suite::SecondMoment => "second-moment",
        Suite::Ose => "ose",
        Suite::Amp => "amp",
        Suite::Spectral => "spectral",
        Suite::VarianceProbe => "variance-probe",
        Suite::Tail => "tail",
    }
}

pub fn default_trials(s: Suite) -> usize {
    match s {
        Suite::Unbiased => 100_000,
        Suite::SecondMoment => 20_000,
        Suite::Ose | Suite::Amp | Suite::Spectral => 100,
        Suite::VarianceProbe => 1_000_000,
        Suite::Tail => 0,
    }
}

pub fn run_suite(suite: Suite, trials: Option<usize>, seed: u64) -> Result<SuiteReport, CliError> {
    let t = trials.unwrap_or_else(|| default_trials(suite));
    match suite {
        Suite::Unbiased => unbiased(t, seed),
        Suite::SecondMoment => second_moment(t, seed),
        Suite::Ose => ose(t, seed),
        Suite::Amp => amp(t, seed),
        Suite::Spectral => spectral(t, seed),
        Suite::VarianceProbe => variance_probe(t, seed),
        Suite::Tail => Ok(tail(seed)),
    }
}

fn uniform_vec(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Mean of `⟨Πx^{⊗p}, Πy^{⊗p}⟩` within 4 standard errors of `⟨x,y⟩^p`
/// for `p ∈ {2,3}`, `d = 4`, `m = 16`, both variants and five pairs.
pub fn unbiased(trials: usize, seed: u64) -> Result<SuiteReport, CliError> {
    let root = SeedPath::new(seed);
    let (d, m) = (4usize, 16usize);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..5)
        .map(|k| {
            let mut rng = root.derive("pair", 0, k).rng();
            (uniform_vec(&mut rng, d), uniform_vec(&mut rng, d))
        })
        .collect();
    let mut checks = Vec::new();
    let mut table = Vec::new();
    for p in [2usize, 3] {
        for (vi, variant) in [SketchVariant::ConstProb, SketchVariant::HighProb { sparsity: 4 }].into_iter().enumerate() {
            for (k, (x, y)) in pairs.iter().enumerate() {
                let path = root.derive("unbiased", p as u64, (vi * pairs.len() + k) as u64);
                let est = recursive_moment_probe(p, m, variant, x, y, trials, &path)?;
                let target = (dot(x, y) / (norm2(x) * norm2(y))).powi(p as i32);
                let z = est.z_score(target);
                checks.push(Check::at_most(format!("z p={p} {} pair={k}", variant.name()), z, 4.0));
                table.push(json!({
                    "p": p, "variant": variant.name(), "pair": k,
                    "mean": est.mean, "target": target, "std_err": est.std_err,
                }));
            }
        }
    }
    Ok(SuiteReport::new("unbiased", seed, trials, checks, table))
}

/// `Var·m` of the normalized ConstProb inner product at `m = 64` for
/// `p ∈ {2, 4, 8}`; the growth from `p = 2` to `p = 8` must stay within 8×.
pub fn second_moment(trials: usize, seed: u64) -> Result<SuiteReport, CliError> {
    let root = SeedPath::new(seed);
    let m = 64usize;
    let mut rng = root.derive("pair", 0, 0).rng();
    let (x, y) = (uniform_vec(&mut rng, 8), uniform_vec(&mut rng, 8));
    let mut table = Vec::new();
    let mut scaled = Vec::new();
    for p in [2usize, 4, 8] {
        let est = recursive_moment_probe(p, m, SketchVariant::ConstProb, &x, &y, trials, &root.derive("second", p as u64, 0))?;
        let v = est.variance * m as f64;
        scaled.push(v);
        table.push(json!({ "p": p, "m": m, "mean": est.mean, "scaled_variance": v }));
    }
    let ratio = scaled[2] / scaled[0];
    let checks = vec![Check::at_most("scaled variance ratio p=8 / p=2", ratio, 8.0)];
    Ok(SuiteReport::new("second-moment", seed, trials, checks, table))
}

/// Degree-`q` monolithic TensorSketch on the all-ones vector of `R^64` at
/// `m = 64`: growth of `Var·m` from `q = 2` to `q = 6` of at least `3⁴/4`,
/// and fourth moments above `3^q/(2m²)` within 3 standard errors.
pub fn variance_probe(trials: usize, seed: u64) -> Result<SuiteReport, CliError> {
    let root = SeedPath::new(seed);
    let (d, m) = (64usize, 64usize);
    let mut checks = Vec::new();
    let mut table = Vec::new();
    let mut scaled = Vec::new();
    for q in 2..=6usize {
        let probe = tensorsketch_variance_probe(d, q, m, trials, &root.derive("probe", q as u64, 0))?;
        scaled.push(probe.scaled_variance());
        checks.push(Check::at_least(
            format!("fourth moment + 3se vs 3^q/(2m^2), q={q}"),
            probe.fourth.mean + 3.0 * probe.fourth.std_err,
            probe.lower_bound,
        ));
        table.push(json!({
            "q": q, "d": d, "m": m,
            "mean": probe.second.mean,
            "scaled_variance": probe.scaled_variance(),
            "fourth_moment": probe.fourth.mean,
            "fourth_std_err": probe.fourth.std_err,
            "lower_bound": probe.lower_bound,
        }));
    }
    checks.insert(
        0,
        Check::at_least("scaled variance ratio q=6 / q=2", scaled[4] / scaled[0], 81.0 / 4.0),
    );
    Ok(SuiteReport::new("variance-probe", seed, trials, checks, table))
}

/// Sixteen unit-norm points of `R^32`, fixed independently of any run seed.
pub fn ose_dataset() -> DenseMatrix {
    let mut rng = SeedPath::new(4).rng();
    let cols: Vec<Vec<f64>> = (0..16)
        .map(|_| {
            let v = uniform_vec(&mut rng, 32);
            let s = norm2(&v);
            v.into_iter().map(|a| a / s).collect()
        })
        .collect();
    DenseMatrix::from_columns(32, &cols).expect("rectangular")
}

/// `λ` with `s_λ(K) = target`, by bisection on a log scale.
pub fn lambda_for_statistical_dimension(k: &DenseMatrix, target: f64) -> Result<f64, CliError> {
    let (mut lo, mut hi) = (1e-6f64, 1e6f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if statistical_dimension_of(k, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Fraction of `trials` seeded sketches whose spectral error is at most `eps`.
pub fn ose_pass_count(x: &DenseMatrix, k: &DenseMatrix, lambda: f64, p: usize, m: usize, eps: f64, trials: usize, root: &SeedPath) -> Result<usize, CliError> {
    let mut passes = 0;
    for t in 0..trials as u64 {
        let sk = RecursiveSketch::build(x.rows(), p, m, SketchVariant::ConstProb, root.derive("trial", m as u64, t).value())?;
        if ose_spectral_error(&sk.apply_matrix(x)?.data, k, lambda)? <= eps {
            passes += 1;
        }
    }
    Ok(passes)
}

/// The subspace-embedding sandwich at `ε = 0.5` for `p = 2` on
/// [`ose_dataset`] with `s_λ = 4`: at least 90% of trials pass at the
/// sized `m`, and fewer than 90% at `m/8`.
pub fn ose(trials: usize, seed: u64) -> Result<SuiteReport, CliError> {
    let root = SeedPath::new(seed);
    let (p, eps) = (2usize, 0.5);
    let x = ose_dataset();
    let k = gram_polynomial(&x, p);
    let lambda = lambda_for_statistical_dimension(&k, 4.0)?;
    let s = statistical_dimension_of(&k, lambda)?;
    let m = target_dim_const_prob(p, s, eps, OSE_CONST_C)?;
    let need = 0.9 * trials as f64;
    let full = ose_pass_count(&x, &k, lambda, p, m, eps, trials, &root)?;
    let small = ose_pass_count(&x, &k, lambda, p, (m / 8).max(1), eps, trials, &root)?;
    let checks = vec![
        Check::at_least(format!("passes at m={m}"), full as f64, need),
        Check::below(format!("passes at m/8={}", (m / 8).max(1)), small as f64, need),
    ];
    let table = vec![json!({ "lambda": lambda, "s_lambda": s, "m": m, "passes": full, "passes_m_over_8": small })];
    Ok(SuiteReport::new("ose", seed, trials, checks, table))
}

/// Fixed 16×8 matrices `C`, `D` with entries uniform in `(−1, 1)`.
pub fn amp_dataset() -> (DenseMatrix, DenseMatrix) {
    let mut rng = SeedPath::new(5).rng();
    let c = DenseMatrix::from_fn(16, 8, |_, _| rng.gen_range(-1.0..1.0));
    let d = DenseMatrix::from_fn(16, 8, |_, _| rng.gen_range(-1.0..1.0));
    (c, d)
}

/// Approximate matrix product at `ε = 0.25` with `m = c·p/ε²`, `p = 2`, `d = 4`.
pub fn amp(trials: usize, seed: u64) -> Result<SuiteReport, CliError> {
    let root = SeedPath::new(seed);
    let (p, eps) = (2usize, 0.25);
    let m = (AMP_CONST_C * p as f64 / (eps * eps)).ceil() as usize;
    let (c, d) = amp_dataset();
    let mut errors = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let sk = RecursiveSketch::build(4, p, m, SketchVariant::ConstProb, root.derive("trial", 0, t).value())?;
        errors.push(amp_error(&c, &d, &sk)?);
    }
    let passes = errors.iter().filter(|&&e| e <= eps).count();
    let mean = errors.iter().sum::<f64>() / errors.len().max(1) as f64;
    let checks = vec![Check::at_least(format!("passes at m={m}"), passes as f64, 0.9 * trials as f64)];
    let table = vec![json!({ "m": m, "passes": passes, "mean_error": mean })];
    Ok(SuiteReport::new("amp", seed, trials, checks, table))
}

/// TensorSRHT on eight orthonormal columns of `R^{16²}` with the spectral
/// property at `ε = 0.5`, `δ = 0.1`.
pub fn spectral(trials: usize, seed: u64) -> Result<SuiteReport, CliError> {
    let root = SeedPath::new(seed);
    let (d, n) = (16usize, 8usize);
    let mut rng = SeedPath::new(77).rng();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for _ in 0..n {
        let mut v = uniform_vec(&mut rng, d * d);
        for q in &cols {
            let proj = dot(&v, q);
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= proj * b);
        }
        let nv = norm2(&v);
        cols.push(v.into_iter().map(|a| a / nv).collect());
    }
    let u = DenseMatrix::from_columns(d * d, &cols)?;
    let cfg = SpectralTestConfig::new(n as f64, 1.0, 0.5, 0.1, n)?;
    let m = tensorsrht_spectral_dim(&cfg, d * d, 1, SPECTRAL_CONST_C);
    let report = spectral_property_test(|s| TensorSrht::new(d, m, s), &u, &cfg, trials, &root)?;
    let checks = vec![Check::at_least(format!("pass rate at m={m}"), report.pass_rate, report.target_rate)];
    let worst = report.deviations.iter().cloned().fold(0.0, f64::max);
    let table = vec![json!({ "m": m, "passes": report.passes, "worst_deviation": worst })];
    Ok(SuiteReport::new("spectral", seed, trials, checks, table))
}

/// Taylor-tail anchors: the `e − 1` value, strict decrease in `q`, and the
/// degree selected for `r = 1`, `n = 8`, `ε = 0.5`, `λ = 0.1`.
pub fn tail(seed: u64) -> SuiteReport {
    let mut checks = vec![Check::at_most(
        "|tail(q=0, r=1, n=1) - (e - 1)|",
        (taylor_tail(0, 1.0, 1) - (std::f64::consts::E - 1.0)).abs(),
        1e-14,
    )];
    let mut table = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        let tails: Vec<f64> = (0..20).map(|q| taylor_tail(q, r, 8)).collect();
        let increases = tails.windows(2).filter(|w| !(w[1] < w[0])).count();
        checks.push(Check::at_most(format!("non-decreasing steps, r={r}"), increases as f64, 0.0));
        table.push(json!({ "r": r, "n": 8, "tails": tails }));
    }
    let (eps, lambda) = (0.5, 0.1);
    let target = eps * lambda / 2.0;
    match gaussian_degree(1.0, 8, eps, lambda) {
        Ok(q) => {
            checks.push(Check::at_most(format!("tail at selected q={q}"), taylor_tail(q, 1.0, 8), target));
            if q > 0 {
                checks.push(Check::at_least(
                    format!("tail at q-1={}", q - 1),
                    taylor_tail(q - 1, 1.0, 8),
                    target * (1.0 + f64::EPSILON),
                ));
            }
        }
        Err(_) => checks.push(Check::at_most("degree selection", f64::INFINITY, 0.0)),
    }
    SuiteReport::new("tail", seed, 0, checks, table)
}
