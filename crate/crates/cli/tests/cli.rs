use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::Rng;
use serde_json::Value;
use tskit::hashing::SeedPath;
use tskit::tensor::DenseMatrix;
use tskit::{RecursiveSketch, SketchVariant};
use tskit_cli::args::DEFAULT_SEED;
use tskit_cli::error::CliError;
use tskit_cli::io::{decode_kmat, encode_csv, encode_kmat, read_matrix};

fn tskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tskit")).args(args).output().expect("binary runs")
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn write_kmat(&self, name: &str, m: &DenseMatrix) -> String {
        std::fs::write(self.path(name), encode_kmat(m)).unwrap();
        self.arg(name)
    }

    fn write_csv(&self, name: &str, m: &DenseMatrix) -> String {
        std::fs::write(self.path(name), encode_csv(m).unwrap()).unwrap();
        self.arg(name)
    }
}

fn data(seed: u64, d: usize, n: usize, scale: f64) -> DenseMatrix {
    let mut rng = SeedPath::new(seed).rng();
    DenseMatrix::from_fn(d, n, |_, _| scale * rng.gen_range(-1.0..1.0))
}

fn manifest(path: &Path) -> Value {
    let mut p = path.as_os_str().to_owned();
    p.push(".manifest.json");
    serde_json::from_slice(&std::fs::read(PathBuf::from(p)).unwrap()).unwrap()
}

#[test]
fn sketch_output_matches_the_library() {
    let ws = Workspace::new();
    let x = data(1, 6, 10, 1.0);
    let input = ws.write_kmat("x.kmat", &x);
    let out = ws.arg("s.kmat");
    let run = tskit(&["sketch", "--input", &input, "--output", &out, "--p", "3", "--m", "32", "--seed", "77"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let written = decode_kmat(&std::fs::read(&out).unwrap()).unwrap();
    let expected = RecursiveSketch::build(6, 3, 32, SketchVariant::ConstProb, 77).unwrap().apply_matrix(&x).unwrap();
    assert_eq!(written, expected.data);

    let m = manifest(&ws.path("s.kmat"));
    assert_eq!(m["tag"], "kmat_manifest_v1");
    assert_eq!(m["m"], 32);
    assert_eq!(m["seed"], 77);
    assert_eq!(m["variant"], "const-prob");
    assert_eq!(m["leaf_input"], "dense");
}

#[test]
fn default_seed_and_high_prob_variant() {
    let ws = Workspace::new();
    let x = data(2, 5, 4, 1.0);
    let input = ws.write_kmat("x.kmat", &x);
    let out = ws.arg("s.kmat");
    let run = tskit(&[
        "sketch", "--input", &input, "--output", &out, "--p", "2", "--m", "16", "--variant", "high-prob", "--sparsity", "2",
    ]);
    assert!(run.status.success());
    let written = read_matrix(&ws.path("s.kmat")).unwrap();
    let sk = RecursiveSketch::build(5, 2, 16, SketchVariant::HighProb { sparsity: 2 }, DEFAULT_SEED).unwrap();
    assert_eq!(written, sk.apply_matrix(&x).unwrap().data);
    assert_eq!(manifest(&ws.path("s.kmat"))["s"], 2);
}

#[test]
fn sparse_inputs_take_the_sparse_path_with_identical_results() {
    let ws = Workspace::new();
    let mut rng = SeedPath::new(3).rng();
    let x = DenseMatrix::from_fn(400, 6, |_, _| if rng.gen_bool(0.03) { rng.gen_range(-1.0..1.0) } else { 0.0 });
    let input = ws.write_kmat("x.kmat", &x);
    let out = ws.arg("s.kmat");
    assert!(tskit(&["sketch", "--input", &input, "--output", &out, "--m", "64"]).status.success());
    assert_eq!(manifest(&ws.path("s.kmat"))["leaf_input"], "sparse");
    let dense = RecursiveSketch::build(400, 2, 64, SketchVariant::ConstProb, DEFAULT_SEED).unwrap().apply_matrix(&x).unwrap();
    let written = read_matrix(&ws.path("s.kmat")).unwrap();
    for (a, b) in written.data().iter().zip(dense.data.data()) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
}

#[test]
fn csv_and_kmat_inputs_and_outputs_agree() {
    let ws = Workspace::new();
    let x = data(4, 7, 5, 1.0);
    let k = ws.write_kmat("x.kmat", &x);
    let c = ws.write_csv("x.csv", &x);
    let (ok, oc) = (ws.arg("k.out"), ws.arg("c.out"));
    assert!(tskit(&["sketch", "--input", &k, "--output", &ok, "--m", "16"]).status.success());
    assert!(tskit(&["sketch", "--input", &c, "--output", &oc, "--m", "16", "--format", "csv"]).status.success());
    assert_eq!(read_matrix(&ws.path("k.out")).unwrap(), read_matrix(&ws.path("c.out")).unwrap());
    assert!(std::fs::read_to_string(ws.path("c.out")).is_ok());
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let ws = Workspace::new();
    let input = ws.write_kmat("x.kmat", &data(5, 8, 30, 0.3));
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = ws.arg(&format!("g{threads}"));
        let run = tskit(&["--threads", threads, "gaussian-features", "--input", &input, "--output", &out, "--lambda", "0.1", "--m", "16"]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        outputs.push((std::fs::read(&out).unwrap(), std::fs::read(format!("{out}.manifest.json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn krr_with_huge_lambda_has_ratio_near_one() {
    let ws = Workspace::new();
    let input = ws.write_kmat("x.kmat", &data(6, 5, 9, 0.5));
    let b = ws.write_csv("b.csv", &data(7, 5, 1, 0.5));
    let out = ws.arg("y.kmat");
    let run = tskit(&["krr", "--input", &input, "--b", &b, "--output", &out, "--lambda", "1e9", "--m", "16"]);
    assert!(run.status.success());
    let report: Value = serde_json::from_slice(&run.stdout).unwrap();
    let ratio = report["ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 1e-6, "ratio {ratio}");
    assert_eq!(read_matrix(&ws.path("y.kmat")).unwrap().shape(), (9, 1));
}

#[test]
fn verify_prints_a_passing_report() {
    let run = tskit(&["verify", "tail"]);
    assert_eq!(run.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report["suite"], "tail");
    assert_eq!(report["passed"], true);
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(tskit(&["sketch"]).status.code(), Some(2));
    assert_eq!(tskit(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(tskit(&["--threads", "0", "verify", "tail"]).status.code(), Some(2));
}

#[test]
fn missing_or_corrupt_input_exits_with_3() {
    let ws = Workspace::new();
    let out = ws.arg("o");
    let missing = ws.arg("missing.kmat");
    assert_eq!(tskit(&["sketch", "--input", &missing, "--output", &out, "--m", "8"]).status.code(), Some(3));
    let mut bytes = encode_kmat(&data(8, 3, 3, 1.0));
    bytes.truncate(bytes.len() - 4);
    std::fs::write(ws.path("bad.kmat"), bytes).unwrap();
    let bad = ws.arg("bad.kmat");
    assert_eq!(tskit(&["sketch", "--input", &bad, "--output", &out, "--m", "8"]).status.code(), Some(3));
}

#[test]
fn radius_violation_exits_with_4_and_names_the_column() {
    let ws = Workspace::new();
    let mut x = data(9, 3, 5, 0.1);
    x.set(1, 3, 5.0);
    let input = ws.write_kmat("x.kmat", &x);
    let out = ws.arg("g");
    let run = tskit(&["gaussian-features", "--input", &input, "--output", &out, "--lambda", "0.1", "--radius", "1", "--m", "8"]);
    assert_eq!(run.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&run.stderr).contains("column 3"));
}

#[test]
fn mismatched_target_vector_exits_with_4() {
    let ws = Workspace::new();
    let input = ws.write_kmat("x.kmat", &data(10, 4, 6, 1.0));
    let b = ws.write_kmat("b.kmat", &data(11, 3, 1, 1.0));
    let out = ws.arg("y");
    let run = tskit(&["krr", "--input", &input, "--b", &b, "--output", &out, "--lambda", "1", "--m", "8"]);
    assert_eq!(run.status.code(), Some(4));
}

#[test]
fn verification_failures_map_to_exit_5() {
    assert_eq!(CliError::Verification("x".into()).exit_code(), 5);
    assert_eq!(CliError::Validation("x".into()).exit_code(), 4);
}
