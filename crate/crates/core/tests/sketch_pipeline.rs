use rand::Rng;
use tskit::hashing::SeedPath;
use tskit::tensor::{dot, norm2, self_tensor, DenseMatrix, SizeGuard, SparseVector};
use tskit::{RecursiveSketch, SketchVariant};

const VARIANTS: [SketchVariant; 2] = [SketchVariant::ConstProb, SketchVariant::HighProb { sparsity: 2 }];

fn random_matrix(seed: u64, d: usize, n: usize) -> DenseMatrix {
    let mut rng = SeedPath::new(seed).rng();
    DenseMatrix::from_fn(d, n, |_, _| rng.gen_range(-1.0..1.0))
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&diff) / norm2(b).max(f64::MIN_POSITIVE)
}

#[test]
fn fast_path_matches_explicit_matrix() {
    let guard = SizeGuard::new(1 << 24);
    for variant in VARIANTS {
        for (d, p) in [(3, 2), (4, 3), (2, 4)] {
            let sk = RecursiveSketch::build(d, p, 8, variant, 11).unwrap();
            let explicit = sk.explicit_matrix(&guard).unwrap();
            let factored = sk.explicit_matrix_factored(&guard).unwrap();
            let x = random_matrix(d as u64 * 10 + p as u64, d, 1);
            let t = self_tensor(x.col(0), p, &guard).unwrap();
            let fast = sk.apply_point(x.col(0)).unwrap();
            assert!(max_rel(&fast, &explicit.matvec(&t).unwrap()) < 1e-10);
            assert!(max_rel(&fast, &factored.matvec(&t).unwrap()) < 1e-10);
        }
    }
}

#[test]
fn sparse_and_dense_inputs_agree() {
    for variant in VARIANTS {
        let sk = RecursiveSketch::build(500, 3, 32, variant, 5).unwrap();
        let mut x = vec![0.0; 500];
        for (k, i) in [3usize, 77, 140, 499].into_iter().enumerate() {
            x[i] = k as f64 - 1.5;
        }
        let dense = sk.apply_point(&x).unwrap();
        let sparse = sk.apply_sparse(&SparseVector::from_dense(&x)).unwrap();
        assert!(max_rel(&sparse, &dense) < 1e-12);
    }
}

#[test]
fn matrix_application_is_column_wise_and_deterministic() {
    let x = random_matrix(3, 6, 9);
    for variant in VARIANTS {
        let sk = RecursiveSketch::build(6, 4, 32, variant, 99).unwrap();
        let out = sk.apply_matrix(&x).unwrap();
        let again = RecursiveSketch::build(6, 4, 32, variant, 99).unwrap().apply_matrix(&x).unwrap();
        assert_eq!(out.data, again.data);
        for j in 0..9 {
            assert_eq!(out.data.col(j), sk.apply_point(x.col(j)).unwrap().as_slice());
        }
    }
}

#[test]
fn different_seeds_give_different_sketches() {
    let x = random_matrix(4, 5, 1);
    let a = RecursiveSketch::build(5, 2, 32, SketchVariant::ConstProb, 1).unwrap().apply_point(x.col(0)).unwrap();
    let b = RecursiveSketch::build(5, 2, 32, SketchVariant::ConstProb, 2).unwrap().apply_point(x.col(0)).unwrap();
    assert_ne!(a, b);
}

#[test]
fn multilinear_form_on_repeated_input_is_apply_point() {
    let x = random_matrix(8, 4, 1);
    let sk = RecursiveSketch::build(4, 3, 16, SketchVariant::HighProb { sparsity: 2 }, 4).unwrap();
    let col = x.col(0);
    assert!(max_rel(&sk.apply_multilinear(&[col, col, col]).unwrap(), &sk.apply_point(col).unwrap()) < 1e-12);
}

#[test]
fn inner_products_are_roughly_preserved() {
    let x = random_matrix(21, 10, 2);
    let (u, v) = (x.col(0), x.col(1));
    let truth = dot(u, v).powi(2);
    let trials = 400;
    let mean: f64 = (0..trials)
        .map(|s| {
            let sk = RecursiveSketch::build(10, 2, 64, SketchVariant::ConstProb, s).unwrap();
            dot(&sk.apply_point(u).unwrap(), &sk.apply_point(v).unwrap())
        })
        .sum::<f64>()
        / trials as f64;
    let scale = dot(u, u) * dot(v, v);
    assert!((mean - truth).abs() < 0.1 * scale, "mean {mean} truth {truth}");
}

#[test]
fn wrong_input_length_is_rejected() {
    let sk = RecursiveSketch::build(4, 2, 8, SketchVariant::ConstProb, 0).unwrap();
    assert!(sk.apply_point(&[1.0; 3]).is_err());
}
