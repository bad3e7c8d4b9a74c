use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vne_core::bounds::entropy_oracle_dense;
use vne_core::coloring::{greedy_distance_coloring, Coloring};
use vne_core::dense::DenseMatrix;
use vne_core::sparse::{DensityMatrix, Ordering, SparseSymMatrix};
use vne_core::trace::*;

fn random_connected(n: usize, extra: usize, seed: u64) -> SparseSymMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = BTreeSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.insert((j, i));
    }
    while edges.len() < n - 1 + extra {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i != j {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    let trip: Vec<(usize, usize, f64)> = edges.into_iter().map(|(i, j)| (i, j, 1.0)).collect();
    SparseSymMatrix::from_upper_triplets(n, &trip).unwrap()
}

fn operator(rho: &DensityMatrix<f64>) -> EntropyOperator<f64> {
    let iv = spectral_interval(rho.matrix(), rho.annihilates_ones(), &IntervalOptions::default()).unwrap();
    EntropyOperator::new(rho, iv, KrylovSettings::default(), Default::default())
}

fn neg_xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

#[test]
fn interval_of_cycle_contains_nonzero_spectrum() {
    let trip = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)];
    let adj = SparseSymMatrix::from_upper_triplets(4, &trip).unwrap();
    let l = vne_core::sparse::laplacian(&adj);
    let iv = spectral_interval(&l, true, &IntervalOptions::default()).unwrap();
    assert!(iv.a <= 2.0 + 1e-12 && iv.b >= 4.0 - 1e-12, "{iv:?}");
    assert!(iv.a > 0.0 && iv.widened);

    let id = SparseSymMatrix::from_upper_triplets(5, &(0..5).map(|i| (i, i, 1.0)).collect::<Vec<_>>()).unwrap();
    let iv = spectral_interval(&id, false, &IntervalOptions::default()).unwrap();
    assert!(iv.a <= 1.0 && iv.b >= 1.0);
    let mut bad = IntervalOptions::default();
    bad.iters = 1;
    assert!(spectral_interval(&id, false, &bad).is_err());
}

#[test]
fn singleton_probing_is_exact() {
    let adj = random_connected(40, 30, 1);
    let rho = DensityMatrix::from_adjacency(&adj).unwrap();
    let exact = entropy_oracle_dense(rho.matrix()).unwrap();
    let op = operator(&rho);
    let singletons = Coloring::from_colors((0..40).collect());
    let tol = 1e-9;
    let p = probing_trace(&op, &singletons, tol).unwrap();
    assert!((p.value - exact).abs() <= tol, "{} vs {exact}", p.value);
    assert_eq!(p.colors, 40);
}

#[test]
fn probing_vectors_partition_ones() {
    let c = Coloring::from_colors(vec![0, 1, 0, 2, 1, 2, 0]);
    let mut sum = vec![0.0; 7];
    for class in c.classes() {
        let v: Vec<f64> = probing_vector(&class, 7);
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        assert_eq!(norm2, class.len() as f64);
        sum.iter_mut().zip(&v).for_each(|(s, x)| *s += x);
    }
    assert!(sum.iter().all(|&s| s == 1.0));
}

#[test]
fn probing_error_identity_holds() {
    let adj = random_connected(100, 60, 2);
    let rho = DensityMatrix::from_adjacency(&adj).unwrap();
    let dense = rho.matrix().to_dense();
    let fa = dense_matrix_function(&dense, neg_xlogx).unwrap();
    let g = rho.matrix().graph();
    let c = greedy_distance_coloring(&g, 2, &Ordering::Degree.order(&g)).unwrap();
    let trace: f64 = (0..100).map(|i| fa[(i, i)]).sum();
    let probed: f64 = c
        .classes()
        .iter()
        .map(|cl| {
            let v: Vec<f64> = probing_vector(cl, 100);
            v.iter().zip(fa.mul_vec(&v)).map(|(a, b)| a * b).sum::<f64>()
        })
        .sum();
    let identity = probing_error_identity(&fa, &c);
    assert!((trace - probed - identity).abs() <= 1e-10);
    assert_eq!(probing_error_identity(&fa, &Coloring::from_colors((0..100).collect())), 0.0);
}

#[test]
fn probing_error_identity_two_by_two() {
    let fa: DenseMatrix<f64> = DenseMatrix::from_fn(2, 2, |i, j| if i == j { 0.3 } else { -0.1 });
    let one = Coloring::from_colors(vec![0, 0]);
    assert!((probing_error_identity(&fa, &one) - 0.2).abs() < 1e-15);
}

#[test]
fn heuristic_fit_recovers_synthetic_model() {
    // traces with differences C q^d / d^2 for C = 1, q = 0.5
    let t1: f64 = 1.0;
    let t2 = t1 + 0.5;
    let t3 = t2 + 0.25 / 4.0;
    let eps = 1e-4;
    let fit = fit_heuristic([t1, t2, t3], eps, 64);
    let k2 = fit.fits.iter().find(|f| f.k == 2).unwrap();
    assert!(k2.valid);
    assert!((k2.q - 0.5).abs() < 1e-12 && (k2.c - 1.0).abs() < 1e-12);
    let analytic = (1..).find(|&d: &usize| 0.5f64.powi(d as i32) / (d * d) as f64 <= eps).unwrap();
    assert_eq!(k2.d_star, Some(analytic));
    assert!(fit.d_star.unwrap() >= analytic);

    // growing differences: no valid fit
    let bad = fit_heuristic([1.0f64, 1.1, 1.3], eps, 64);
    assert!(bad.fits.iter().all(|f| !f.valid));
    assert_eq!(bad.d_star, None);

    // loose tolerance: distance floored at 2
    let loose = fit_heuristic([t1, t2, t3], 10.0, 64);
    assert_eq!(loose.d_star, Some(2));
}

#[test]
fn desingularized_quadform_matches_dense() {
    // path on 3 nodes
    let adj = SparseSymMatrix::from_upper_triplets(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    let rho = DensityMatrix::from_adjacency(&adj).unwrap();
    assert!(rho.annihilates_ones());
    let fa = dense_matrix_function(&rho.matrix().to_dense(), neg_xlogx).unwrap();
    let op = operator(&rho);
    let r = op.quadform(&[1.0, 0.0, 0.0], 1e-12).unwrap();
    assert!((r.value - fa[(0, 0)]).abs() <= 1e-12);
    let ones = op.quadform(&[1.0, 1.0, 1.0], 1e-12).unwrap();
    assert_eq!(ones.value, 0.0);
}

#[test]
fn desingularized_iterations_match_reduced_problem() {
    // cycle C_100: spectrum without the zero eigenvalue
    let n = 100;
    let trip: Vec<(usize, usize, f64)> = (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n), 1.0)).collect();
    let adj = SparseSymMatrix::from_upper_triplets(n, &trip).unwrap();
    let rho = DensityMatrix::from_adjacency(&adj).unwrap();
    let op = operator(&rho);
    let mut b = vec![0.0; n];
    b[0] = 1.0;
    let tol = 1e-10;
    let r = op.quadform(&b, tol).unwrap();
    let fa = dense_matrix_function(&rho.matrix().to_dense(), neg_xlogx).unwrap();
    assert!((r.value - fa[(0, 0)]).abs() <= tol);
}

#[test]
fn hutchinson_basic_properties() {
    let zero = DenseTraceOperator(DenseMatrix::<f64>::zeros(10, 10));
    assert_eq!(hutchinson(&zero, 5, 1, 0.0).unwrap().value, 0.0);

    let n = 20;
    let id = DenseTraceOperator(DenseMatrix::<f64>::identity(n));
    let samples = 10_000;
    let r = hutchinson(&id, samples, 4, 0.0).unwrap();
    let sigma = (2.0 * n as f64 / samples as f64).sqrt();
    assert!((r.value - n as f64).abs() <= 3.0 * sigma, "{}", r.value);
    let again = hutchinson(&id, samples, 4, 0.0).unwrap();
    assert_eq!(r.value.to_bits(), again.value.to_bits());
}

#[test]
fn hutchinson_single_sample_unbiased() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = DenseMatrix::from_fn(20, 20, |_, _| rng.random::<f64>() - 0.5);
    let b = g.transpose().matmul(&g);
    let tr: f64 = (0..20).map(|i| b[(i, i)]).sum();
    let op = DenseTraceOperator(b.clone());
    let runs = 10_000;
    let mean: f64 = (0..runs).map(|s| hutchinson(&op, 1, s, 0.0).unwrap().value).sum::<f64>() / runs as f64;
    let sigma = (2.0 * b.norm_frobenius().powi(2) / runs as f64).sqrt();
    assert!((mean - tr).abs() <= 4.0 * sigma);
}

#[test]
fn hutchpp_low_rank_is_exact() {
    let mut d = vec![0.0f64; 12];
    d[0] = 1.0;
    d[1] = 2.0;
    d[2] = 3.0;
    let op = DenseTraceOperator(DenseMatrix::from_diagonal(&d));
    let r = hutchpp(&op, 3, 0, 5, KrylovTolerances::uniform(0.0)).unwrap();
    assert!((r.value - 6.0).abs() < 1e-12);
    let r = hutchpp(&op, 3, 20, 5, KrylovTolerances::uniform(0.0)).unwrap();
    assert!((r.value - 6.0).abs() < 1e-12);
}

#[test]
fn hutchpp_without_samples_underestimates_psd_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = DenseMatrix::from_fn(30, 30, |_, _| rng.random::<f64>());
    let b = g.transpose().matmul(&g);
    let tr: f64 = (0..30).map(|i| b[(i, i)]).sum();
    let op = DenseTraceOperator(b);
    for s in 0..5 {
        let r = hutchpp(&op, 4, 0, s, KrylovTolerances::uniform(0.0)).unwrap();
        assert!(r.value <= tr + 1e-9);
    }
}

#[test]
fn orthonormal_basis_drops_dependent_columns() {
    let cols = vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]];
    let q = orthonormal_basis(&cols);
    assert_eq!(q.len(), 2);
    for a in &q {
        for b in &q {
            let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            assert!((d - if std::ptr::eq(a, b) { 1.0 } else { 0.0 }).abs() < 1e-14);
        }
    }
}

#[test]
fn adaptive_hutchpp_sample_count_follows_tail_bound() {
    assert_eq!(required_samples(0.0, 1.0, 0.01), 1);
    let a = required_samples(1.0, 0.1, 0.01);
    let b = required_samples(1.0, 0.05, 0.01);
    assert!(b > 3 * a);
    let n = 50;
    let op = DenseTraceOperator(DenseMatrix::<f64>::identity(n));
    let r = adaptive_hutchpp(&op, 0.5, 0.01, 2, 0.0, &AdaptiveOptions::default()).unwrap();
    assert!(r.n_r >= 3);
    assert!((r.value - n as f64).abs() < 5.0);
    let mut capped = AdaptiveOptions::default();
    capped.max_vectors = 20;
    assert!(adaptive_hutchpp(&op, 1e-3, 0.01, 2, 0.0, &capped).is_err());
}

fn maximally_mixed(n: usize) -> DensityMatrix<f64> {
    let trip: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0 / n as f64)).collect();
    DensityMatrix::from_matrix(SparseSymMatrix::from_upper_triplets(n, &trip).unwrap()).unwrap()
}

#[test]
fn maximally_mixed_state_gives_log_n() {
    let rho = maximally_mixed(64);
    let want = 64f64.ln();
    // the sketch of adaptive Hutch++ grows to the full space since B = (log n / n) I has no decay
    for (method, eps) in [
        (Method::Probing, 1e-3),
        (Method::AdaptiveHutchpp, 1e-3),
        (Method::Hutchinson, 0.2),
        (Method::Hutchpp, 0.2),
    ] {
        let mut cfg = EstimatorConfig::default();
        cfg.eps_rel = eps;
        cfg.seed = 11;
        let est = entropy(&rho, method, &cfg).unwrap();
        assert!((est.value - want).abs() <= eps * want, "{method}: {}", est.value);
    }
}

#[test]
fn probing_pipeline_meets_tolerance_on_small_graph() {
    let adj = random_connected(150, 120, 3);
    let rho = DensityMatrix::from_adjacency(&adj).unwrap();
    let exact = entropy_oracle_dense(rho.matrix()).unwrap();
    for selection in [DSelection::Apriori, DSelection::Fixed(12)] {
        let mut cfg = EstimatorConfig::default();
        cfg.eps_rel = 1e-4;
        cfg.selection = selection;
        let est = entropy_probing(&rho, &cfg).unwrap();
        assert!(((est.value - exact) / exact).abs() <= 1e-4, "{selection:?}: {} vs {exact}", est.value);
    }
    let mut cfg = EstimatorConfig::default();
    cfg.selection = DSelection::Heuristic;
    let est = entropy_probing(&rho, &cfg).unwrap();
    assert!(est.fit.is_some() && est.d.unwrap() >= 2);
}

#[test]
fn stochastic_runs_are_reproducible() {
    let adj = random_connected(120, 100, 4);
    let rho = DensityMatrix::from_adjacency(&adj).unwrap();
    let mut cfg = EstimatorConfig::default();
    cfg.eps_rel = 5e-2;
    cfg.seed = 99;
    let a = entropy(&rho, Method::AdaptiveHutchpp, &cfg).unwrap();
    let b = entropy(&rho, Method::AdaptiveHutchpp, &cfg).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!((a.n_r, a.n_h), (b.n_r, b.n_h));
}
