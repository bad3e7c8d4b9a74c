use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vne_core::dense::{sym_eig, DenseMatrix};
use vne_core::krylov::{
    adaptive_quadform, funvec, swap_last_pole_to_infinity, BoundMode, DenseOperator, DiagonalOperator, EdsPoles,
    FnTriple, Interval, NegEntropy, Pole, PoleSchedule, QuadformOptions, RationalArnoldi,
};

fn random_spd(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> DenseMatrix<f64> {
    let g = DenseMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    let eig = sym_eig(&g.transpose().matmul(&g)).unwrap();
    let d: Vec<f64> = (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    let q = eig.vectors;
    let mut a = DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] * d[k] * q[(j, k)]).sum());
    a.symmetrize();
    a
}

fn dense_quadform(a: &DenseMatrix<f64>, b: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let eig = sym_eig(a).unwrap();
    (0..a.rows())
        .map(|j| {
            let c: f64 = (0..a.rows()).map(|i| eig.vectors[(i, j)] * b[i]).sum();
            f(eig.values[j]) * c * c
        })
        .sum()
}

fn dense_funvec(a: &DenseMatrix<f64>, b: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let eig = sym_eig(a).unwrap();
    let n = a.rows();
    let coef: Vec<f64> = (0..n)
        .map(|j| f(eig.values[j]) * (0..n).map(|i| eig.vectors[(i, j)] * b[i]).sum::<f64>())
        .collect();
    (0..n).map(|i| (0..n).map(|j| eig.vectors[(i, j)] * coef[j]).sum()).collect()
}

// Independent mpmath evaluation of the pole formula (50 digits), frozen.
#[test]
fn eds_poles_match_frozen_values() {
    let cases: [(f64, f64, [f64; 6]); 3] = [
        (
            1e-3,
            1e3,
            [
                -1.0,
                -0.015315464110267006,
                -65.293483292460688,
                -0.0015196144497831463,
                -7.9839221410300353,
                -0.12525172244114424,
            ],
        ),
        (
            0.5,
            2.0,
            [
                -1.0,
                -0.16452466459917623,
                -6.0781160225201089,
                -0.037455923350353288,
                -2.2912573895500087,
                -0.43644158205918319,
            ],
        ),
        (
            1e-7,
            1.0,
            [
                -0.00031622776601683793,
                -2.7619328279608109e-6,
                -0.036206528626487978,
                -2.1748502829640444e-7,
                -0.0033592092445474918,
                -2.9768910692989794e-5,
            ],
        ),
    ];
    for (a, b, want) in cases {
        let eds = EdsPoles::<f64>::new(a, b).unwrap();
        for (j, w) in want.iter().enumerate() {
            let got = eds.pole(j + 1);
            assert!((got - w).abs() <= 1e-10 * w.abs(), "[{a},{b}] pole {}: {got} vs {w}", j + 1);
        }
    }
}

#[test]
fn eds_poles_are_negative_nested_and_deterministic() {
    let eds = EdsPoles::<f64>::new(1e-4, 10.0).unwrap();
    let long = eds.prefix(64);
    assert!(long.iter().all(|&p| p < 0.0 && p.is_finite()));
    let fresh = EdsPoles::<f64>::new(1e-4, 10.0).unwrap();
    assert_eq!(fresh.prefix(16), long[..16].to_vec());
    assert!(eds.rate() > 0.0 && eds.rate() < 1.0);
    assert!(EdsPoles::<f64>::new(1.0, 1.0).is_err());
    assert!(EdsPoles::<f64>::new(0.0, 1.0).is_err());
}

#[test]
fn swap_is_noop_for_infinite_last_pole() {
    let op = DiagonalOperator { diag: (1..=20).map(|i| i as f64).collect() };
    let b = vec![1.0; 20];
    let mut ra = RationalArnoldi::new(&op, &b, BoundMode::PoleSwap, false, 8).unwrap();
    ra.extend(Pole::Infinite).unwrap();
    let before = ra.pencil();
    swap_last_pole_to_infinity(&mut ra).unwrap();
    let after = ra.pencil();
    assert_eq!(before.0.norm_frobenius(), after.0.norm_frobenius());
    assert_eq!(before.1.norm_frobenius(), after.1.norm_frobenius());
}

#[test]
fn decomposition_keeps_infinite_last_pole_and_orthonormal_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_spd(30, 0.5, 20.0, &mut rng);
    let op = DenseOperator::new(a.clone());
    let b: Vec<f64> = (0..30).map(|_| rng.random::<f64>()).collect();
    let mut ra = RationalArnoldi::new(&op, &b, BoundMode::PoleSwap, false, 10).unwrap();
    for xi in [-1.0, -3.0, -0.2, -7.0] {
        ra.extend(Pole::Finite(xi)).unwrap();
        assert!(ra.decomposition_poles().last().unwrap().is_infinite());
    }
    let m = ra.dim() + 1;
    for i in 0..m {
        for j in 0..m {
            let d: f64 = ra.basis_vector(i).iter().zip(ra.basis_vector(j)).map(|(x, y)| x * y).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((d - want).abs() < 1e-12);
        }
    }
    // A V K = V H
    let (h, k) = ra.pencil();
    let n = a.rows();
    for j in 0..k.cols() {
        let vk: Vec<f64> = (0..n).map(|r| (0..m).map(|i| ra.basis_vector(i)[r] * k[(i, j)]).sum()).collect();
        let avk = a.mul_vec(&vk);
        for (r, &lhs) in avk.iter().enumerate() {
            let rhs: f64 = (0..m).map(|i| ra.basis_vector(i)[r] * h[(i, j)]).sum();
            assert!((lhs - rhs).abs() < 1e-10 * a.norm_frobenius());
        }
    }
}

fn rational_exactness_trial(seed: u64, mode: BoundMode) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 40;
    let m = rng.random_range(2..=8usize);
    let a = random_spd(n, 1.0, 10.0, &mut rng);
    let poles: Vec<f64> = (0..m - 1).map(|_| -10f64.powf(rng.random_range(-1.0..1.0))).collect();
    // numerator with roots in [-5, 0] keeps the function positive on the spectrum
    let roots: Vec<f64> = (0..2 * m - 1).map(|_| -5.0 * rng.random::<f64>()).collect();
    let r = {
        let poles = poles.clone();
        move |z: f64| {
            let p: f64 = roots.iter().map(|&t| (z - t) / 5.0).product();
            let q: f64 = poles.iter().map(|&xi| 1.0 - z / xi).product();
            p / (q * q)
        }
    };
    let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let exact = dense_quadform(&a, &b, &r);
    let op = DenseOperator::new(a);
    let f = FnTriple(r, |_: f64| 0.0, |_: f64| 0.0);
    let mut opts = QuadformOptions::new(0.0, Interval::new(1.0, 10.0).unwrap());
    opts.schedule = PoleSchedule::Fixed(poles.iter().map(|&x| Pole::Finite(x)).collect());
    opts.max_iters = m;
    opts.grid_points = 50;
    opts.mode = mode;
    let res = adaptive_quadform(&op, &b, &f, &opts).unwrap();
    assert_eq!(res.iterations, m);
    ((res.value - exact) / exact).abs()
}

#[test]
fn quadform_exact_for_rational_functions_pole_swap() {
    for seed in 0..40 {
        let rel = rational_exactness_trial(seed, BoundMode::PoleSwap);
        assert!(rel <= 1e-9, "seed {seed}: {rel:e}");
    }
}

#[test]
fn quadform_exact_for_rational_functions_auxiliary() {
    for seed in 0..40 {
        let rel = rational_exactness_trial(seed, BoundMode::Auxiliary);
        assert!(rel <= 1e-9, "seed {seed}: {rel:e}");
    }
}

#[test]
fn funvec_reproduces_linear_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_spd(25, 0.1, 5.0, &mut rng);
    let b: Vec<f64> = (0..25).map(|_| rng.random::<f64>()).collect();
    let want = a.mul_vec(&b);
    let op = DenseOperator::new(a);
    let f = FnTriple(|x: f64| x, |_: f64| 1.0, |_: f64| 0.0);
    let mut opts = QuadformOptions::new(0.0, Interval::new(0.1, 5.0).unwrap());
    opts.max_iters = 2;
    let res = funvec(&op, &b, &f, &opts).unwrap();
    for (x, y) in res.vector.iter().zip(&want) {
        assert!((x - y).abs() < 1e-12 * 5.0 * 25.0);
    }
}

#[test]
fn funvec_mixed_poles_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = random_spd(40, 1e-2, 1e2, &mut rng);
    let b: Vec<f64> = (0..40).map(|_| rng.random::<f64>() - 0.5).collect();
    let want = dense_funvec(&a, &b, |x| -x * x.ln());
    let eds = EdsPoles::new(1e-2, 1e2).unwrap();
    let op = DenseOperator::new(a);
    let mut sched: Vec<Pole<f64>> = vec![Pole::Infinite; 5];
    sched.extend(eds.prefix(14).into_iter().map(Pole::Finite));
    let mut opts = QuadformOptions::new(0.0, Interval::new(1e-2, 1e2).unwrap());
    opts.schedule = PoleSchedule::Fixed(sched);
    opts.max_iters = 20;
    let res = funvec(&op, &b, &NegEntropy, &opts).unwrap();
    let err: f64 = res.vector.iter().zip(&want).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let nrm: f64 = want.iter().map(|y| y * y).sum::<f64>().sqrt();
    assert!(err <= 1e-8 * nrm, "relative error {:e}", err / nrm);
}

#[test]
fn full_dimension_is_exact() {
    let diag: Vec<f64> = (1..=12).map(|i| i as f64 / 12.0).collect();
    let op = DiagonalOperator { diag: diag.clone() };
    let b = vec![1.0; 12];
    let mut opts = QuadformOptions::new(0.0, Interval::new(1.0 / 12.0, 1.0).unwrap());
    opts.max_iters = 30;
    let res = adaptive_quadform(&op, &b, &NegEntropy, &opts).unwrap();
    let want: f64 = diag.iter().map(|&x| -x * x.ln()).sum();
    assert!(res.converged);
    assert!((res.value - want).abs() < 1e-12);
}

fn chebyshev_diag(n: usize, a: f64, b: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .collect()
}

#[test]
fn bounds_sandwich_error_on_diagonal_matrix() {
    let (lo, hi) = (1e-3, 1e3);
    let diag = chebyshev_diag(200, lo, hi);
    let op = DiagonalOperator { diag: diag.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b: Vec<f64> = (0..200).map(|_| rng.random::<f64>() - 0.5).collect();
    let exact: f64 = diag.iter().zip(&b).map(|(&x, &bi)| -x * x.ln() * bi * bi).sum();
    let eds = EdsPoles::new(lo, hi).unwrap();
    for mode in [BoundMode::PoleSwap, BoundMode::Auxiliary] {
        let mut opts = QuadformOptions::new(0.0, Interval::new(lo, hi).unwrap());
        opts.schedule = PoleSchedule::Fixed(eds.prefix(12).into_iter().map(Pole::Finite).collect());
        opts.max_iters = 13;
        opts.mode = mode;
        opts.record = true;
        let res = adaptive_quadform(&op, &b, &NegEntropy, &opts).unwrap();
        for rec in &res.trace {
            let err = (rec.value - exact).abs();
            assert!(
                rec.lower <= err * (1.0 + 1e-6) && err <= rec.upper * (1.0 + 1e-6),
                "{mode:?} m={} lower {:e} err {err:e} upper {:e}",
                rec.m,
                rec.lower,
                rec.upper
            );
        }
    }
}

#[test]
fn adaptive_schedule_switches_and_converges() {
    let (lo, hi) = (1e-4, 1.0);
    let diag = chebyshev_diag(400, lo, hi);
    let op = DiagonalOperator { diag: diag.clone() };
    let b = vec![1.0; 400];
    let exact: f64 = diag.iter().map(|&x| -x * x.ln()).sum();
    let mut opts = QuadformOptions::new(1e-8, Interval::new(lo, hi).unwrap());
    opts.schedule = PoleSchedule::Adaptive(std::sync::Arc::new(EdsPoles::new(lo, hi).unwrap()));
    let res = adaptive_quadform(&op, &b, &NegEntropy, &opts).unwrap();
    assert!(res.converged);
    assert!(res.switched_at.is_some());
    assert!(res.rat_iters > 0);
    assert!((res.value - exact).abs() <= 1e-8);
}

#[test]
fn zero_vector_gives_zero() {
    let op = DiagonalOperator { diag: vec![1.0, 2.0] };
    let opts = QuadformOptions::new(1e-8, Interval::new(1.0, 2.0).unwrap());
    let res = adaptive_quadform(&op, &[0.0, 0.0], &NegEntropy, &opts).unwrap();
    assert_eq!(res.value, 0.0);
    assert!(res.converged);
}
