use std::time::Instant;

use serde::Serialize;
use vne_core::bounds::{
    best_approx_oracle, chebyshev_bound, entropy_oracle_dense, entropy_poly_bound, probing_bound, DENSE_ORACLE_LIMIT,
};
use vne_core::coloring::{
    banded_coloring, greedy_distance_coloring, greedy_distance_coloring_via_power, grid2d_coloring,
    validate_distance_coloring, Coloring,
};
use vne_core::krylov::{
    adaptive_quadform, DiagonalOperator, EdsPoles, Interval, NegEntropy, Pole, PoleSchedule, QuadformOptions,
};
use vne_core::sparse::{rcm_order, Graph, GraphSpec, Ordering};
use vne_core::trace::{
    diagonal_entropy, entropy, entropy_operator, fit_heuristic, probing_trace, DSelection, EstimatorConfig,
    KrylovSettings, Method,
};
use vne_core::solver::SolverConfig;

use crate::args::{
    BenchArgs, BoundsArgs, ColorStatsArgs, ColoringKind, EntropyArgs, EstimatorArgs, Family, KrylovTraceArgs, SweepArgs,
};
use crate::input::{self, Loaded};
use crate::output::{self, Report};
use crate::Failure;

fn estimator_config(a: &EstimatorArgs) -> Result<EstimatorConfig, Failure> {
    if !(a.eps > 0.0 && a.eps < 1.0) {
        return Err(Failure::config(format!("--eps must lie in (0, 1), got {}", a.eps)));
    }
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(Failure::config(format!("--delta must lie in (0, 1), got {}", a.delta)));
    }
    if a.d == Some(0) {
        return Err(Failure::config("--d must be at least 1"));
    }
    let mut cfg = EstimatorConfig {
        eps_rel: a.eps,
        delta: a.delta,
        selection: a.d.map(DSelection::Fixed).unwrap_or(a.select),
        order: a.order,
        seed: a.seed,
        krylov: KrylovSettings {
            stop: a.stop,
            mode: a.bound_mode,
            max_iters: a.max_iters,
            ..KrylovSettings::default()
        },
        solver: SolverConfig {
            backend: a.solver,
            ..SolverConfig::default()
        },
        d_max: a.d_max,
        hutchpp_sketch: a.sketch,
        ..EstimatorConfig::default()
    };
    cfg.stochastic.max_vectors = a.max_vectors;
    Ok(cfg)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, Failure> {
    if threads == 0 {
        return Err(Failure::config("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))
}

pub fn entropy_report(a: EntropyArgs) -> Result<(), Failure> {
    let cfg = estimator_config(&a.est)?;
    let loaded = input::load(&a.input, a.est.seed)?;
    let est = pool(a.threads)?.install(|| entropy(&loaded.rho, a.est.method, &cfg))?;
    let report = Report::new(&loaded, &est, cfg.selection, a.est.seed);
    output::emit(a.json.as_deref(), &output::json(&report))
}

#[derive(Serialize)]
struct BoundRow {
    k: usize,
    cheb_bound: f64,
    thm22_bound: f64,
    oracle: Option<f64>,
}

pub fn bounds(a: BoundsArgs) -> Result<(), Failure> {
    if a.k_min < 2 || a.k_max < a.k_min {
        return Err(Failure::config("need 2 <= --k-min <= --k-max"));
    }
    if !(a.a >= 0.0 && a.b > a.a) {
        return Err(Failure::config("need 0 <= --a < --b"));
    }
    let rows = (a.k_min..=a.k_max)
        .map(|k| {
            Ok(BoundRow {
                k,
                cheb_bound: chebyshev_bound(k, a.b)?,
                thm22_bound: entropy_poly_bound(k, a.a, a.b)?,
                oracle: a.oracle.then(|| best_approx_oracle(k, a.a, a.b)),
            })
        })
        .collect::<Result<Vec<_>, vne_core::Error>>()?;
    output::emit(a.csv.as_deref(), &output::csv(&rows)?)
}

/// Banded coloring after a reverse Cuthill-McKee relabeling, in original labels.
fn rcm_banded(g: &Graph, d: usize) -> Coloring {
    let perm = rcm_order(g);
    let mut pos = vec![0; g.n()];
    for (k, &old) in perm.iter().enumerate() {
        pos[old] = k;
    }
    let beta = (0..g.n())
        .flat_map(|i| g.neighbors(i).iter().map(move |&j| (i, j)))
        .map(|(i, j)| pos[i].abs_diff(pos[j]))
        .max()
        .unwrap_or(0);
    let banded = banded_coloring(g.n(), beta, d);
    Coloring::from_colors((0..g.n()).map(|i| banded.color(pos[i])).collect())
}

fn build_coloring(
    loaded: &Loaded,
    g: &Graph,
    kind: ColoringKind,
    d: usize,
    order: Ordering,
    via_power: bool,
) -> Result<Coloring, Failure> {
    Ok(match kind {
        ColoringKind::Greedy if via_power => greedy_distance_coloring_via_power(g, d, &order.order(g))?,
        ColoringKind::Greedy => greedy_distance_coloring(g, d, &order.order(g))?,
        ColoringKind::Banded => rcm_banded(g, d),
        ColoringKind::Grid => match loaded.spec {
            Some(GraphSpec::Grid2d { side }) => grid2d_coloring(side, d)?,
            _ => return Err(Failure::config("--method grid needs --gen grid2d:SIDE")),
        },
    })
}

#[derive(Serialize)]
struct ColorStats {
    d: usize,
    s: usize,
    max_class: usize,
    min_class: usize,
    validated: bool,
    n: usize,
    time_s: f64,
}

pub fn color_stats(a: ColorStatsArgs) -> Result<(), Failure> {
    let loaded = input::load(&a.input, a.seed)?;
    let g = loaded.rho.matrix().graph();
    let start = Instant::now();
    let c = build_coloring(&loaded, &g, a.kind, a.d, a.order, a.via_power)?;
    let time_s = start.elapsed().as_secs_f64();
    let (max_class, min_class) = c.class_size_range();
    let stats = ColorStats {
        d: a.d,
        s: c.num_colors(),
        max_class,
        min_class,
        validated: validate_distance_coloring(&g, &c, a.d),
        n: g.n(),
        time_s,
    };
    output::emit(a.json.as_deref(), &output::json(&stats))
}

#[derive(Serialize)]
struct SweepRow {
    d: usize,
    colors: usize,
    value: f64,
    error: f64,
    bound: Option<f64>,
    bound_gap: Option<f64>,
    model: Option<f64>,
    diff_estimate: f64,
}

pub fn probing_sweep(a: SweepArgs) -> Result<(), Failure> {
    if a.d_min < 1 || a.d_max < a.d_min {
        return Err(Failure::config("need 1 <= --d-min <= --d-max"));
    }
    let loaded = input::load(&a.input, a.seed)?;
    let n = loaded.n();
    if n > DENSE_ORACLE_LIMIT {
        return Err(Failure::config(format!(
            "probing-sweep needs the dense oracle, limited to n <= {DENSE_ORACLE_LIMIT} (n = {n})"
        )));
    }
    let rho = &loaded.rho;
    let exact = entropy_oracle_dense(rho.matrix())?;
    let cfg = EstimatorConfig {
        seed: a.seed,
        ..EstimatorConfig::default()
    };
    let op = entropy_operator(rho, &cfg)?;
    let tol = a.krylov_tol * diagonal_entropy(rho);
    let g = rho.matrix().graph();
    let top = (a.d_max + 1).max(3);
    let traces = pool(a.threads)?.install(|| {
        (1..=top)
            .map(|d| {
                let c = build_coloring(&loaded, &g, a.kind, d, a.order, false)?;
                Ok(probing_trace(&op, &c, tol)?)
            })
            .collect::<Result<Vec<_>, Failure>>()
    })?;
    let fit = fit_heuristic([traces[0].value, traces[1].value, traces[2].value], 0.0, 0);
    let iv = op.interval();
    let a_rig = if rho.annihilates_ones() { 0.0 } else { iv.a };
    let rows = (a.d_min..=a.d_max)
        .map(|d| {
            let t = &traces[d - 1];
            let model = fit
                .fits
                .iter()
                .filter(|f| f.valid)
                .map(|f| f.model(d))
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
            SweepRow {
                d,
                colors: t.colors,
                value: t.value,
                error: (t.value - exact).abs(),
                bound: (d >= 2).then(|| probing_bound(d, n, a_rig, iv.b).ok()).flatten(),
                bound_gap: (d >= 2 && iv.a > 0.0).then(|| probing_bound(d, n, iv.a, iv.b).ok()).flatten(),
                model,
                diff_estimate: (traces[d].value - t.value).abs(),
            }
        })
        .collect::<Vec<_>>();
    output::emit(a.csv.as_deref(), &output::csv(&rows)?)
}

#[derive(Serialize)]
struct BenchRow {
    family: String,
    n: usize,
    nnz: usize,
    method: String,
    d: Option<usize>,
    colors: Option<usize>,
    n_r: Option<usize>,
    n_h: Option<usize>,
    value: f64,
    poly_iters: usize,
    rat_iters: usize,
    factorizations: usize,
    time_s: f64,
}

/// Probing runs at the distance given by `--d`, 4 by default, so that color
/// counts are comparable across sizes.
pub fn bench_scaling(a: BenchArgs) -> Result<(), Failure> {
    if a.min_exp > a.max_exp || a.max_exp > 30 {
        return Err(Failure::config("need --min-exp <= --max-exp <= 30"));
    }
    let mut cfg = estimator_config(&a.est)?;
    if a.est.method == Method::Probing {
        cfg.selection = DSelection::Fixed(a.est.d.unwrap_or(4));
    }
    let pool = pool(a.threads)?;
    let mut rows = Vec::new();
    for e in a.min_exp..=a.max_exp {
        let n = 1usize << e;
        let spec = match a.family {
            Family::Grid2d => GraphSpec::Grid2d {
                side: (n as f64).sqrt().round() as usize,
            },
            Family::Ba => GraphSpec::BarabasiAlbert { n, attach: a.attach },
        };
        let raw = spec.build(a.est.seed)?;
        let loaded = input::density(spec.to_string(), raw, Some(spec))?;
        let est = pool.install(|| entropy(&loaded.rho, a.est.method, &cfg))?;
        rows.push(BenchRow {
            family: spec.to_string(),
            n: loaded.n(),
            nnz: loaded.nnz(),
            method: est.method.to_string(),
            d: est.d,
            colors: est.colors,
            n_r: est.n_r,
            n_h: est.n_h,
            value: est.value,
            poly_iters: est.poly_iters,
            rat_iters: est.rat_iters,
            factorizations: est.solver.factorizations,
            time_s: est.wall_time,
        });
        if est.wall_time > a.timeout {
            eprintln!("stopping after n = {n}: {:.1} s exceeds the timeout", est.wall_time);
            break;
        }
    }
    output::emit(a.csv.as_deref(), &output::csv(&rows)?)
}

#[derive(Serialize)]
struct KrylovRow {
    m: usize,
    pole: f64,
    value: f64,
    error: f64,
    lower: f64,
    upper: f64,
    estimate: f64,
    sandwich: bool,
}

/// Parses `poly`, `eds` or `mixed:K` into `iters` poles.
pub fn parse_schedule(s: &str, iters: usize, eds: &EdsPoles<f64>) -> Result<Vec<Pole<f64>>, Failure> {
    let infinite = match s {
        "poly" => iters,
        "eds" => 0,
        _ => s
            .strip_prefix("mixed:")
            .and_then(|k| k.parse::<usize>().ok())
            .ok_or_else(|| Failure::config(format!("unknown schedule '{s}' (poly|eds|mixed:K)")))?
            .min(iters),
    };
    let finite = eds.prefix(iters - infinite).into_iter().map(Pole::Finite);
    Ok(std::iter::repeat_n(Pole::Infinite, infinite).chain(finite).collect())
}

/// Eigenvalues at the Chebyshev points of `[a, b]`.
pub fn chebyshev_points(n: usize, a: f64, b: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .collect()
}

pub fn krylov_trace(a: KrylovTraceArgs) -> Result<(), Failure> {
    if a.n < 2 || !(a.a > 0.0 && a.b > a.a) || a.iters == 0 {
        return Err(Failure::config("need --n >= 2, 0 < --a < --b and --iters >= 1"));
    }
    let diag = chebyshev_points(a.n, a.a, a.b);
    let b = vec![1.0 / (a.n as f64).sqrt(); a.n];
    let exact: f64 = diag.iter().map(|&x| -x * x.ln()).sum::<f64>() / a.n as f64;
    let eds = EdsPoles::new(a.a, a.b)?;
    let mut opts = QuadformOptions::new(0.0, Interval::new(a.a, a.b)?);
    opts.schedule = PoleSchedule::Fixed(parse_schedule(&a.schedule, a.iters, &eds)?);
    opts.max_iters = a.iters + 1;
    opts.mode = a.bound_mode;
    opts.record = true;
    let res = adaptive_quadform(&DiagonalOperator { diag }, &b, &NegEntropy, &opts)?;
    let rows: Vec<KrylovRow> = res
        .trace
        .iter()
        .map(|r| {
            let error = (r.value - exact).abs();
            KrylovRow {
                m: r.m,
                pole: r.pole,
                value: r.value,
                error,
                lower: r.lower,
                upper: r.upper,
                estimate: r.estimate,
                sandwich: r.lower <= error && error <= r.upper,
            }
        })
        .collect();
    output::emit(a.csv.as_deref(), &output::csv(&rows)?)
}
