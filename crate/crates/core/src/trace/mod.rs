//! Estimators of `S(rho) = tr f(rho)`, `f(x) = -x log x`.
//!
//! Every quadratic form goes through [`EntropyOperator`]. The requested relative
//! accuracy `eps` is turned into absolute tolerances with a rough magnitude
//! `pre` of the entropy: `eps * pre / 2` for the trace estimator (coloring error
//! or stochastic error) and `eps * pre / 2` for all Krylov errors together.

mod engine;
mod interval;
mod probing;
mod stochastic;

pub use engine::{EntropyOperator, KrylovSettings};
pub use interval::{spectral_interval, IntervalOptions, SpectralInterval};
pub use probing::{
    dense_matrix_function, fit_heuristic, probing_error_identity, probing_trace, probing_vector, ClassResult,
    HeuristicFit, ModelFit, ProbingTrace,
};
pub use stochastic::{
    adaptive_hutchpp, hutchinson, hutchpp, orthonormal_basis, pilot_estimate, required_samples, AdaptiveOptions,
    Counts, DenseTraceOperator, KrylovTolerances, StochasticResult, TraceOperator,
};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::bounds::{neg_xlogx, select_d_apriori};
use crate::coloring::{greedy_distance_coloring, Coloring};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solver::{SolverConfig, SolverStats};
use crate::sparse::{DensityMatrix, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Probing,
    Hutchinson,
    Hutchpp,
    AdaptiveHutchpp,
}

impl Method {
    pub fn is_stochastic(self) -> bool {
        self != Self::Probing
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probing" => Ok(Self::Probing),
            "hutchinson" => Ok(Self::Hutchinson),
            "hutchpp" => Ok(Self::Hutchpp),
            "adaptive-hutchpp" => Ok(Self::AdaptiveHutchpp),
            _ => Err(Error::Invalid(format!(
                "unknown method '{s}' (probing|hutchinson|hutchpp|adaptive-hutchpp)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Probing => "probing",
            Self::Hutchinson => "hutchinson",
            Self::Hutchpp => "hutchpp",
            Self::AdaptiveHutchpp => "adaptive-hutchpp",
        })
    }
}

/// How the probing distance is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DSelection {
    /// fit to `traceP_1..3`
    Heuristic,
    /// smallest `d` satisfying the a priori bound
    #[default]
    Apriori,
    Fixed(usize),
}

impl FromStr for DSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heuristic" => Ok(Self::Heuristic),
            "apriori" => Ok(Self::Apriori),
            _ => s
                .parse::<usize>()
                .ok()
                .filter(|&d| d >= 1)
                .map(Self::Fixed)
                .ok_or_else(|| Error::Invalid(format!("invalid distance selection '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub eps_rel: f64,
    /// failure probability of the stochastic estimators
    pub delta: f64,
    pub selection: DSelection,
    pub order: Ordering,
    pub seed: u64,
    pub krylov: KrylovSettings,
    pub interval: IntervalOptions,
    pub solver: SolverConfig,
    /// largest distance considered by the a priori rule
    pub d_max: usize,
    pub stochastic: AdaptiveOptions,
    /// sketch size of non-adaptive Hutch++
    pub hutchpp_sketch: usize,
    pub pilot_samples: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            eps_rel: 1e-3,
            delta: 1e-2,
            selection: DSelection::Apriori,
            order: Ordering::Degree,
            seed: 0,
            krylov: KrylovSettings::default(),
            interval: IntervalOptions::default(),
            solver: SolverConfig::default(),
            d_max: 64,
            stochastic: AdaptiveOptions::default(),
            hutchpp_sketch: 10,
            pilot_samples: 10,
        }
    }
}

/// Result of an entropy computation with its accounting.
#[derive(Clone, Debug)]
pub struct EntropyEstimate<T> {
    pub value: T,
    pub method: Method,
    pub eps_rel: f64,
    pub delta: Option<f64>,
    /// magnitude used to turn `eps_rel` into absolute tolerances
    pub rough_estimate: T,
    /// absolute tolerance of the trace estimator
    pub eps_abs: T,
    /// absolute tolerance shared by all Krylov evaluations
    pub krylov_budget: T,
    pub d: Option<usize>,
    pub colors: Option<usize>,
    pub fit: Option<HeuristicFit<T>>,
    /// the heuristic fit failed and the a priori rule chose `d`
    pub fallback: bool,
    pub n_r: Option<usize>,
    pub n_h: Option<usize>,
    pub quadforms: usize,
    pub poly_iters: usize,
    pub rat_iters: usize,
    pub interval: SpectralInterval<T>,
    pub solver: SolverStats,
    pub wall_time: f64,
}

/// `sum_i f(rho_ii)`, an upper bound on the entropy.
pub fn diagonal_entropy<T: Scalar>(rho: &DensityMatrix<T>) -> T {
    rho.matrix().diagonal().into_iter().map(neg_xlogx).sum()
}

/// Spectral interval estimate and Krylov operator for `rho` under `cfg`.
pub fn entropy_operator<T: Scalar>(rho: &DensityMatrix<T>, cfg: &EstimatorConfig) -> Result<EntropyOperator<T>> {
    if !(cfg.eps_rel > 0.0 && cfg.eps_rel < 1.0) {
        return Err(Error::Invalid(format!("eps must lie in (0, 1), got {}", cfg.eps_rel)));
    }
    let mut iopts = cfg.interval;
    iopts.seed = cfg.seed;
    let interval = spectral_interval(rho.matrix(), rho.annihilates_ones(), &iopts)?;
    Ok(EntropyOperator::new(rho, interval, cfg.krylov, cfg.solver))
}

#[derive(Default)]
struct Tally {
    quadforms: usize,
    poly: usize,
    rat: usize,
}

impl Tally {
    fn add_probing<T: Scalar>(&mut self, p: &ProbingTrace<T>) {
        self.quadforms += p.classes.len();
        self.poly += p.poly_iters;
        self.rat += p.rat_iters;
    }
    fn add_counts(&mut self, forms: usize, c: Counts) {
        self.quadforms += forms;
        self.poly += c.poly;
        self.rat += c.rat;
    }
}

/// Probing pipeline: `traceP_1` gives the magnitude, the distance is chosen by
/// the configured rule, and the probing estimate at that distance is returned.
/// Under the heuristic rule `traceP_2` and `traceP_3` are computed as well; when
/// the chosen distance is at most 3 the already computed `traceP_3` is returned.
pub fn entropy_probing<T: Scalar>(rho: &DensityMatrix<T>, cfg: &EstimatorConfig) -> Result<EntropyEstimate<T>> {
    let start = Instant::now();
    let op = entropy_operator(rho, cfg)?;
    let n = rho.n();
    let graph = rho.matrix().graph();
    let order = cfg.order.order(&graph);
    let color = |d: usize| -> Result<Coloring> { greedy_distance_coloring(&graph, d, &order) };
    let eps = T::lit(cfg.eps_rel);
    let half = T::lit(0.5);
    let mut tally = Tally::default();

    // diagonal entropy bounds S from above, so this tolerance is not tighter than needed
    let upper = diagonal_entropy(rho);
    let p1 = probing_trace(&op, &color(1)?, eps * upper * half)?;
    tally.add_probing(&p1);
    let pre = if p1.value > T::zero() { p1.value } else { upper };
    let eps_abs = eps * pre * half;
    let budget = eps * pre * half;

    // beyond the diameter every class is a single node and probing is exact
    let exact_d = graph.diameter_upper_bound().max(1);
    let apriori = |eps_abs: T| -> Result<usize> {
        let iv = op.interval();
        let a = if rho.annihilates_ones() { T::zero() } else { iv.a };
        match select_d_apriori(n, a, iv.b, eps_abs, cfg.d_max.min(exact_d).max(2)) {
            Ok(d) => Ok(d.min(exact_d)),
            Err(_) if exact_d <= cfg.d_max => Ok(exact_d),
            Err(e) => Err(e),
        }
    };
    let mut fit = None;
    let mut fallback = false;
    let mut reuse = None;
    let d = match cfg.selection {
        DSelection::Fixed(d) => d,
        DSelection::Apriori => apriori(eps_abs)?,
        DSelection::Heuristic => {
            let p2 = probing_trace(&op, &color(2)?, budget)?;
            tally.add_probing(&p2);
            let p3 = probing_trace(&op, &color(3)?, budget)?;
            tally.add_probing(&p3);
            let f = fit_heuristic([p1.value, p2.value, p3.value], eps_abs, cfg.d_max);
            let d = match f.d_star {
                Some(d) if d <= 3 => {
                    reuse = Some(p3);
                    3
                }
                Some(d) => d,
                None => {
                    fallback = true;
                    apriori(eps_abs)?
                }
            };
            fit = Some(f);
            d
        }
    };
    let result = match reuse {
        Some(p) => p,
        None => {
            let p = probing_trace(&op, &color(d)?, budget)?;
            tally.add_probing(&p);
            p
        }
    };
    Ok(EntropyEstimate {
        value: result.value,
        method: Method::Probing,
        eps_rel: cfg.eps_rel,
        delta: None,
        rough_estimate: pre,
        eps_abs,
        krylov_budget: budget,
        d: Some(d),
        colors: Some(result.colors),
        fit,
        fallback,
        n_r: None,
        n_h: None,
        quadforms: tally.quadforms,
        poly_iters: tally.poly,
        rat_iters: tally.rat,
        interval: *op.interval(),
        solver: op.solver_stats(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Stochastic pipeline: a Hutchinson pilot on its own random stream gives the
/// magnitude, then Hutchinson (`hutchinson`), Hutch++ with a fixed sketch
/// (`hutchpp`) or adaptive Hutch++ runs with deflated samples sized by the tail
/// bound for `eps_abs` and `delta`.
pub fn entropy_stochastic<T: Scalar>(
    rho: &DensityMatrix<T>,
    method: Method,
    cfg: &EstimatorConfig,
) -> Result<EntropyEstimate<T>> {
    if !method.is_stochastic() {
        return entropy_probing(rho, cfg);
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::Invalid(format!("delta must lie in (0, 1), got {}", cfg.delta)));
    }
    let start = Instant::now();
    let op = entropy_operator(rho, cfg)?;
    let eps = T::lit(cfg.eps_rel);
    let half = T::lit(0.5);
    let mut tally = Tally::default();
    let upper = diagonal_entropy(rho);
    let (pilot, c) = pilot_estimate(&op, cfg.pilot_samples, cfg.seed, eps * upper * half)?;
    tally.add_counts(cfg.pilot_samples.max(1), c);
    let pre = if pilot > T::zero() { pilot } else { upper };
    let eps_abs = eps * pre * half;
    let budget = eps * pre * half;
    let mut opts = cfg.stochastic;
    opts.sketch = match method {
        Method::Hutchinson => Some(0),
        Method::Hutchpp => Some(cfg.hutchpp_sketch),
        _ => None,
    };
    let res = adaptive_hutchpp(&op, eps_abs, T::lit(cfg.delta), cfg.seed, budget, &opts)?;
    tally.add_counts(res.n_r + res.n_h, res.counts);
    Ok(EntropyEstimate {
        value: res.value,
        method,
        eps_rel: cfg.eps_rel,
        delta: Some(cfg.delta),
        rough_estimate: pre,
        eps_abs,
        krylov_budget: budget,
        d: None,
        colors: None,
        fit: None,
        fallback: false,
        n_r: Some(res.n_r),
        n_h: Some(res.n_h),
        quadforms: tally.quadforms,
        poly_iters: tally.poly,
        rat_iters: tally.rat,
        interval: *op.interval(),
        solver: op.solver_stats(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Dispatches on `method`.
pub fn entropy<T: Scalar>(rho: &DensityMatrix<T>, method: Method, cfg: &EstimatorConfig) -> Result<EntropyEstimate<T>> {
    match method {
        Method::Probing => entropy_probing(rho, cfg),
        _ => entropy_stochastic(rho, method, cfg),
    }
}
