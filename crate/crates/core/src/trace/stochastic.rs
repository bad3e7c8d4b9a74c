use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::rng::gaussian_vector;
use crate::scalar::{axpy, dot, Scalar};

use super::engine::EntropyOperator;

/// Krylov iteration counts of one evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub poly: usize,
    pub rat: usize,
}

impl std::ops::Add for Counts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            poly: self.poly + o.poly,
            rat: self.rat + o.rat,
        }
    }
}

impl std::iter::Sum for Counts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

/// Symmetric operator `B` accessed through quadratic forms and products.
pub trait TraceOperator<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    /// `x^T B x` with absolute error at most `tol`.
    fn quadform(&self, x: &[T], tol: T) -> Result<(T, Counts)>;
    /// `B x` with 2-norm error at most `tol`.
    fn apply(&self, x: &[T], tol: T) -> Result<(Vec<T>, Counts)>;
}

impl<T: Scalar> TraceOperator<T> for EntropyOperator<T> {
    fn dim(&self) -> usize {
        self.n()
    }
    fn quadform(&self, x: &[T], tol: T) -> Result<(T, Counts)> {
        let r = EntropyOperator::quadform(self, x, tol)?;
        Ok((
            r.value,
            Counts {
                poly: r.poly_iters,
                rat: r.rat_iters,
            },
        ))
    }
    fn apply(&self, x: &[T], tol: T) -> Result<(Vec<T>, Counts)> {
        let r = self.funvec(x, tol)?;
        Ok((
            r.vector,
            Counts {
                poly: r.poly_iters,
                rat: r.rat_iters,
            },
        ))
    }
}

/// Explicit dense operator, evaluated exactly.
#[derive(Clone, Debug)]
pub struct DenseTraceOperator<T>(pub DenseMatrix<T>);

impl<T: Scalar> TraceOperator<T> for DenseTraceOperator<T> {
    fn dim(&self) -> usize {
        self.0.rows()
    }
    fn quadform(&self, x: &[T], _tol: T) -> Result<(T, Counts)> {
        Ok((dot(x, &self.0.mul_vec(x)), Counts::default()))
    }
    fn apply(&self, x: &[T], _tol: T) -> Result<(Vec<T>, Counts)> {
        Ok((self.0.mul_vec(x), Counts::default()))
    }
}

/// Stream offsets keeping the random vectors of the phases independent.
const SKETCH_STREAM: u64 = 1 << 32;
const SAMPLE_STREAM: u64 = 2 << 32;
const PILOT_STREAM: u64 = 3 << 32;

/// Absolute Krylov tolerances of the individual evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovTolerances<T> {
    /// each quadratic form `q_i^T B q_i` of the low-rank part
    pub lowrank: T,
    /// each deflated Hutchinson sample
    pub sample: T,
    /// each product `B omega_i` of the sketch
    pub apply: T,
}

impl<T: Scalar> KrylovTolerances<T> {
    /// Splits a total budget: half to the `n_r` low-rank forms, half to the
    /// Hutchinson mean (each sample then needs the same tolerance). Sketch
    /// products only shape the deflation subspace and get the sample tolerance.
    pub fn split(budget: T, n_r: usize) -> Self {
        let half = T::lit(0.5) * budget;
        Self {
            lowrank: half / T::from_usize_lossy(n_r.max(1)),
            sample: half,
            apply: half,
        }
    }

    /// The same tolerance everywhere.
    pub fn uniform(tol: T) -> Self {
        Self {
            lowrank: tol,
            sample: tol,
            apply: tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StochasticResult<T> {
    pub value: T,
    /// vectors in the deflation basis
    pub n_r: usize,
    /// Hutchinson samples
    pub n_h: usize,
    /// sketch products computed (at least `n_r`)
    pub sketch_products: usize,
    /// estimate of `||Delta||_F^2` for the deflated operator used to size the sample
    pub residual_norm2: T,
    pub counts: Counts,
}

/// Plain Hutchinson estimator `(1/N) sum_j x_j^T B x_j` with Gaussian `x_j`.
pub fn hutchinson<T: Scalar, O: TraceOperator<T> + ?Sized>(
    op: &O,
    samples: usize,
    seed: u64,
    tol: T,
) -> Result<StochasticResult<T>> {
    if samples == 0 {
        return Err(Error::Invalid("Hutchinson needs at least one sample".into()));
    }
    let vals = deflated_samples(op, &[], seed, SAMPLE_STREAM, 0..samples, tol)?;
    let (mean, var) = mean_var(vals.iter().map(|v| v.0));
    Ok(StochasticResult {
        value: mean,
        n_r: 0,
        n_h: samples,
        sketch_products: 0,
        residual_norm2: T::lit(0.5) * var,
        counts: vals.iter().map(|v| v.1).sum(),
    })
}

/// Hutch++ with `n_r` sketch vectors and `n_h` deflated Hutchinson samples.
pub fn hutchpp<T: Scalar, O: TraceOperator<T> + ?Sized>(
    op: &O,
    n_r: usize,
    n_h: usize,
    seed: u64,
    tols: KrylovTolerances<T>,
) -> Result<StochasticResult<T>> {
    if n_r == 0 {
        return Err(Error::Invalid("Hutch++ needs at least one sketch vector".into()));
    }
    let (ys, mut counts) = sketch(op, seed, 0..n_r, tols.apply)?;
    let q = orthonormal_basis(&ys);
    let (low, c) = lowrank_trace(op, &q, tols.lowrank)?;
    counts = counts + c;
    let vals = deflated_samples(op, &q, seed, SAMPLE_STREAM, 0..n_h, tols.sample)?;
    let (mean, var) = mean_var(vals.iter().map(|v| v.0));
    counts = counts + vals.iter().map(|v| v.1).sum();
    Ok(StochasticResult {
        value: low + if n_h > 0 { mean } else { T::zero() },
        n_r: q.len(),
        n_h,
        sketch_products: n_r,
        residual_norm2: T::lit(0.5) * var,
        counts,
    })
}

/// Parameters of the adaptive estimators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOptions {
    /// smallest sketch size
    pub min_sketch: usize,
    /// fixed sketch size; `None` selects it adaptively
    pub sketch: Option<usize>,
    /// samples drawn before the sample variance replaces the sketch estimate
    pub variance_samples: usize,
    /// cap on sketch products plus samples
    pub max_vectors: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            min_sketch: 3,
            sketch: None,
            variance_samples: 10,
            max_vectors: 10_000,
        }
    }
}

/// Hutchinson samples needed for `P(|error| > eps) <= delta` when the deflated
/// operator has `||Delta||_F^2 = fro2` (Gaussian tail bound with
/// `||Delta||_2 <= ||Delta||_F`).
pub fn required_samples<T: Scalar>(fro2: T, eps: T, delta: T) -> usize {
    let f = fro2.max(T::zero());
    let need = T::lit(4.0) * (T::lit(2.0) / delta).ln() * (f + eps * f.sqrt()) / (eps * eps);
    let need = need.ceil().to_f64().unwrap_or(f64::INFINITY);
    if need.is_finite() {
        need.max(1.0) as usize
    } else {
        usize::MAX
    }
}

/// Adaptive Hutch++: grows the sketch one product at a time while the
/// predicted total cost `r + N_H(r)` decreases, then draws deflated samples
/// until their number meets the tail bound for `eps`, `delta`.
///
/// Growth also continues while `r + N_H(r) >= n`, where a full sketch is cheaper.
/// `N_H(r)` uses `||(I - QQ^T) B omega||^2` of the next sketch product, an
/// unbiased estimate of `||(I - QQ^T) B||_F^2 >= ||Delta||_F^2`. Once
/// `variance_samples` samples exist, `||Delta||_F^2` is re-estimated as half
/// their sample variance. With `opts.sketch = Some(r)` the first phase is
/// skipped (`Some(0)` gives adaptive plain Hutchinson).
pub fn adaptive_hutchpp<T: Scalar, O: TraceOperator<T> + ?Sized>(
    op: &O,
    eps: T,
    delta: T,
    seed: u64,
    krylov_budget: T,
    opts: &AdaptiveOptions,
) -> Result<StochasticResult<T>> {
    if !(eps > T::zero()) || !(delta > T::zero() && delta < T::one()) {
        return Err(Error::Invalid("need eps > 0 and 0 < delta < 1".into()));
    }
    let n = op.dim();
    let apply_tol = KrylovTolerances::split(krylov_budget, 1).apply;
    let mut counts = Counts::default();
    let mut ys: Vec<Vec<T>>;
    let mut fro2 = T::infinity();
    match opts.sketch {
        Some(r) => {
            let (y, c) = sketch(op, seed, 0..r.min(n), apply_tol)?;
            ys = y;
            counts = counts + c;
        }
        None => {
            let start = opts.min_sketch.max(1).min(n);
            let (y, c) = sketch(op, seed, 0..start + 1, apply_tol)?;
            ys = y;
            counts = counts + c;
            let mut prev_cost = usize::MAX;
            let mut q = orthonormal_basis(&ys[..start]);
            let mut top = ys.iter().map(|y| dot(y, y)).fold(T::zero(), T::max).sqrt();
            loop {
                let r = ys.len() - 1;
                let mut hold = ys[r].clone();
                project_out(&q, &mut hold);
                let est = dot(&hold, &hold);
                let cost = r.saturating_add(required_samples(est, eps, delta));
                fro2 = est;
                // a predicted cost of n or more is beaten by sketching the whole space
                let rising = cost >= prev_cost && cost < n;
                if rising || r + 1 >= n || ys.len() >= opts.max_vectors {
                    break;
                }
                prev_cost = cost;
                // the holdout joins the basis
                let nh = est.sqrt();
                if nh > T::lit(1e-12) * top {
                    hold.iter_mut().for_each(|x| *x /= nh);
                    q.push(hold);
                }
                let (y, c) = sketch(op, seed, ys.len()..ys.len() + 1, apply_tol)?;
                top = top.max(dot(&y[0], &y[0]).sqrt());
                ys.extend(y);
                counts = counts + c;
            }
        }
    }
    let q = orthonormal_basis(&ys);
    let tols = KrylovTolerances::split(krylov_budget, q.len());
    let (low, c) = lowrank_trace(op, &q, tols.lowrank)?;
    counts = counts + c;

    let mut target = if fro2.is_finite() {
        required_samples(fro2, eps, delta)
    } else {
        opts.variance_samples.max(1)
    };
    // nothing left to sample once the sketch spans the whole space
    if q.len() >= n {
        target = 0;
    }
    let mut values: Vec<T> = Vec::new();
    while values.len() < target {
        if ys.len() + target > opts.max_vectors {
            return Err(Error::BudgetExceeded {
                needed: ys.len() + target,
                limit: opts.max_vectors,
            });
        }
        let batch = if values.len() < opts.variance_samples {
            target.min(opts.variance_samples)
        } else {
            target
        };
        let more = deflated_samples(op, &q, seed, SAMPLE_STREAM, values.len()..batch, tols.sample)?;
        for (v, c) in more {
            values.push(v);
            counts = counts + c;
        }
        if values.len() >= opts.variance_samples && values.len() >= 2 {
            let (_, var) = mean_var(values.iter().copied());
            fro2 = T::lit(0.5) * var;
            target = required_samples(fro2, eps, delta);
        }
    }
    let (mean, _) = mean_var(values.iter().copied());
    Ok(StochasticResult {
        value: low + if values.is_empty() { T::zero() } else { mean },
        n_r: q.len(),
        n_h: values.len(),
        sketch_products: ys.len(),
        residual_norm2: if fro2.is_finite() { fro2 } else { T::zero() },
        counts,
    })
}

/// Mean of `samples` Hutchinson quadratic forms on a stream disjoint from the
/// estimators, for a rough magnitude of the trace.
pub fn pilot_estimate<T: Scalar, O: TraceOperator<T> + ?Sized>(
    op: &O,
    samples: usize,
    seed: u64,
    tol: T,
) -> Result<(T, Counts)> {
    let vals = deflated_samples(op, &[], seed, PILOT_STREAM, 0..samples.max(1), tol)?;
    let (mean, _) = mean_var(vals.iter().map(|v| v.0));
    Ok((mean, vals.iter().map(|v| v.1).sum()))
}

fn sketch<T: Scalar, O: TraceOperator<T> + ?Sized>(
    op: &O,
    seed: u64,
    range: std::ops::Range<usize>,
    tol: T,
) -> Result<(Vec<Vec<T>>, Counts)> {
    let n = op.dim();
    let out = range
        .into_par_iter()
        .map(|i| {
            let w: Vec<T> = gaussian_vector(n, seed, SKETCH_STREAM + i as u64);
            op.apply(&w, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let counts = out.iter().map(|o| o.1).sum();
    Ok((out.into_iter().map(|o| o.0).collect(), counts))
}

fn lowrank_trace<T: Scalar, O: TraceOperator<T> + ?Sized>(op: &O, q: &[Vec<T>], tol: T) -> Result<(T, Counts)> {
    let out = q
        .par_iter()
        .map(|qi| op.quadform(qi, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok((out.iter().map(|o| o.0).sum(), out.iter().map(|o| o.1).sum()))
}

fn deflated_samples<T: Scalar, O: TraceOperator<T> + ?Sized>(
    op: &O,
    q: &[Vec<T>],
    seed: u64,
    stream: u64,
    range: std::ops::Range<usize>,
    tol: T,
) -> Result<Vec<(T, Counts)>> {
    let n = op.dim();
    range
        .into_par_iter()
        .map(|j| {
            let mut x: Vec<T> = gaussian_vector(n, seed, stream + j as u64);
            project_out(q, &mut x);
            op.quadform(&x, tol)
        })
        .collect()
}

fn project_out<T: Scalar>(q: &[Vec<T>], x: &mut [T]) {
    for _ in 0..2 {
        for qi in q {
            let c = dot(qi, x);
            axpy(-c, qi, x);
        }
    }
}

/// Orthonormal basis of the span of `cols` by Gram-Schmidt with column pivoting;
/// directions below `1e-12` times the largest column norm are dropped.
pub fn orthonormal_basis<T: Scalar>(cols: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut work: Vec<Vec<T>> = cols.to_vec();
    let norm = |v: &[T]| dot(v, v).sqrt();
    let top = work.iter().map(|c| norm(c)).fold(T::zero(), T::max);
    let tol = T::lit(1e-12) * top;
    let mut q: Vec<Vec<T>> = Vec::new();
    while !work.is_empty() {
        let (idx, best) = work
            .iter()
            .enumerate()
            .map(|(i, c)| (i, norm(c)))
            .fold((0, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if !(best > tol) {
            break;
        }
        let mut v = work.swap_remove(idx);
        project_out(&q, &mut v);
        let nv = norm(&v);
        if !(nv > tol) {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        for c in work.iter_mut() {
            let d = dot(&v, c);
            axpy(-d, &v, c);
        }
        q.push(v);
    }
    q
}

fn mean_var<T: Scalar>(vals: impl Iterator<Item = T> + Clone) -> (T, T) {
    let count = vals.clone().count();
    if count == 0 {
        return (T::zero(), T::zero());
    }
    let nf = T::from_usize_lossy(count);
    let mean = vals.clone().sum::<T>() / nf;
    if count < 2 {
        return (mean, T::zero());
    }
    let var = vals.map(|v| (v - mean) * (v - mean)).sum::<T>() / (nf - T::one());
    (mean, var)
}
