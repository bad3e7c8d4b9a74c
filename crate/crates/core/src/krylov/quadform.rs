use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::arnoldi::{BoundMode, Projected, RationalArnoldi};
use super::eds::EdsPoles;
use super::posterior::{funvec_bounds, quadform_bounds, BoundGrid, ErrorBounds};
use super::{Interval, KrylovOperator, MatrixFunction, Pole};

/// Error statistic compared against the tolerance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StopRule {
    /// upper bound
    #[default]
    Bound,
    /// geometric mean of lower and upper bound
    Estimate,
}

impl FromStr for StopRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bound" => Ok(Self::Bound),
            "estimate" => Ok(Self::Estimate),
            _ => Err(Error::Invalid(format!("unknown stopping rule '{s}' (bound|estimate)"))),
        }
    }
}

/// Which pole is used at each step.
#[derive(Clone, Debug)]
pub enum PoleSchedule<T> {
    /// only infinite poles (polynomial Krylov)
    Polynomial,
    /// infinite poles until convergence stalls, then the EDS sequence
    Adaptive(Arc<EdsPoles<T>>),
    /// the given poles in order; the run ends when they are used up
    Fixed(Vec<Pole<T>>),
}

#[derive(Clone, Debug)]
pub struct QuadformOptions<T> {
    /// absolute tolerance on the error statistic
    pub tol: T,
    pub stop: StopRule,
    /// interval enclosing the relevant spectrum
    pub interval: Interval<T>,
    pub schedule: PoleSchedule<T>,
    /// largest projected dimension
    pub max_iters: usize,
    pub min_iters: usize,
    /// sample points used to bound the error function
    pub grid_points: usize,
    pub mode: BoundMode,
    /// switch to finite poles once `err_k / err_{k-l-1} >= c^l` with `l = switch_window`
    pub switch_window: usize,
    pub switch_factor: T,
    /// work on `b - mean(b) 1` and add `f(0) (1^T b)^2 / n`; requires `A 1 = 0`
    pub desingularize: bool,
    /// keep a per-iteration record
    pub record: bool,
}

impl<T: Scalar> QuadformOptions<T> {
    pub fn new(tol: T, interval: Interval<T>) -> Self {
        Self {
            tol,
            stop: StopRule::Bound,
            interval,
            schedule: PoleSchedule::Polynomial,
            max_iters: 150,
            min_iters: 2,
            grid_points: 2000,
            mode: BoundMode::PoleSwap,
            switch_window: 3,
            switch_factor: T::lit(0.75),
            desingularize: false,
            record: false,
        }
    }
}

pub type FunvecOptions<T> = QuadformOptions<T>;

/// One iteration of a quadratic form or matrix function evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterRecord {
    pub m: usize,
    /// pole added to reach this dimension (`inf` for polynomial steps)
    pub pole: f64,
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    /// scalar value (quadratic form) or vector norm (function times vector)
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct QuadformResult<T> {
    pub value: T,
    pub lower: T,
    pub upper: T,
    pub estimate: T,
    /// final projected dimension
    pub iterations: usize,
    pub poly_iters: usize,
    pub rat_iters: usize,
    pub converged: bool,
    /// dimension at which finite poles were switched on
    pub switched_at: Option<usize>,
    pub degenerate: bool,
    pub trace: Vec<IterRecord>,
}

#[derive(Clone, Debug)]
pub struct FunvecResult<T> {
    pub vector: Vec<T>,
    pub lower: T,
    pub upper: T,
    pub estimate: T,
    pub iterations: usize,
    pub poly_iters: usize,
    pub rat_iters: usize,
    pub converged: bool,
    pub trace: Vec<IterRecord>,
}

struct Driver<T> {
    history: Vec<T>,
    switched_at: Option<usize>,
    next_eds: usize,
    poly: usize,
    rat: usize,
    last_pole: f64,
}

enum Next<T> {
    Done(bool),
    Pole(Pole<T>),
}

impl<T: Scalar> Driver<T> {
    fn new() -> Self {
        Self {
            history: Vec::new(),
            switched_at: None,
            next_eds: 1,
            poly: 1,
            rat: 0,
            last_pole: f64::INFINITY,
        }
    }

    fn statistic(bounds: &ErrorBounds<T>, stop: StopRule) -> T {
        match stop {
            StopRule::Bound => bounds.upper,
            StopRule::Estimate => bounds.estimate,
        }
    }

    /// Decides whether to stop and otherwise which pole comes next.
    fn advance(&mut self, m: usize, stat: T, exhausted: bool, opts: &QuadformOptions<T>) -> Next<T> {
        self.history.push(stat);
        if exhausted || (stat <= opts.tol && m >= opts.min_iters) {
            return Next::Done(true);
        }
        if m >= opts.max_iters {
            return Next::Done(false);
        }
        let pole = match &opts.schedule {
            PoleSchedule::Polynomial => Pole::Infinite,
            PoleSchedule::Fixed(list) => match list.get(m - 1) {
                Some(&p) => p,
                None => return Next::Done(false),
            },
            PoleSchedule::Adaptive(eds) => {
                let l = opts.switch_window;
                if self.switched_at.is_none() && m >= l + 2 {
                    let ratio = self.history[m - 1] / self.history[m - l - 2];
                    if ratio >= opts.switch_factor.powi(l as i32) {
                        self.switched_at = Some(m);
                    }
                }
                if self.switched_at.is_some() {
                    let p = eds.pole(self.next_eds);
                    self.next_eds += 1;
                    Pole::Finite(p)
                } else {
                    Pole::Infinite
                }
            }
        };
        match pole {
            Pole::Infinite => self.poly += 1,
            Pole::Finite(_) => self.rat += 1,
        }
        self.last_pole = pole.as_f64();
        Next::Pole(pole)
    }
}

fn quad_value<T: Scalar, F: MatrixFunction<T> + ?Sized>(f: &F, p: &Projected<T>) -> T {
    let s: T = p
        .theta
        .iter()
        .zip(&p.beta)
        .map(|(&t, &b)| f.value(t) * b * b)
        .sum();
    p.b_norm * p.b_norm * s
}

/// Ritz values in `[-1e-12 b, 0)` are rounding artifacts of a semidefinite
/// problem and are set to 0; more negative ones are an error.
fn clamp_ritz<T: Scalar>(mut p: Projected<T>, b: T) -> Result<Projected<T>> {
    let floor = -T::lit(1e-12) * b.abs();
    for t in p.theta.iter_mut() {
        if *t < T::zero() {
            if *t < floor {
                return Err(Error::NotPositiveSemidefinite(t.as_f64()));
            }
            *t = T::zero();
        }
    }
    Ok(p)
}

fn zero_bounds<T: Scalar>() -> ErrorBounds<T> {
    ErrorBounds {
        lower: T::zero(),
        upper: T::zero(),
        estimate: T::zero(),
        degenerate: false,
    }
}

/// Approximates `b^T f(A) b` by rational Krylov projection, adding poles until the
/// chosen error statistic drops below `opts.tol` (and at least `opts.min_iters`
/// dimensions are used) or `opts.max_iters` is reached (`converged = false`).
pub fn adaptive_quadform<T, O, F>(op: &O, b: &[T], f: &F, opts: &QuadformOptions<T>) -> Result<QuadformResult<T>>
where
    T: Scalar,
    O: KrylovOperator<T> + ?Sized,
    F: MatrixFunction<T> + ?Sized,
{
    let n = op.dim();
    let sum: T = b.iter().copied().sum();
    let offset = if opts.desingularize {
        f.value(T::zero()) * sum * sum / T::from_usize_lossy(n)
    } else {
        T::zero()
    };
    let mut engine = match RationalArnoldi::new(op, b, opts.mode, opts.desingularize, opts.max_iters + 1) {
        Ok(e) => e,
        Err(Error::Invalid(_)) => {
            return Ok(QuadformResult {
                value: offset,
                lower: T::zero(),
                upper: T::zero(),
                estimate: T::zero(),
                iterations: 0,
                poly_iters: 0,
                rat_iters: 0,
                converged: true,
                switched_at: None,
                degenerate: false,
                trace: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };
    let grid = BoundGrid::new(f, opts.interval, opts.grid_points);
    let mut driver = Driver::new();
    let mut trace = Vec::new();
    let mut prev: Option<T> = None;
    loop {
        let p = clamp_ritz(engine.projected()?, opts.interval.b)?;
        let value = quad_value(f, &p) + offset;
        let exhausted = engine.is_exhausted();
        let bounds = if exhausted {
            zero_bounds()
        } else {
            quadform_bounds(f, &p, &grid, opts.interval)
        };
        let mut stat = Driver::statistic(&bounds, opts.stop);
        if !stat.is_finite() {
            // bounds unavailable (function singular on the interval): use the change
            stat = prev.map_or(T::infinity(), |v| (value - v).abs());
        }
        prev = Some(value);
        if opts.record {
            trace.push(IterRecord {
                m: p.m,
                pole: driver.last_pole,
                lower: bounds.lower.as_f64(),
                upper: bounds.upper.as_f64(),
                estimate: bounds.estimate.as_f64(),
                value: value.as_f64(),
            });
        }
        match driver.advance(p.m, stat, exhausted, opts) {
            Next::Done(converged) => {
                return Ok(QuadformResult {
                    value,
                    lower: bounds.lower,
                    upper: bounds.upper,
                    estimate: bounds.estimate,
                    iterations: p.m,
                    poly_iters: driver.poly,
                    rat_iters: driver.rat,
                    converged,
                    switched_at: driver.switched_at,
                    degenerate: bounds.degenerate,
                    trace,
                })
            }
            Next::Pole(pole) => engine.extend(pole)?,
        }
    }
}

/// Approximates `f(A) b` by `||b|| V_m f(A_m) e_1`, stopping on the error bounds of
/// the vector 2-norm error.
pub fn funvec<T, O, F>(op: &O, b: &[T], f: &F, opts: &FunvecOptions<T>) -> Result<FunvecResult<T>>
where
    T: Scalar,
    O: KrylovOperator<T> + ?Sized,
    F: MatrixFunction<T> + ?Sized,
{
    let n = op.dim();
    let sum: T = b.iter().copied().sum();
    let offset = if opts.desingularize {
        f.value(T::zero()) * sum / T::from_usize_lossy(n)
    } else {
        T::zero()
    };
    let mut engine = match RationalArnoldi::new(op, b, opts.mode, opts.desingularize, opts.max_iters + 1) {
        Ok(e) => e,
        Err(Error::Invalid(_)) => {
            return Ok(FunvecResult {
                vector: vec![offset; n],
                lower: T::zero(),
                upper: T::zero(),
                estimate: T::zero(),
                iterations: 0,
                poly_iters: 0,
                rat_iters: 0,
                converged: true,
                trace: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };
    let grid = BoundGrid::new(f, opts.interval, opts.grid_points);
    let mut driver = Driver::new();
    let mut trace = Vec::new();
    let mut prev: Option<Vec<T>> = None;
    loop {
        let p = clamp_ritz(engine.projected()?, opts.interval.b)?;
        let coeffs: Vec<T> = (0..p.m)
            .map(|i| {
                p.b_norm
                    * (0..p.m)
                        .map(|j| p.vectors[(i, j)] * f.value(p.theta[j]) * p.beta[j])
                        .sum::<T>()
            })
            .collect();
        let mut vector = engine.combine(&coeffs);
        vector.iter_mut().for_each(|v| *v += offset);
        let exhausted = engine.is_exhausted();
        let bounds = if exhausted {
            zero_bounds()
        } else {
            funvec_bounds(f, &p, &grid, opts.interval)
        };
        let mut stat = Driver::statistic(&bounds, opts.stop);
        if !stat.is_finite() {
            stat = prev.as_ref().map_or(T::infinity(), |v| {
                v.iter().zip(&vector).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>().sqrt()
            });
        }
        if opts.record {
            trace.push(IterRecord {
                m: p.m,
                pole: driver.last_pole,
                lower: bounds.lower.as_f64(),
                upper: bounds.upper.as_f64(),
                estimate: bounds.estimate.as_f64(),
                value: crate::scalar::dot(&vector, &vector).sqrt().as_f64(),
            });
        }
        match driver.advance(p.m, stat, exhausted, opts) {
            Next::Done(converged) => {
                return Ok(FunvecResult {
                    vector,
                    lower: bounds.lower,
                    upper: bounds.upper,
                    estimate: bounds.estimate,
                    iterations: p.m,
                    poly_iters: driver.poly,
                    rat_iters: driver.rat,
                    converged,
                    trace,
                })
            }
            Next::Pole(pole) => {
                prev = Some(vector);
                engine.extend(pole)?
            }
        }
    }
}
