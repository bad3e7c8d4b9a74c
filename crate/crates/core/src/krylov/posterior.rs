//! A posteriori error bounds from the projected problem.
//!
//! With Ritz values `theta_j`, `alpha`/`beta` weights from [`Projected`] and
//! `gamma_j = sum_{l != j} alpha_l beta_l / (theta_j - theta_l)`, the error of the
//! quadratic form `b^T f(A) b - ||b||^2 e_1^T f(A_m) e_1` equals `||b||^2` times a
//! convex combination of values of
//!
//! `g(z) = sum_j alpha_j^2 beta_j^2 f[theta_j, theta_j, z] + 2 alpha_j beta_j gamma_j f[theta_j, z]`
//!
//! at the eigenvalues of `A`, so it lies between `||b||^2 min |g|` and `||b||^2 max |g|`
//! over any interval enclosing the spectrum (the lower bound only when `g` keeps
//! one sign). Likewise the vector error `f(A) b - ||b|| V_m f(A_m) e_1` has norm between
//! `||b|| min |h|` and `||b|| max |h|` with `h(z) = sum_j alpha_j beta_j f[theta_j, z]`.

use crate::scalar::Scalar;

use super::{Interval, MatrixFunction, Projected};

/// Gauss-Legendre rule with 8 nodes on `[-1, 1]`.
const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Relative distance below which divided differences are evaluated by quadrature.
const NEAR: f64 = 0.05;

/// Sample points of the interval and the function values there.
#[derive(Clone, Debug)]
pub struct BoundGrid<T> {
    points: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> BoundGrid<T> {
    /// `count` logarithmically spaced points covering `[a, b]` (endpoints included;
    /// for `a = 0` the point 0 is added and the log grid starts at `1e-12 b`).
    pub fn new<F: MatrixFunction<T> + ?Sized>(f: &F, interval: Interval<T>, count: usize) -> Self {
        let Interval { a, b } = interval;
        let count = count.max(2);
        let mut points = Vec::with_capacity(count + 1);
        let lo = if a > T::zero() {
            a
        } else {
            points.push(T::zero());
            b * T::lit(1e-12)
        };
        if b > lo {
            let (la, lb) = (lo.ln(), b.ln());
            let steps = T::from_usize_lossy(count - 1);
            for i in 0..count {
                let t = T::from_usize_lossy(i) / steps;
                points.push((la + (lb - la) * t).exp());
            }
            points[if a > T::zero() { 0 } else { 1 }] = lo;
            *points.last_mut().expect("nonempty") = b;
        } else {
            points.push(b);
        }
        let values = points.iter().map(|&z| f.value(z)).collect();
        Self { points, values }
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }
}

/// Lower bound, upper bound and geometric-mean estimate of an error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBounds<T> {
    pub lower: T,
    pub upper: T,
    pub estimate: T,
    /// some Ritz values coincided to working precision and their coupling terms were skipped
    pub degenerate: bool,
}

struct Terms<T> {
    theta: Vec<T>,
    ab: Vec<T>,
    gamma: Vec<T>,
    f_theta: Vec<T>,
    df_theta: Vec<T>,
    degenerate: bool,
}

fn terms<T: Scalar, F: MatrixFunction<T> + ?Sized>(f: &F, p: &Projected<T>) -> Terms<T> {
    let m = p.m;
    let ab: Vec<T> = (0..m).map(|j| p.alpha[j] * p.beta[j]).collect();
    let scale = p.theta.iter().fold(T::zero(), |s, t| s.max(t.abs()));
    let tiny = T::lit(1e-14) * scale;
    let mut degenerate = false;
    let gamma = (0..m)
        .map(|j| {
            let mut g = T::zero();
            for l in 0..m {
                if l == j {
                    continue;
                }
                let gap = p.theta[j] - p.theta[l];
                if gap.abs() <= tiny {
                    degenerate = true;
                } else {
                    g += ab[l] / gap;
                }
            }
            g
        })
        .collect();
    Terms {
        theta: p.theta.clone(),
        f_theta: p.theta.iter().map(|&t| f.value(t)).collect(),
        df_theta: p.theta.iter().map(|&t| f.deriv(t)).collect(),
        ab,
        gamma,
        degenerate,
    }
}

/// First and second divided differences `(f[t, z], f[t, t, z])`.
#[inline]
fn divided<T: Scalar, F: MatrixFunction<T> + ?Sized>(f: &F, t: T, ft: T, dft: T, z: T, fz: T) -> (T, T) {
    let d = z - t;
    if t > T::zero() && d.abs() <= T::lit(NEAR) * t {
        // f[t,z] = int_0^1 f'(t + s d) ds, f[t,t,z] = int_0^1 (1-s) f''(t + s d) ds
        let half = T::lit(0.5);
        let mut d1 = T::zero();
        let mut d2 = T::zero();
        for (&x, &w) in GL_X.iter().zip(&GL_W) {
            for sgn in [-1.0, 1.0] {
                let s = half * (T::one() + T::lit(sgn * x));
                let y = t + s * d;
                let w = half * T::lit(w);
                d1 += w * f.deriv(y);
                d2 += w * (T::one() - s) * f.deriv2(y);
            }
        }
        (d1, d2)
    } else {
        let d1 = (fz - ft) / d;
        (d1, (d1 - dft) / d)
    }
}

fn eval_g<T: Scalar, F: MatrixFunction<T> + ?Sized>(f: &F, tm: &Terms<T>, z: T, fz: T) -> T {
    let two = T::lit(2.0);
    let mut g = T::zero();
    for j in 0..tm.theta.len() {
        let (d1, d2) = divided(f, tm.theta[j], tm.f_theta[j], tm.df_theta[j], z, fz);
        g += tm.ab[j] * (tm.ab[j] * d2 + two * tm.gamma[j] * d1);
    }
    g
}

fn eval_h<T: Scalar, F: MatrixFunction<T> + ?Sized>(f: &F, tm: &Terms<T>, z: T, fz: T) -> T {
    let mut h = T::zero();
    for j in 0..tm.theta.len() {
        let d = z - tm.theta[j];
        let d1 = if d == T::zero() {
            tm.df_theta[j]
        } else {
            divided(f, tm.theta[j], tm.f_theta[j], tm.df_theta[j], z, fz).0
        };
        h += tm.ab[j] * d1;
    }
    h
}

/// `g(z)` at a single point.
pub fn quadform_error_function<T: Scalar, F: MatrixFunction<T> + ?Sized>(f: &F, p: &Projected<T>, z: T) -> T {
    let tm = terms(f, p);
    eval_g(f, &tm, z, f.value(z))
}

fn extremes<T: Scalar>(
    grid: &BoundGrid<T>,
    interval: Interval<T>,
    theta: &[T],
    f_theta: &[T],
    mut eval: impl FnMut(T, T) -> T,
) -> (T, T) {
    let mut lo = T::infinity();
    let mut hi = T::zero();
    let mut visit = |v: T| {
        let v = v.abs();
        if v.is_nan() {
            hi = T::infinity();
        }
        lo = lo.min(v);
        hi = hi.max(v);
    };
    for (&z, &fz) in grid.points.iter().zip(&grid.values) {
        visit(eval(z, fz));
    }
    for (&t, &ft) in theta.iter().zip(f_theta) {
        if t >= interval.a && t <= interval.b {
            visit(eval(t, ft));
        }
    }
    (lo, hi)
}

/// Bounds on `|b^T f(A) b - psi_m|` for a spectrum inside `interval`.
pub fn quadform_bounds<T: Scalar, F: MatrixFunction<T> + ?Sized>(
    f: &F,
    p: &Projected<T>,
    grid: &BoundGrid<T>,
    interval: Interval<T>,
) -> ErrorBounds<T> {
    let tm = terms(f, p);
    let (lo, hi) = extremes(grid, interval, &tm.theta, &tm.f_theta, |z, fz| eval_g(f, &tm, z, fz));
    let nb2 = p.b_norm * p.b_norm;
    finish(nb2 * lo, nb2 * hi, tm.degenerate)
}

/// Bounds on `||f(A) b - ||b|| V_m f(A_m) e_1||` for a spectrum inside `interval`.
pub fn funvec_bounds<T: Scalar, F: MatrixFunction<T> + ?Sized>(
    f: &F,
    p: &Projected<T>,
    grid: &BoundGrid<T>,
    interval: Interval<T>,
) -> ErrorBounds<T> {
    let tm = terms(f, p);
    let (lo, hi) = extremes(grid, interval, &tm.theta, &tm.f_theta, |z, fz| eval_h(f, &tm, z, fz));
    finish(p.b_norm * lo, p.b_norm * hi, tm.degenerate)
}

fn finish<T: Scalar>(lower: T, upper: T, degenerate: bool) -> ErrorBounds<T> {
    ErrorBounds {
        lower,
        upper,
        estimate: (lower * upper).sqrt(),
        degenerate,
    }
}
