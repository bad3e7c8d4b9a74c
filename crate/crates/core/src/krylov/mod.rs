//! Rational Krylov approximation of `b^T f(A) b` and `f(A) b` with computable
//! error bounds.
//!
//! The engine ([`RationalArnoldi`]) maintains a decomposition
//! `A V_{m+1} K_m = V_{m+1} H_m` whose last pole is infinite, either by swapping
//! each new finite pole forward ([`BoundMode::PoleSwap`]) or by keeping an
//! auxiliary basis vector ([`BoundMode::Auxiliary`]). The projected matrix
//! `A_m = H_m K_m^{-1}` then yields the approximation together with lower and upper
//! bounds on its error ([`posterior`]).

mod arnoldi;
pub mod eds;
pub mod posterior;
mod quadform;

pub use arnoldi::{swap_last_pole_to_infinity, BoundMode, Projected, RationalArnoldi};
pub use eds::EdsPoles;
pub use quadform::{
    adaptive_quadform, funvec, FunvecOptions, FunvecResult, IterRecord, PoleSchedule, QuadformOptions,
    QuadformResult, StopRule,
};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use crate::dense::{Cholesky, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solver::ShiftedSolver;

/// Scalar function with its first two derivatives.
pub trait MatrixFunction<T>: Sync {
    fn value(&self, x: T) -> T;
    fn deriv(&self, x: T) -> T;
    fn deriv2(&self, x: T) -> T;
}

/// `f(x) = -x log x`, `f(0) = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NegEntropy;

impl<T: Scalar> MatrixFunction<T> for NegEntropy {
    fn value(&self, x: T) -> T {
        crate::bounds::neg_xlogx(x)
    }
    fn deriv(&self, x: T) -> T {
        -x.ln() - T::one()
    }
    fn deriv2(&self, x: T) -> T {
        -x.recip()
    }
}

/// `f(x) = x log x`, `f(0) = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct XLogX;

impl<T: Scalar> MatrixFunction<T> for XLogX {
    fn value(&self, x: T) -> T {
        -crate::bounds::neg_xlogx(x)
    }
    fn deriv(&self, x: T) -> T {
        x.ln() + T::one()
    }
    fn deriv2(&self, x: T) -> T {
        x.recip()
    }
}

/// Function given by three closures (value, first and second derivative).
pub struct FnTriple<F, G, H>(pub F, pub G, pub H);

impl<T, F, G, H> MatrixFunction<T> for FnTriple<F, G, H>
where
    F: Fn(T) -> T + Sync,
    G: Fn(T) -> T + Sync,
    H: Fn(T) -> T + Sync,
{
    fn value(&self, x: T) -> T {
        (self.0)(x)
    }
    fn deriv(&self, x: T) -> T {
        (self.1)(x)
    }
    fn deriv2(&self, x: T) -> T {
        (self.2)(x)
    }
}

/// Pole of a rational Krylov space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Pole<T> {
    Infinite,
    Finite(T),
}

impl<T: Scalar> Pole<T> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Pole::Infinite)
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Pole::Infinite => f64::INFINITY,
            Pole::Finite(x) => x.as_f64(),
        }
    }
}

impl<T: Scalar> fmt::Display for Pole<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pole::Infinite => write!(f, "inf"),
            Pole::Finite(x) => write!(f, "{x}"),
        }
    }
}

/// Closed interval `[a, b]`, `0 <= a <= b`, enclosing a spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a >= T::zero() && b >= a && b.is_finite()) {
            return Err(Error::Invalid(format!("invalid spectral interval [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }
}

impl<T: Scalar> FromStr for Interval<T> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Invalid(format!("interval '{s}' must be 'a,b'")))?;
        let p = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("bad number '{x}'")))
        };
        Self::new(T::lit(p(a)?), T::lit(p(b)?))
    }
}

/// Symmetric positive semidefinite operator with shifted solves.
pub trait KrylovOperator<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[T], y: &mut [T]);
    /// `out = (s I + A)^{-1} rhs` for `s > 0`.
    fn solve_positive(&self, s: T, rhs: &[T], out: &mut [T]) -> Result<()>;
}

impl<T: Scalar> KrylovOperator<T> for ShiftedSolver<T> {
    fn dim(&self) -> usize {
        self.matrix().n()
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        self.matrix().matvec(x, y)
    }
    fn solve_positive(&self, s: T, rhs: &[T], out: &mut [T]) -> Result<()> {
        ShiftedSolver::solve_positive(self, s, rhs, out)
    }
}

/// Diagonal operator with exact shifted solves.
#[derive(Clone, Debug)]
pub struct DiagonalOperator<T> {
    pub diag: Vec<T>,
}

impl<T: Scalar> KrylovOperator<T> for DiagonalOperator<T> {
    fn dim(&self) -> usize {
        self.diag.len()
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        for ((yi, &xi), &di) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = di * xi;
        }
    }
    fn solve_positive(&self, s: T, rhs: &[T], out: &mut [T]) -> Result<()> {
        for ((o, &r), &di) in out.iter_mut().zip(rhs).zip(&self.diag) {
            *o = r / (s + di);
        }
        Ok(())
    }
}

/// Dense symmetric operator with cached Cholesky factors per shift.
pub struct DenseOperator<T> {
    a: DenseMatrix<T>,
    factors: Mutex<HashMap<u64, Arc<Cholesky<T>>>>,
}

impl<T: Scalar> DenseOperator<T> {
    pub fn new(a: DenseMatrix<T>) -> Self {
        Self {
            a,
            factors: Mutex::new(HashMap::new()),
        }
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.a
    }
}

impl<T: Scalar> KrylovOperator<T> for DenseOperator<T> {
    fn dim(&self) -> usize {
        self.a.rows()
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        y.copy_from_slice(&self.a.mul_vec(x));
    }
    fn solve_positive(&self, s: T, rhs: &[T], out: &mut [T]) -> Result<()> {
        let key = s.as_f64().to_bits();
        let factor = {
            let mut cache = self.factors.lock().expect("factor cache poisoned");
            match cache.get(&key) {
                Some(f) => Arc::clone(f),
                None => {
                    let mut shifted = self.a.clone();
                    for i in 0..shifted.rows() {
                        shifted[(i, i)] += s;
                    }
                    let f = Arc::new(Cholesky::new(&shifted)?);
                    cache.insert(key, Arc::clone(&f));
                    f
                }
            }
        };
        out.copy_from_slice(rhs);
        factor.solve(out);
        Ok(())
    }
}
