//! Solves with shifted matrices `(xi I - A)`, `xi < 0`, for symmetric positive
//! semidefinite `A`.
//!
//! The direct backend orders `A` once by minimum degree, analyses the factor
//! pattern once, and caches one numeric Cholesky factor of `|xi| I + A` per
//! distinct pole. The iterative backend runs Jacobi preconditioned CG. The
//! automatic choice falls back to CG when the predicted fill-in ratio
//! `nnz(L) / nnz(A)` exceeds the configured limit.

mod cg;
mod cholesky;
mod mindeg;

pub use cg::pcg_shifted;
pub use cholesky::{SparseCholesky, Symbolic};
pub use mindeg::{minimum_degree_order, OrderingBudget};

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseSymMatrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    Direct,
    Cg,
    #[default]
    Auto,
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "cg" => Ok(Self::Cg),
            "auto" => Ok(Self::Auto),
            _ => Err(Error::Invalid(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub backend: Backend,
    /// relative residual target of CG
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// largest `nnz(L)/nnz(A)` accepted by the automatic backend choice
    pub fill_limit: f64,
    /// largest factorization work (multiply-adds) accepted by the automatic choice;
    /// also caps the work of the ordering step
    pub flop_limit: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Auto,
            cg_tol: 1e-10,
            cg_max_iter: 20_000,
            fill_limit: 50.0,
            flop_limit: 2e8,
        }
    }
}

enum Analysis {
    Direct { symbolic: Symbolic, fill: f64 },
    Cg { fill: Option<f64> },
}

/// Counters reported after a run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverStats {
    /// `"direct"`, `"cg"`, or `"none"` when no solve happened
    pub backend: &'static str,
    pub factorizations: usize,
    pub solves: usize,
    pub cg_iterations: usize,
    /// `nnz(L)/nnz(A)` when a symbolic analysis was performed and finished
    pub fill_in: Option<f64>,
}

pub struct ShiftedSolver<T> {
    matrix: Arc<SparseSymMatrix<T>>,
    config: SolverConfig,
    analysis: OnceLock<Analysis>,
    cache: Mutex<HashMap<u64, Arc<SparseCholesky<T>>>>,
    factorizations: AtomicUsize,
    solves: AtomicUsize,
    cg_iterations: AtomicUsize,
}

impl<T: Scalar> ShiftedSolver<T> {
    pub fn new(matrix: Arc<SparseSymMatrix<T>>, config: SolverConfig) -> Self {
        Self {
            matrix,
            config,
            analysis: OnceLock::new(),
            cache: Mutex::new(HashMap::new()),
            factorizations: AtomicUsize::new(0),
            solves: AtomicUsize::new(0),
            cg_iterations: AtomicUsize::new(0),
        }
    }

    pub fn matrix(&self) -> &SparseSymMatrix<T> {
        &self.matrix
    }

    fn analysis(&self) -> &Analysis {
        self.analysis.get_or_init(|| {
            if self.config.backend == Backend::Cg {
                return Analysis::Cg { fill: None };
            }
            let a = &*self.matrix;
            let nnz = a.nnz().max(1) as f64;
            let budget = match self.config.backend {
                Backend::Auto => OrderingBudget {
                    fill: Some((self.config.fill_limit * nnz) as usize),
                    work: Some(self.config.flop_limit as usize),
                },
                _ => OrderingBudget::default(),
            };
            match minimum_degree_order(&a.graph(), budget) {
                None => Analysis::Cg { fill: None },
                Some((perm, _)) => {
                    let symbolic = Symbolic::new(a, perm);
                    let fill = symbolic.factor_nnz() as f64 / nnz;
                    let costly = fill > self.config.fill_limit || symbolic.factor_flops() > self.config.flop_limit;
                    if self.config.backend == Backend::Auto && costly {
                        Analysis::Cg { fill: Some(fill) }
                    } else {
                        Analysis::Direct { symbolic, fill }
                    }
                }
            }
        })
    }

    /// `out = (xi I - A)^{-1} rhs` for a finite pole `xi < 0`.
    pub fn solve_shifted(&self, xi: T, rhs: &[T], out: &mut [T]) -> Result<()> {
        if !(xi < T::zero()) || !xi.is_finite() {
            return Err(Error::InvalidPole(xi.as_f64()));
        }
        self.solve_positive(-xi, rhs, out)?;
        out.iter_mut().for_each(|v| *v = -*v);
        Ok(())
    }

    /// `out = (s I + A)^{-1} rhs` for `s > 0`.
    pub fn solve_positive(&self, s: T, rhs: &[T], out: &mut [T]) -> Result<()> {
        let n = self.matrix.n();
        if rhs.len() != n || out.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: rhs.len().min(out.len()),
            });
        }
        self.solves.fetch_add(1, Ordering::Relaxed);
        match self.analysis() {
            Analysis::Direct { symbolic, .. } => {
                let factor = self.factor(s, symbolic)?;
                factor.solve(symbolic, rhs, out);
                Ok(())
            }
            Analysis::Cg { .. } => {
                let it = pcg_shifted(
                    &self.matrix,
                    s,
                    rhs,
                    out,
                    T::lit(self.config.cg_tol),
                    self.config.cg_max_iter,
                )?;
                self.cg_iterations.fetch_add(it, Ordering::Relaxed);
                Ok(())
            }
        }
    }

    fn factor(&self, s: T, symbolic: &Symbolic) -> Result<Arc<SparseCholesky<T>>> {
        let key = s.as_f64().to_bits();
        let mut cache = self.cache.lock().expect("factor cache poisoned");
        if let Some(f) = cache.get(&key) {
            return Ok(Arc::clone(f));
        }
        let f = Arc::new(SparseCholesky::factor(&self.matrix, s, symbolic)?);
        self.factorizations.fetch_add(1, Ordering::Relaxed);
        cache.insert(key, Arc::clone(&f));
        Ok(f)
    }

    pub fn stats(&self) -> SolverStats {
        let (backend, fill_in) = match self.analysis.get() {
            None => ("none", None),
            Some(Analysis::Direct { fill, .. }) => ("direct", Some(*fill)),
            Some(Analysis::Cg { fill }) => ("cg", *fill),
        };
        SolverStats {
            backend,
            factorizations: self.factorizations.load(Ordering::Relaxed),
            solves: self.solves.load(Ordering::Relaxed),
            cg_iterations: self.cg_iterations.load(Ordering::Relaxed),
            fill_in,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{barabasi_albert, grid2d, laplacian};

    fn check(solver: &ShiftedSolver<f64>, xi: f64) {
        let a = solver.matrix();
        let n = a.n();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        // y = (xi I - A) x
        let mut y = vec![0.0; n];
        a.matvec(&x, &mut y);
        y.iter_mut().zip(&x).for_each(|(yi, xi_)| *yi = xi * xi_ - *yi);
        let mut z = vec![0.0; n];
        solver.solve_shifted(xi, &y, &mut z).unwrap();
        let err = z.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "err {err}");
    }

    #[test]
    fn backends_agree_and_cache_factors() {
        let a = Arc::new(laplacian(&grid2d::<f64>(12)));
        let direct = ShiftedSolver::new(a.clone(), SolverConfig { backend: Backend::Direct, ..Default::default() });
        let cg = ShiftedSolver::new(a.clone(), SolverConfig { backend: Backend::Cg, ..Default::default() });
        for xi in [-0.5, -2.0, -0.5] {
            check(&direct, xi);
            check(&cg, xi);
        }
        let s = direct.stats();
        assert_eq!(s.backend, "direct");
        assert_eq!(s.factorizations, 2);
        assert_eq!(s.solves, 3);
        assert!(s.fill_in.unwrap() < 10.0);
        assert_eq!(cg.stats().backend, "cg");
        assert!(direct.solve_shifted(0.5, &vec![0.0; a.n()], &mut vec![0.0; a.n()]).is_err());
    }

    #[test]
    fn auto_respects_fill_limit() {
        let a = Arc::new(laplacian(&barabasi_albert::<f64>(400, 3, 1).unwrap()));
        let tight = ShiftedSolver::new(a.clone(), SolverConfig { fill_limit: 1.0, ..Default::default() });
        check(&tight, -0.1);
        assert_eq!(tight.stats().backend, "cg");
        let loose = ShiftedSolver::new(a.clone(), SolverConfig { fill_limit: 1e6, ..Default::default() });
        check(&loose, -0.1);
        assert_eq!(loose.stats().backend, "direct");
        let cheap = ShiftedSolver::new(a, SolverConfig { flop_limit: 1.0, fill_limit: 1e6, ..Default::default() });
        check(&cheap, -0.1);
        assert_eq!(cheap.stats().backend, "cg");
    }
}
