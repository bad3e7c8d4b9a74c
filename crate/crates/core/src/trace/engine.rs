use std::sync::Arc;

use crate::error::{Error, Result};
use crate::krylov::{
    adaptive_quadform, funvec, BoundMode, EdsPoles, FunvecResult, NegEntropy, PoleSchedule, QuadformOptions,
    QuadformResult, StopRule,
};
use crate::scalar::Scalar;
use crate::solver::{ShiftedSolver, SolverConfig, SolverStats};
use crate::sparse::DensityMatrix;

use super::interval::SpectralInterval;

/// Settings shared by every Krylov evaluation of one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovSettings {
    pub stop: StopRule,
    pub mode: BoundMode,
    pub max_iters: usize,
    pub grid_points: usize,
    pub switch_window: usize,
    pub switch_factor: f64,
}

impl Default for KrylovSettings {
    fn default() -> Self {
        Self {
            stop: StopRule::Bound,
            mode: BoundMode::PoleSwap,
            max_iters: 150,
            grid_points: 2000,
            switch_window: 3,
            switch_factor: 0.75,
        }
    }
}

/// Evaluates `b^T f(rho) b` and `f(rho) b` for `f(x) = -x log x`.
///
/// Laplacian density matrices are handled by implicit desingularization; finite
/// poles come from the EDS sequence of the spectral interval when its lower end
/// is positive, otherwise only polynomial steps are taken.
pub struct EntropyOperator<T> {
    solver: Arc<ShiftedSolver<T>>,
    interval: SpectralInterval<T>,
    eds: Option<Arc<EdsPoles<T>>>,
    desingularize: bool,
    settings: KrylovSettings,
}

impl<T: Scalar> EntropyOperator<T> {
    pub fn new(
        rho: &DensityMatrix<T>,
        interval: SpectralInterval<T>,
        settings: KrylovSettings,
        solver: SolverConfig,
    ) -> Self {
        let eds = if interval.a > T::zero() && interval.b > interval.a {
            EdsPoles::new(interval.a, interval.b).ok().map(Arc::new)
        } else {
            None
        };
        Self {
            solver: Arc::new(ShiftedSolver::new(Arc::new(rho.matrix().clone()), solver)),
            interval,
            eds,
            desingularize: rho.annihilates_ones(),
            settings,
        }
    }

    pub fn n(&self) -> usize {
        self.solver.matrix().n()
    }

    pub fn interval(&self) -> &SpectralInterval<T> {
        &self.interval
    }

    pub fn desingularized(&self) -> bool {
        self.desingularize
    }

    pub fn solver_stats(&self) -> SolverStats {
        self.solver.stats()
    }

    fn options(&self, tol: T) -> QuadformOptions<T> {
        let s = &self.settings;
        let mut opts = QuadformOptions::new(tol, self.interval.interval());
        opts.stop = s.stop;
        opts.mode = s.mode;
        opts.max_iters = s.max_iters;
        opts.grid_points = s.grid_points;
        opts.switch_window = s.switch_window;
        opts.switch_factor = T::lit(s.switch_factor);
        opts.desingularize = self.desingularize;
        opts.schedule = match &self.eds {
            Some(eds) => PoleSchedule::Adaptive(Arc::clone(eds)),
            None => PoleSchedule::Polynomial,
        };
        opts
    }

    /// `b^T f(rho) b` to absolute accuracy `tol`; non-convergence is an error.
    pub fn quadform(&self, b: &[T], tol: T) -> Result<QuadformResult<T>> {
        let opts = self.options(tol);
        let res = adaptive_quadform(self.solver.as_ref(), b, &NegEntropy, &opts)?;
        if !res.converged {
            return Err(no_convergence(res.iterations, res.upper.max(res.estimate), tol));
        }
        Ok(res)
    }

    /// `f(rho) b` with 2-norm error at most `tol`.
    pub fn funvec(&self, b: &[T], tol: T) -> Result<FunvecResult<T>> {
        let opts = self.options(tol);
        let res = funvec(self.solver.as_ref(), b, &NegEntropy, &opts)?;
        if !res.converged {
            return Err(no_convergence(res.iterations, res.upper.max(res.estimate), tol));
        }
        Ok(res)
    }
}

fn no_convergence<T: Scalar>(iterations: usize, statistic: T, tol: T) -> Error {
    Error::KrylovNoConvergence {
        iterations,
        statistic: statistic.as_f64(),
        tolerance: tol.as_f64(),
    }
}
