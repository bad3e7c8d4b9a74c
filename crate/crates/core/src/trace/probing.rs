use rayon::prelude::*;

use crate::coloring::Coloring;
use crate::dense::{sym_eig, DenseMatrix};
use crate::error::Result;
use crate::scalar::Scalar;

use super::engine::EntropyOperator;

/// Quadratic form of one color class.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassResult<T> {
    pub size: usize,
    pub value: T,
    /// tolerance requested for this class
    pub tol: T,
    /// final error statistic
    pub upper: T,
    pub iterations: usize,
    pub poly_iters: usize,
    pub rat_iters: usize,
}

/// `traceP(f(rho)) = sum_l v_l^T f(rho) v_l` over the probing vectors of a coloring.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbingTrace<T> {
    pub value: T,
    pub colors: usize,
    pub classes: Vec<ClassResult<T>>,
    /// sum of the per-class error statistics
    pub krylov_error: T,
    pub poly_iters: usize,
    pub rat_iters: usize,
}

/// Indicator vector of a color class.
pub fn probing_vector<T: Scalar>(class: &[usize], n: usize) -> Vec<T> {
    let mut v = vec![T::zero(); n];
    for &i in class {
        v[i] = T::one();
    }
    v
}

/// Probing estimate with total Krylov tolerance `krylov_tol`, shared among the
/// classes in proportion to their sizes. Classes are evaluated in parallel and
/// summed in class order.
pub fn probing_trace<T: Scalar>(op: &EntropyOperator<T>, coloring: &Coloring, krylov_tol: T) -> Result<ProbingTrace<T>> {
    let n = op.n();
    let classes = coloring.classes();
    let nf = T::from_usize_lossy(n);
    let results = classes
        .par_iter()
        .map(|class| {
            let tol = krylov_tol * T::from_usize_lossy(class.len()) / nf;
            let b = probing_vector::<T>(class, n);
            let r = op.quadform(&b, tol)?;
            Ok(ClassResult {
                size: class.len(),
                value: r.value,
                tol,
                upper: if r.upper.is_finite() { r.upper } else { r.estimate },
                iterations: r.iterations,
                poly_iters: r.poly_iters,
                rat_iters: r.rat_iters,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbingTrace {
        value: results.iter().map(|r| r.value).sum(),
        colors: coloring.num_colors(),
        krylov_error: results.iter().map(|r| r.upper).sum(),
        poly_iters: results.iter().map(|r| r.poly_iters).sum(),
        rat_iters: results.iter().map(|r| r.rat_iters).sum(),
        classes: results,
    })
}

/// `f(A)` for a dense symmetric matrix.
pub fn dense_matrix_function<T: Scalar>(a: &DenseMatrix<T>, f: impl Fn(T) -> T) -> Result<DenseMatrix<T>> {
    let eig = sym_eig(a)?;
    let n = a.rows();
    let fv: Vec<T> = eig.values.iter().map(|&x| f(x)).collect();
    let v = &eig.vectors;
    let mut out = DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * fv[k] * v[(j, k)]).sum());
    out.symmetrize();
    Ok(out)
}

/// Probing error `tr(F) - traceP(F) = -sum_l sum_{i != j in V_l} F_ij` evaluated
/// from the entries of `F = f(A)`.
pub fn probing_error_identity<T: Scalar>(fa: &DenseMatrix<T>, coloring: &Coloring) -> T {
    let mut err = T::zero();
    for class in coloring.classes() {
        for &i in &class {
            for &j in &class {
                if i != j {
                    err -= fa[(i, j)];
                }
            }
        }
    }
    err
}

/// One candidate of the error model `C q^d / d^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFit<T> {
    pub k: u32,
    pub c: T,
    pub q: T,
    /// `C > 0` and `0 < q < 1`
    pub valid: bool,
    /// smallest `d` whose model error is at most the tolerance
    pub d_star: Option<usize>,
}

impl<T: Scalar> ModelFit<T> {
    pub fn model(&self, d: usize) -> T {
        self.c * self.q.powi(d as i32) / T::from_usize_lossy(d).powi(self.k as i32)
    }
}

/// Heuristic choice of the coloring distance from `traceP_1..3`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicFit<T> {
    pub traces: [T; 3],
    /// `|traceP_{d+1} - traceP_d|`, `d = 1, 2`
    pub deltas: [T; 2],
    pub fits: Vec<ModelFit<T>>,
    /// largest `d_star` over the valid fits, at least 2; `None` when no fit is valid
    pub d_star: Option<usize>,
}

/// Fits `delta_d = C q^d / d^k` for `k = 2, 3` through the two differences:
/// `q = 2^k delta_2 / delta_1`, `C = delta_1 / q`.
pub fn fit_heuristic<T: Scalar>(traces: [T; 3], eps_hat: T, d_max: usize) -> HeuristicFit<T> {
    let deltas = [(traces[1] - traces[0]).abs(), (traces[2] - traces[1]).abs()];
    let fits: Vec<ModelFit<T>> = [2u32, 3]
        .iter()
        .map(|&k| {
            let q = deltas[1] / deltas[0] * T::lit(2f64.powi(k as i32));
            let c = deltas[0] / q;
            let valid = q > T::zero() && q < T::one() && c > T::zero() && c.is_finite();
            let mut fit = ModelFit {
                k,
                c,
                q,
                valid,
                d_star: None,
            };
            if valid {
                fit.d_star = (1..=d_max).find(|&d| fit.model(d) <= eps_hat);
            }
            fit
        })
        .collect();
    let valid: Vec<&ModelFit<T>> = fits.iter().filter(|f| f.valid).collect();
    let d_star = if valid.is_empty() || valid.iter().any(|f| f.d_star.is_none()) {
        None
    } else {
        valid.iter().filter_map(|f| f.d_star).max().map(|d| d.max(2))
    };
    HeuristicFit {
        traces,
        deltas,
        fits,
        d_star,
    }
}
