use crate::dense::{sym_eigenvalues, DenseMatrix};
use crate::error::{Error, Result};
use crate::krylov::Interval;
use crate::rng::gaussian_vector;
use crate::scalar::{axpy, dot, Scalar};
use crate::sparse::SparseSymMatrix;

/// Interval enclosing the (relevant part of the) spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralInterval<T> {
    pub a: T,
    pub b: T,
    /// extreme Ritz values before widening
    pub ritz_min: T,
    pub ritz_max: T,
    /// safety factors were applied to the Ritz values
    pub widened: bool,
}

impl<T: Scalar> SpectralInterval<T> {
    /// Known exact interval.
    pub fn exact(a: T, b: T) -> Self {
        Self {
            a,
            b,
            ritz_min: a,
            ritz_max: b,
            widened: false,
        }
    }

    pub fn interval(&self) -> Interval<T> {
        Interval { a: self.a, b: self.b }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalOptions {
    pub iters: usize,
    /// `a = lower_factor * min Ritz value`
    pub lower_factor: f64,
    /// `b = upper_factor * max Ritz value`
    pub upper_factor: f64,
    pub seed: u64,
}

impl Default for IntervalOptions {
    fn default() -> Self {
        Self {
            iters: 200,
            lower_factor: 0.5,
            upper_factor: 1.1,
            seed: 0,
        }
    }
}

const LANCZOS_STREAM: u64 = 0x1a9c;

/// Estimates `[lambda_min, lambda_max]` by Lanczos with full reorthogonalization.
/// With `desingularize` the iteration runs orthogonal to the constant vector, so
/// `a` estimates the smallest nonzero eigenvalue of a Laplacian-like matrix.
pub fn spectral_interval<T: Scalar>(
    m: &SparseSymMatrix<T>,
    desingularize: bool,
    opts: &IntervalOptions,
) -> Result<SpectralInterval<T>> {
    if opts.iters < 2 {
        return Err(Error::Invalid("Lanczos needs at least 2 iterations".into()));
    }
    let n = m.n();
    let dim = n - usize::from(desingularize && n > 0);
    if dim == 0 {
        return Ok(SpectralInterval::exact(T::zero(), T::zero()));
    }
    let steps = opts.iters.min(dim);
    let mut v: Vec<T> = gaussian_vector(n, opts.seed, LANCZOS_STREAM);
    if desingularize {
        remove_mean(&mut v);
    }
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis = vec![v];
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<T> = Vec::with_capacity(steps);
    let scale = m.norm_inf();
    let mut w = vec![T::zero(); n];
    for j in 0..steps {
        m.matvec(&basis[j], &mut w);
        if desingularize {
            remove_mean(&mut w);
        }
        alpha.push(dot(&basis[j], &w));
        for _ in 0..2 {
            // the constant vector has the extreme eigenvalue 0, so rounding
            // components along it would be amplified
            if desingularize {
                remove_mean(&mut w);
            }
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        let b = dot(&w, &w).sqrt();
        if j + 1 == steps || !(b > T::lit(1e-12) * scale) {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|&x| x / b).collect());
    }
    let k = alpha.len();
    let mut t = DenseMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let ritz = sym_eigenvalues(&t)?;
    let (lo, hi) = (ritz[0], ritz[k - 1]);
    Ok(SpectralInterval {
        a: (T::lit(opts.lower_factor) * lo).max(T::zero()),
        b: T::lit(opts.upper_factor) * hi,
        ritz_min: lo,
        ritz_max: hi,
        widened: true,
    })
}

pub(crate) fn remove_mean<T: Scalar>(v: &mut [T]) {
    let mean = v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len());
    v.iter_mut().for_each(|x| *x -= mean);
}
