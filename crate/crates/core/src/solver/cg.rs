use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, Scalar};
use crate::sparse::SparseSymMatrix;

/// Jacobi preconditioned conjugate gradients for `(s I + A) x = b`, stopping at
/// relative residual `tol`. Returns the iteration count.
pub fn pcg_shifted<T: Scalar>(
    a: &SparseSymMatrix<T>,
    shift: T,
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<usize> {
    let n = a.n();
    let inv_diag: Vec<T> = a.diagonal().iter().map(|&d| (d + shift).recip()).collect();
    x.iter_mut().for_each(|v| *v = T::zero());
    let bnorm = dot(b, b).sqrt();
    if bnorm == T::zero() {
        return Ok(0);
    }
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut q = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    let mut res = T::one();
    for it in 1..=max_iter {
        a.matvec(&p, &mut q);
        axpy(shift, &p, &mut q);
        let alpha = rz / dot(&p, &q);
        axpy(alpha, &p, x);
        axpy(-alpha, &q, &mut r);
        res = dot(&r, &r).sqrt() / bnorm;
        if res <= tol {
            return Ok(it);
        }
        for ((zi, &ri), &di) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * di;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, &zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::CgNoConvergence {
        residual: res.as_f64(),
        iterations: max_iter,
    })
}
