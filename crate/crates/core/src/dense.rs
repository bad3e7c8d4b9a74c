//! Small dense linear algebra: symmetric eigensolver, LU and Cholesky.
//!
//! The symmetric eigensolver reduces to tridiagonal form with Householder
//! reflections and then runs the implicit QL iteration. It serves both as the
//! exact reference for moderate `n` and as the projected-problem solver inside
//! the Krylov methods.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| crate::scalar::dot(self.row(i), x)).collect()
    }

    /// Replaces the matrix by `(A + A^T) / 2`.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        let half = T::lit(0.5);
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                let v = half * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn norm_frobenius(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Leading `r x c` block.
    pub fn block(&self, r: usize, c: usize) -> Self {
        Self::from_fn(r, c, |i, j| self[(i, j)])
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition `A = V diag(values) V^T`, values ascending,
/// eigenvectors stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    pub vectors: DenseMatrix<T>,
}

/// Eigenvalues and eigenvectors of a symmetric matrix (only the lower triangle is read).
pub fn sym_eig<T: Scalar>(a: &DenseMatrix<T>) -> Result<SymEigen<T>> {
    let n = square(a)?;
    let mut work = a.clone();
    let (mut d, mut e, reflectors) = tridiagonalize(&mut work);
    // zt[j] holds the j-th eigenvector of the tridiagonal matrix
    let mut zt = DenseMatrix::identity(n);
    tql(&mut d, &mut e, Some(&mut zt))?;
    let q = accumulate_q(n, &reflectors);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, &j) in order.iter().enumerate() {
        let z = zt.row(j);
        for i in 0..n {
            vectors[(i, col)] = crate::scalar::dot(q.row(i), z);
        }
    }
    Ok(SymEigen {
        values: order.iter().map(|&j| d[j]).collect(),
        vectors,
    })
}

/// Eigenvalues (ascending) of a symmetric matrix (only the lower triangle is read).
pub fn sym_eigenvalues<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    square(a)?;
    let mut work = a.clone();
    let (mut d, mut e, _) = tridiagonalize(&mut work);
    tql(&mut d, &mut e, None)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(d)
}

fn square<T: Scalar>(a: &DenseMatrix<T>) -> Result<usize> {
    if a.rows != a.cols {
        return Err(Error::Dimension {
            expected: a.rows,
            got: a.cols,
        });
    }
    Ok(a.rows)
}

struct Reflector<T> {
    /// first index the reflector acts on
    start: usize,
    beta: T,
    v: Vec<T>,
}

/// Householder reduction `Q^T A Q = T`; returns diagonal, super-diagonal (last entry 0)
/// and the reflectors defining `Q`. The full symmetric matrix is updated in place.
fn tridiagonalize<T: Scalar>(a: &mut DenseMatrix<T>) -> (Vec<T>, Vec<T>, Vec<Reflector<T>>) {
    let n = a.rows;
    // make the matrix exactly symmetric from its lower triangle
    for i in 0..n {
        for j in i + 1..n {
            a[(i, j)] = a[(j, i)];
        }
    }
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let mut reflectors = Vec::new();
    let mut p = vec![T::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let start = k + 1;
        let m = n - start;
        let mut v: Vec<T> = a.row(k)[start..].to_vec();
        let tail = v[1..].iter().map(|&x| x * x).sum::<T>();
        if tail == T::zero() {
            e[k] = v[0];
            d[k] = a[(k, k)];
            continue;
        }
        let norm = (v[0] * v[0] + tail).sqrt();
        let alpha = if v[0] > T::zero() { -norm } else { norm };
        v[0] -= alpha;
        let vv = v[0] * v[0] + tail;
        let beta = T::lit(2.0) / vv;
        e[k] = alpha;
        d[k] = a[(k, k)];
        // p = beta * B v on the trailing block
        let p = &mut p[..m];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &a.row(start + i)[start..];
            *pi = beta * crate::scalar::dot(row, &v);
        }
        let kappa = T::lit(0.5) * beta * crate::scalar::dot(p, &v);
        for (pi, &vi) in p.iter_mut().zip(&v) {
            *pi -= kappa * vi;
        }
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a.row_mut(start + i)[start..];
            for ((x, &vj), &wj) in row.iter_mut().zip(&v).zip(p.iter()) {
                *x -= vi * wj + wi * vj;
            }
        }
        reflectors.push(Reflector { start, beta, v });
    }
    if n > 0 {
        d[n - 1] = a[(n - 1, n - 1)];
    }
    (d, e, reflectors)
}

fn accumulate_q<T: Scalar>(n: usize, reflectors: &[Reflector<T>]) -> DenseMatrix<T> {
    let mut q = DenseMatrix::identity(n);
    let mut r = vec![T::zero(); n];
    for refl in reflectors.iter().rev() {
        let s = refl.start;
        let r = &mut r[s..];
        r.iter_mut().for_each(|x| *x = T::zero());
        for (i, &vi) in refl.v.iter().enumerate() {
            crate::scalar::axpy(vi, &q.row(s + i)[s..], r);
        }
        for (i, &vi) in refl.v.iter().enumerate() {
            crate::scalar::axpy(-refl.beta * vi, r, &mut q.row_mut(s + i)[s..]);
        }
    }
    q
}

/// Implicit QL iteration on the symmetric tridiagonal matrix with diagonal `d`
/// and super-diagonal `e` (`e[n-1]` ignored). If `zt` is given, its rows are
/// rotated alongside so that row `j` ends as the eigenvector for `d[j]`.
fn tql<T: Scalar>(d: &mut [T], e: &mut [T], mut zt: Option<&mut DenseMatrix<T>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::EigNoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let (mut c, mut c2, mut c3) = (T::one(), T::one(), T::one());
                let el1 = e[l + 1];
                let (mut s, mut s2) = (T::zero(), T::zero());
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        let cols = z.cols;
                        let (lo, hi) = z.data.split_at_mut((i + 1) * cols);
                        let zi = &mut lo[i * cols..];
                        let zi1 = &mut hi[..cols];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hv = *b;
                            *b = s * *a + c * hv;
                            *a = c * *a - s * hv;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: DenseMatrix<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        let n = square(a)?;
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, maxv) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if maxv == T::zero() {
                return Err(Error::Invalid("singular matrix in LU".into()));
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                piv.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor != T::zero() {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= factor * u;
                    }
                }
            }
        }
        Ok(Self { lu, piv })
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [T]) {
        let n = self.piv.len();
        let mut x: Vec<T> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let t = x[j];
                x[i] -= l * t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                let t = x[j];
                x[i] -= u * t;
            }
            x[i] /= self.lu[(i, i)];
        }
        b.copy_from_slice(&x);
    }

    /// Solves `A^T x = b` in place.
    pub fn solve_transpose(&self, b: &mut [T]) {
        let n = self.piv.len();
        let mut y = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                let u = self.lu[(j, i)];
                let t = y[j];
                y[i] -= u * t;
            }
            y[i] /= self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let l = self.lu[(j, i)];
                let t = y[j];
                y[i] -= l * t;
            }
        }
        for (i, &p) in self.piv.iter().enumerate() {
            b[p] = y[i];
        }
    }

    /// Reciprocal condition estimate in the 1-norm based on the explicit inverse
    /// (only intended for the small projected matrices).
    pub fn rcond(&self, a: &DenseMatrix<T>) -> T {
        let n = self.piv.len();
        let norm1 = |m: &dyn Fn(usize, usize) -> T| {
            (0..n)
                .map(|j| (0..n).map(|i| m(i, j).abs()).sum::<T>())
                .fold(T::zero(), T::max)
        };
        let mut inv = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut col = vec![T::zero(); n];
            col[j] = T::one();
            self.solve(&mut col);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        let na = norm1(&|i, j| a[(i, j)]);
        let ni = norm1(&|i, j| inv[(i, j)]);
        (na * ni).recip()
    }
}

/// Dense Cholesky factor `A = L L^T`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: DenseMatrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        let n = square(a)?;
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut s = a[(j, j)];
            for k in 0..j {
                s -= l[(j, k)] * l[(j, k)];
            }
            if !(s > T::zero()) {
                return Err(Error::NotPositiveDefinite(j));
            }
            let djj = s.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn solve(&self, b: &mut [T]) {
        let n = self.l.rows;
        for i in 0..n {
            let s = crate::scalar::dot(&self.l.row(i)[..i], &b[..i]);
            b[i] = (b[i] - s) / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_sym(n: usize, seed: u64) -> DenseMatrix<f64> {
        let g = crate::rng::gaussian_vector::<f64>(n * n, seed, 0);
        let mut a = DenseMatrix::from_fn(n, n, |i, j| g[i * n + j]);
        a.symmetrize();
        a
    }

    #[test]
    fn eig_residual_and_orthogonality() {
        for n in [1, 2, 3, 7, 40] {
            let a = rand_sym(n, n as u64);
            let eig = sym_eig(&a).unwrap();
            let v = &eig.vectors;
            let av = a.matmul(v);
            let vd = v.matmul(&DenseMatrix::from_diagonal(&eig.values));
            let mut res = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    res = res.max((av[(i, j)] - vd[(i, j)]).abs());
                }
            }
            assert!(res <= 1e-12 * n as f64 * a.norm_frobenius(), "n={n} res={res}");
            let vtv = v.transpose().matmul(v);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((vtv[(i, j)] - want).abs() < 1e-12);
                }
            }
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
            let vals = sym_eigenvalues(&a).unwrap();
            for (x, y) in vals.iter().zip(&eig.values) {
                assert!((x - y).abs() < 1e-12 * a.norm_frobenius());
            }
        }
    }

    #[test]
    fn eig_of_diagonal_and_tridiagonal() {
        let a = DenseMatrix::from_diagonal(&[3.0, -1.0, 2.0]);
        assert_eq!(sym_eigenvalues(&a).unwrap(), vec![-1.0, 2.0, 3.0]);
        // path Laplacian eigenvalues 2 - 2 cos(pi k / n)
        let n = 12;
        let a = DenseMatrix::from_fn(n, n, |i, j| match (i as i64 - j as i64).abs() {
            0 => if i == 0 || i == n - 1 { 1.0 } else { 2.0 },
            1 => -1.0,
            _ => 0.0,
        });
        let vals = sym_eigenvalues(&a).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let want = 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos();
            assert!((v - want).abs() < 1e-13, "{k}: {v} vs {want}");
        }
    }

    #[test]
    fn lu_solves_and_transpose() {
        let n = 6;
        let g = crate::rng::gaussian_vector::<f64>(n * n, 3, 1);
        let a = DenseMatrix::from_fn(n, n, |i, j| g[i * n + j]);
        let lu = Lu::new(&a).unwrap();
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let mut b = a.mul_vec(&x);
        lu.solve(&mut b);
        let mut bt = a.transpose().mul_vec(&x);
        lu.solve_transpose(&mut bt);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-11);
            assert!((bt[i] - x[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn cholesky_solves() {
        let n = 5;
        let a = DenseMatrix::from_fn(n, n, |i, j| if i == j { 4.0 } else { 1.0 / (1 + i + j) as f64 });
        let c = Cholesky::new(&a).unwrap();
        let x = vec![1.0, -1.0, 2.0, 0.5, 3.0];
        let mut b = a.mul_vec(&x);
        c.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-13);
        }
    }
}
