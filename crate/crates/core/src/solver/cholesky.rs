use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseSymMatrix;

const NONE: usize = usize::MAX;

/// Pattern information shared by all factorizations of `s I + A` for a fixed `A`.
#[derive(Clone, Debug)]
pub struct Symbolic {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    parent: Vec<usize>,
    /// upper triangle (rows `<= k`) of the permuted matrix, by column
    c_ptr: Vec<usize>,
    c_idx: Vec<usize>,
    /// position of each entry in the values of `A`, `NONE` for an absent diagonal
    c_src: Vec<usize>,
    l_ptr: Vec<usize>,
}

impl Symbolic {
    /// Analyses `A` under the ordering `perm[new] = old`.
    pub fn new<T: Scalar>(a: &SparseSymMatrix<T>, perm: Vec<usize>) -> Self {
        let n = a.n();
        let mut pinv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }
        let mut cols: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for old_i in 0..n {
            let i = pinv[old_i];
            for k in a.row_ptr()[old_i]..a.row_ptr()[old_i + 1] {
                let j = pinv[a.col_idx()[k]];
                if i <= j {
                    cols[j].push((i, k));
                }
            }
        }
        let mut c_ptr = vec![0];
        let mut c_idx = Vec::new();
        let mut c_src = Vec::new();
        for (j, mut col) in cols.into_iter().enumerate() {
            if !col.iter().any(|&(i, _)| i == j) {
                col.push((j, NONE));
            }
            col.sort_unstable();
            for (i, src) in col {
                c_idx.push(i);
                c_src.push(src);
            }
            c_ptr.push(c_idx.len());
        }
        let parent = etree(n, &c_ptr, &c_idx);
        // column counts of L from the row patterns
        let mut counts = vec![1usize; n];
        let mut stack = vec![0; n];
        let mut mark = vec![NONE; n];
        for k in 0..n {
            let top = ereach(k, &c_ptr, &c_idx, &parent, &mut stack, &mut mark);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut l_ptr = vec![0; n + 1];
        for j in 0..n {
            l_ptr[j + 1] = l_ptr[j] + counts[j];
        }
        Self {
            n,
            perm,
            parent,
            c_ptr,
            c_idx,
            c_src,
            l_ptr,
        }
    }

    /// Entries of the Cholesky factor including the diagonal.
    pub fn factor_nnz(&self) -> usize {
        self.l_ptr[self.n]
    }

    /// Multiply-adds of one numeric factorization, `sum_j c_j^2` over column counts.
    pub fn factor_flops(&self) -> f64 {
        self.l_ptr.windows(2).map(|w| ((w[1] - w[0]) as f64).powi(2)).sum()
    }
}

fn etree(n: usize, c_ptr: &[usize], c_idx: &[usize]) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for &i0 in &c_idx[c_ptr[k]..c_ptr[k + 1]] {
            let mut i = i0;
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Pattern of row `k` of `L` (excluding the diagonal) in topological order,
/// returned as `stack[top..]`.
fn ereach(
    k: usize,
    c_ptr: &[usize],
    c_idx: &[usize],
    parent: &[usize],
    stack: &mut [usize],
    mark: &mut [usize],
) -> usize {
    let n = parent.len();
    let mut top = n;
    mark[k] = k;
    for &i0 in &c_idx[c_ptr[k]..c_ptr[k + 1]] {
        if i0 > k {
            continue;
        }
        let mut i = i0;
        let mut len = 0;
        while mark[i] != k {
            stack[len] = i;
            len += 1;
            mark[i] = k;
            i = parent[i];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

/// Sparse Cholesky factor `P (s I + A) P^T = L L^T`.
#[derive(Clone, Debug)]
pub struct SparseCholesky<T> {
    l_idx: Vec<usize>,
    l_val: Vec<T>,
}

impl<T: Scalar> SparseCholesky<T> {
    /// Numeric factorization of `shift * I + A` using the analysis `sym`.
    pub fn factor(a: &SparseSymMatrix<T>, shift: T, sym: &Symbolic) -> Result<Self> {
        let n = sym.n;
        let nnz = sym.factor_nnz();
        let mut l_idx = vec![0usize; nnz];
        let mut l_val = vec![T::zero(); nnz];
        let mut next = sym.l_ptr[..n].to_vec();
        let mut x = vec![T::zero(); n];
        let mut stack = vec![0usize; n];
        let mut mark = vec![NONE; n];
        let vals = a.values();
        for k in 0..n {
            let top = ereach(k, &sym.c_ptr, &sym.c_idx, &sym.parent, &mut stack, &mut mark);
            for p in sym.c_ptr[k]..sym.c_ptr[k + 1] {
                let i = sym.c_idx[p];
                let mut v = if sym.c_src[p] == NONE { T::zero() } else { vals[sym.c_src[p]] };
                if i == k {
                    v += shift;
                }
                x[i] = v;
            }
            let mut d = x[k];
            x[k] = T::zero();
            for &i in &stack[top..] {
                let lki = x[i] / l_val[sym.l_ptr[i]];
                x[i] = T::zero();
                for p in sym.l_ptr[i] + 1..next[i] {
                    x[l_idx[p]] -= l_val[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                l_idx[p] = k;
                l_val[p] = lki;
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite(k));
            }
            let p = next[k];
            next[k] += 1;
            l_idx[p] = k;
            l_val[p] = d.sqrt();
        }
        Ok(Self { l_idx, l_val })
    }

    /// Solves `(s I + A) out = rhs`.
    pub fn solve(&self, sym: &Symbolic, rhs: &[T], out: &mut [T]) {
        let n = sym.n;
        let mut x: Vec<T> = sym.perm.iter().map(|&old| rhs[old]).collect();
        for j in 0..n {
            let (start, end) = (sym.l_ptr[j], sym.l_ptr[j + 1]);
            let xj = x[j] / self.l_val[start];
            x[j] = xj;
            for p in start + 1..end {
                x[self.l_idx[p]] -= self.l_val[p] * xj;
            }
        }
        for j in (0..n).rev() {
            let (start, end) = (sym.l_ptr[j], sym.l_ptr[j + 1]);
            let mut s = x[j];
            for p in start + 1..end {
                s -= self.l_val[p] * x[self.l_idx[p]];
            }
            x[j] = s / self.l_val[start];
        }
        for (new, &old) in sym.perm.iter().enumerate() {
            out[old] = x[new];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{grid2d, laplacian};

    #[test]
    fn factor_solves_shifted_laplacian() {
        let a = laplacian(&grid2d::<f64>(7));
        let n = a.n();
        let perm: Vec<usize> = (0..n).rev().collect();
        let sym = Symbolic::new(&a, perm);
        let f = SparseCholesky::factor(&a, 0.3, &sym).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        a.matvec(&x, &mut b);
        b.iter_mut().zip(&x).for_each(|(bi, xi)| *bi += 0.3 * xi);
        let mut y = vec![0.0; n];
        f.solve(&sym, &b, &mut y);
        for i in 0..n {
            assert!((y[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_has_no_fill() {
        let a = laplacian(&crate::sparse::SparseSymMatrix::from_upper_triplets(
            6,
            &(1..6).map(|i| (i - 1, i, 1.0)).collect::<Vec<_>>(),
        )
        .unwrap());
        let sym = Symbolic::new(&a, (0..6).collect());
        assert_eq!(sym.factor_nnz(), 6 + 5);
    }
}
