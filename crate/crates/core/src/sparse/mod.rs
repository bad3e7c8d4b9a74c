//! Symmetric sparse matrices, graph Laplacians and density matrices.

mod graph;
mod io;
mod gen;

pub use gen::{barabasi_albert, grid2d, GraphSpec};
pub use graph::{degree_descending_order, largest_component, rcm_order, Component, Graph, Ordering};
pub use io::{read_binary, read_matrix_market, write_binary, write_matrix_market};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Symmetric matrix in compressed row format; both triangles are stored and
/// column indices within each row are strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseSymMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed.
    /// Every off-diagonal entry must appear with its mirror (equal value).
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut entries: Vec<(usize, usize, T)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::Invalid(format!(
                    "entry ({i}, {j}) outside {n} x {n} matrix"
                )));
            }
            entries.push((i, j, v));
        }
        let m = Self::assemble(n, entries);
        m.check_symmetric()?;
        Ok(m)
    }

    /// Builds a symmetric matrix from entries of one triangle (either), mirroring
    /// off-diagonal entries. Duplicates are summed.
    pub fn from_upper_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(2 * triplets.len());
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::Invalid(format!(
                    "entry ({i}, {j}) outside {n} x {n} matrix"
                )));
            }
            entries.push((i, j, v));
            if i != j {
                entries.push((j, i, v));
            }
        }
        Ok(Self::assemble(n, entries))
    }

    fn assemble(n: usize, mut entries: Vec<(usize, usize, T)>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<T> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Assembles from raw CSR parts; rows must be sorted and the pattern symmetric.
    pub fn from_csr(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<T>) -> Result<Self> {
        if row_ptr.len() != n + 1 || col_idx.len() != values.len() || row_ptr[n] != col_idx.len() {
            return Err(Error::Invalid("inconsistent CSR arrays".into()));
        }
        for i in 0..n {
            let row = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&j| j >= n) {
                return Err(Error::Invalid(format!("row {i} has unsorted or out of range columns")));
            }
        }
        let m = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        m.check_symmetric()?;
        Ok(m)
    }

    fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                match self.get(j, i) {
                    Some(w) if w == v => {}
                    _ => {
                        return Err(Error::Invalid(format!(
                            "matrix is not symmetric at ({i}, {j})"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries counting both triangles.
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Iterates `(column, value)` over row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .binary_search(&j)
            .ok()
            .map(|k| self.values[r.start + k])
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| self.get(i, i).unwrap_or_else(T::zero))
            .collect()
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum()
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn norm_inf(&self) -> T {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Multiplies every entry by `alpha`.
    pub fn scaled(&self, alpha: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// Off-diagonal sparsity pattern as an undirected graph.
    pub fn graph(&self) -> Graph {
        Graph::from_pattern(self.n, &self.row_ptr, &self.col_idx)
    }

    /// Symmetric permutation `P A P^T` where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n;
        if perm.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: perm.len(),
            });
        }
        let mut inv = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            if old >= n || inv[old] != usize::MAX {
                return Err(Error::Invalid("not a permutation".into()));
            }
            inv[old] = new;
        }
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..n {
            for (j, v) in self.row(i) {
                triplets.push((inv[i], inv[j], v));
            }
        }
        Ok(Self::assemble(n, triplets))
    }

    /// Principal submatrix on `nodes` (in the given order).
    pub fn submatrix(&self, nodes: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in nodes.iter().enumerate() {
            pos[i] = k;
        }
        let mut triplets = Vec::new();
        for (k, &i) in nodes.iter().enumerate() {
            for (j, v) in self.row(i) {
                if pos[j] != usize::MAX {
                    triplets.push((k, pos[j], v));
                }
            }
        }
        Self::assemble(nodes.len(), triplets)
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> crate::dense::DenseMatrix<T> {
        let mut d = crate::dense::DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Converts the scalar type.
    pub fn cast<U: Scalar>(&self) -> SparseSymMatrix<U> {
        SparseSymMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

/// Graph Laplacian `L = D - W` of a weighted adjacency matrix. Diagonal entries of
/// the adjacency (self loops) are ignored.
pub fn laplacian<T: Scalar>(adjacency: &SparseSymMatrix<T>) -> SparseSymMatrix<T> {
    let n = adjacency.n();
    let mut triplets = Vec::with_capacity(adjacency.nnz() + n);
    for i in 0..n {
        let mut deg = T::zero();
        for (j, w) in adjacency.row(i) {
            if j != i {
                triplets.push((i, j, -w));
                deg += w;
            }
        }
        triplets.push((i, i, deg));
    }
    SparseSymMatrix::assemble(n, triplets)
}

/// Trace-one positive semidefinite matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix<T> {
    matrix: SparseSymMatrix<T>,
    annihilates_ones: bool,
}

impl<T: Scalar> DensityMatrix<T> {
    /// `rho = L / tr(L)` for a graph Laplacian.
    pub fn from_laplacian(l: &SparseSymMatrix<T>) -> Result<Self> {
        let tr = l.trace();
        if !(tr > T::zero()) {
            return Err(Error::Invalid("Laplacian has zero trace (graph without edges)".into()));
        }
        let matrix = l.scaled(tr.recip());
        let annihilates_ones = row_sums_vanish(&matrix);
        Ok(Self {
            matrix,
            annihilates_ones,
        })
    }

    /// Density matrix of the graph with the given adjacency.
    pub fn from_adjacency(adjacency: &SparseSymMatrix<T>) -> Result<Self> {
        Self::from_laplacian(&laplacian(adjacency))
    }

    /// Wraps a matrix that is already trace one; checks the trace and the diagonal sign.
    pub fn from_matrix(matrix: SparseSymMatrix<T>) -> Result<Self> {
        let tr = matrix.trace();
        let tol = T::lit(1e-10) * T::from_usize_lossy(matrix.n().max(1));
        if (tr - T::one()).abs() > tol {
            return Err(Error::Invalid(format!("trace is {tr}, expected 1")));
        }
        if matrix.diagonal().iter().any(|&d| d < T::zero()) {
            return Err(Error::Invalid("negative diagonal entry".into()));
        }
        let annihilates_ones = row_sums_vanish(&matrix);
        Ok(Self {
            matrix,
            annihilates_ones,
        })
    }

    pub fn matrix(&self) -> &SparseSymMatrix<T> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// True when every row sums to zero, i.e. the constant vector is in the kernel.
    pub fn annihilates_ones(&self) -> bool {
        self.annihilates_ones
    }
}

fn row_sums_vanish<T: Scalar>(m: &SparseSymMatrix<T>) -> bool {
    let scale = m.norm_inf();
    let tol = T::lit(1e-12) * scale.max(T::min_positive_value());
    (0..m.n()).all(|i| m.row(i).map(|(_, v)| v).sum::<T>().abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assemble_sums_duplicates_and_sorts() {
        let m = SparseSymMatrix::from_upper_triplets(3, &[(0, 2, 1.0), (0, 2, 2.0), (1, 1, 4.0)]).unwrap();
        assert_eq!(m.get(0, 2), Some(3.0));
        assert_eq!(m.get(2, 0), Some(3.0));
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn asymmetric_triplets_rejected() {
        assert!(SparseSymMatrix::from_triplets(2, &[(0, 1, 1.0)]).is_err());
        assert!(SparseSymMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 2.0)]).is_err());
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let a = grid2d::<f64>(4);
        let l = laplacian(&a);
        for i in 0..l.n() {
            assert_eq!(l.row(i).map(|(_, v)| v).sum::<f64>(), 0.0);
        }
        let rho = DensityMatrix::from_laplacian(&l).unwrap();
        assert!((rho.matrix().trace() - 1.0).abs() < 1e-15);
        assert!(rho.annihilates_ones());
    }

    #[test]
    fn permutation_roundtrip() {
        let a = laplacian(&grid2d::<f64>(3));
        let perm: Vec<usize> = (0..9).rev().collect();
        let p = a.permuted(&perm).unwrap();
        assert_eq!(p.permuted(&perm).unwrap(), a);
        assert_eq!(p.get(0, 0), a.get(8, 8));
    }
}
