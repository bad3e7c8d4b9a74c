use crate::dense::{sym_eig, DenseMatrix, Lu};
use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, Scalar};

use super::{KrylovOperator, Pole};

/// How a decomposition with an infinite last pole is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundMode {
    /// Start with an infinite pole and move every new finite pole in front of it.
    #[default]
    PoleSwap,
    /// Keep an extra vector `v_inf` orthogonal to the basis and use it as an
    /// artificial last column with infinite pole.
    Auxiliary,
}

impl std::str::FromStr for BoundMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "swap" => Ok(Self::PoleSwap),
            "aux" => Ok(Self::Auxiliary),
            _ => Err(Error::Invalid(format!("unknown bound mode '{s}' (swap|aux)"))),
        }
    }
}

struct Aux<T> {
    /// basis index whose image under `A` seeds `v_inf`
    seed: usize,
    coeffs: Vec<T>,
    residual: Vec<T>,
    seed_norm: T,
}

/// Projected problem of dimension `m`: eigenpairs of `A_m`, the weights
/// `beta = U^T e_1` and `alpha = h_{m+1}^T K_m^{-1} U`.
#[derive(Clone, Debug)]
pub struct Projected<T> {
    pub m: usize,
    pub theta: Vec<T>,
    pub vectors: DenseMatrix<T>,
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub b_norm: T,
}

/// Rational Arnoldi process `A V_{j+1} K_j = V_{j+1} H_j` (upper Hessenberg pencil,
/// pole `j` equal to `h_{j+1,j} / k_{j+1,j}`), extended one user pole at a time.
///
/// After `p` user poles the projected problem has dimension `m = p + 1` and
/// `V_m` spans the rational Krylov space with exactly those poles.
pub struct RationalArnoldi<'a, T: Scalar, O: KrylovOperator<T> + ?Sized> {
    op: &'a O,
    mode: BoundMode,
    deflate: bool,
    basis: Vec<Vec<T>>,
    h: DenseMatrix<T>,
    k: DenseMatrix<T>,
    cols: usize,
    poles: Vec<Pole<T>>,
    b_norm: T,
    breakdown: bool,
    aux: Option<Aux<T>>,
    cached_av: Option<(usize, Vec<T>)>,
    matvecs: usize,
    solves: usize,
}

impl<'a, T: Scalar, O: KrylovOperator<T> + ?Sized> RationalArnoldi<'a, T, O> {
    /// Starts the process from `b` (nonzero). With `deflate`, all vectors are kept
    /// orthogonal to the constant vector, which must then lie in the kernel of `A`.
    /// `capacity` bounds the number of user poles.
    pub fn new(op: &'a O, b: &[T], mode: BoundMode, deflate: bool, capacity: usize) -> Result<Self> {
        let n = op.dim();
        if b.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: b.len(),
            });
        }
        let mut v = b.to_vec();
        if deflate {
            remove_mean(&mut v);
        }
        let b_norm = dot(&v, &v).sqrt();
        if !(b_norm > T::zero()) {
            return Err(Error::Invalid("starting vector is zero".into()));
        }
        v.iter_mut().for_each(|x| *x /= b_norm);
        let mut this = Self {
            op,
            mode,
            deflate,
            basis: vec![v],
            h: DenseMatrix::zeros(capacity + 3, capacity + 2),
            k: DenseMatrix::zeros(capacity + 3, capacity + 2),
            cols: 0,
            poles: Vec::new(),
            b_norm,
            breakdown: false,
            aux: None,
            cached_av: None,
            matvecs: 0,
            solves: 0,
        };
        match mode {
            BoundMode::PoleSwap => this.extend_raw(Pole::Infinite)?,
            BoundMode::Auxiliary => this.reseed_aux(),
        }
        Ok(this)
    }

    pub fn b_norm(&self) -> T {
        self.b_norm
    }

    /// True once the space became invariant; the projection is then exact.
    pub fn is_exhausted(&self) -> bool {
        self.breakdown
    }

    pub fn matvecs(&self) -> usize {
        self.matvecs
    }

    pub fn solves(&self) -> usize {
        self.solves
    }

    /// Poles of the underlying decomposition in their current order.
    pub fn decomposition_poles(&self) -> &[Pole<T>] {
        &self.poles
    }

    /// Dimension of the projected problem.
    pub fn dim(&self) -> usize {
        match (self.breakdown, self.mode) {
            (true, _) | (false, BoundMode::Auxiliary) => self.basis.len(),
            (false, BoundMode::PoleSwap) => self.cols,
        }
    }

    /// Orthonormal basis vector `i`.
    pub fn basis_vector(&self, i: usize) -> &[T] {
        &self.basis[i]
    }

    /// Returns `(H, K)` as `(j+1) x j` matrices.
    pub fn pencil(&self) -> (DenseMatrix<T>, DenseMatrix<T>) {
        (self.h.block(self.cols + 1, self.cols), self.k.block(self.cols + 1, self.cols))
    }

    /// Adds one pole. Finite poles must be negative.
    pub fn extend(&mut self, pole: Pole<T>) -> Result<()> {
        if self.breakdown {
            return Ok(());
        }
        if let Pole::Finite(xi) = pole {
            if !(xi < T::zero()) || !xi.is_finite() {
                return Err(Error::InvalidPole(xi.as_f64()));
            }
        }
        if self.cols + 1 >= self.h.cols() {
            return Err(Error::Invalid("rational Arnoldi capacity exceeded".into()));
        }
        self.extend_raw(pole)?;
        if self.breakdown {
            return Ok(());
        }
        match self.mode {
            BoundMode::PoleSwap => swap_last_pole_to_infinity(self)?,
            BoundMode::Auxiliary => self.update_aux(),
        }
        Ok(())
    }

    fn apply_last(&mut self) -> Vec<T> {
        let idx = self.basis.len() - 1;
        if let Some((i, av)) = self.cached_av.take() {
            if i == idx {
                return av;
            }
        }
        let mut av = vec![T::zero(); self.op.dim()];
        self.op.apply(&self.basis[idx], &mut av);
        self.matvecs += 1;
        if self.deflate {
            remove_mean(&mut av);
        }
        av
    }

    fn extend_raw(&mut self, pole: Pole<T>) -> Result<()> {
        let c = self.basis.len() - 1;
        let j = self.cols;
        debug_assert_eq!(c, j);
        let av = self.apply_last();
        let mut w = match pole {
            Pole::Infinite => av,
            Pole::Finite(xi) => {
                let s = -xi;
                let mut y = vec![T::zero(); av.len()];
                self.op.solve_positive(s, &av, &mut y)?;
                self.solves += 1;
                y.iter_mut().for_each(|v| *v *= s);
                if self.deflate {
                    remove_mean(&mut y);
                }
                y
            }
        };
        let pre = dot(&w, &w).sqrt();
        let coeffs = orthogonalize(&self.basis, &mut w);
        if self.deflate {
            remove_mean(&mut w);
        }
        let eta = dot(&w, &w).sqrt();
        for (i, &ci) in coeffs.iter().enumerate() {
            self.h[(i, j)] = ci;
        }
        match pole {
            Pole::Infinite => self.k[(c, j)] = T::one(),
            Pole::Finite(xi) => {
                for (i, &ci) in coeffs.iter().enumerate() {
                    self.k[(i, j)] = ci / xi;
                }
                self.k[(c, j)] += T::one();
            }
        }
        self.cols += 1;
        self.poles.push(pole);
        if !(eta > T::lit(1e-14) * pre) {
            self.breakdown = true;
            return Ok(());
        }
        self.h[(c + 1, j)] = eta;
        if let Pole::Finite(xi) = pole {
            self.k[(c + 1, j)] = eta / xi;
        }
        w.iter_mut().for_each(|x| *x /= eta);
        self.basis.push(w);
        Ok(())
    }

    fn reseed_aux(&mut self) {
        let seed = self.basis.len() - 1;
        let av = self.apply_last();
        let mut residual = av.clone();
        let seed_norm = dot(&av, &av).sqrt();
        let coeffs = orthogonalize(&self.basis, &mut residual);
        self.cached_av = Some((seed, av));
        self.aux = Some(Aux {
            seed,
            coeffs,
            residual,
            seed_norm,
        });
    }

    fn update_aux(&mut self) {
        let exhausted = match self.aux.as_mut() {
            None => true,
            Some(aux) => {
                let v = self.basis.last().expect("basis");
                let c = dot(v, &aux.residual);
                axpy(-c, v, &mut aux.residual);
                aux.coeffs.push(c);
                // second pass for numerical orthogonality
                for (i, vi) in self.basis.iter().enumerate() {
                    let d = dot(vi, &aux.residual);
                    axpy(-d, vi, &mut aux.residual);
                    aux.coeffs[i] += d;
                }
                let eta = dot(&aux.residual, &aux.residual).sqrt();
                !(eta > T::lit(1e-8) * aux.seed_norm)
            }
        };
        if exhausted {
            self.reseed_aux();
        }
    }

    /// Square pencil `(K_m, H_m)` and the scalar `h_{m+1,m}`.
    fn square_pencil(&self) -> (DenseMatrix<T>, DenseMatrix<T>, T) {
        let m = self.dim();
        if self.breakdown {
            return (self.k.block(m, m), self.h.block(m, m), T::zero());
        }
        match self.mode {
            BoundMode::PoleSwap => (self.k.block(m, m), self.h.block(m, m), self.h[(m, m - 1)]),
            BoundMode::Auxiliary => {
                let aux = self.aux.as_ref().expect("auxiliary vector");
                let mut km = DenseMatrix::zeros(m, m);
                let mut hm = DenseMatrix::zeros(m, m);
                for i in 0..m {
                    for j in 0..m - 1 {
                        km[(i, j)] = self.k[(i, j)];
                        hm[(i, j)] = self.h[(i, j)];
                    }
                    hm[(i, m - 1)] = aux.coeffs[i];
                }
                km[(aux.seed, m - 1)] = T::one();
                let eta = dot(&aux.residual, &aux.residual).sqrt();
                (km, hm, eta)
            }
        }
    }

    /// Projected matrix `A_m = H_m K_m^{-1}` (symmetrized).
    pub fn projected_matrix(&self) -> Result<DenseMatrix<T>> {
        let (km, hm, _) = self.square_pencil();
        let lu = Lu::new(&km)?;
        let m = km.rows();
        let mut am = DenseMatrix::zeros(m, m);
        for i in 0..m {
            let mut row = hm.row(i).to_vec();
            lu.solve_transpose(&mut row);
            am.row_mut(i).copy_from_slice(&row);
        }
        am.symmetrize();
        Ok(am)
    }

    /// Eigen-decomposition of the projected problem and the error weights.
    pub fn projected(&self) -> Result<Projected<T>> {
        let (km, hm, eta) = self.square_pencil();
        let m = km.rows();
        let lu = Lu::new(&km)?;
        let mut am = DenseMatrix::zeros(m, m);
        for i in 0..m {
            let mut row = hm.row(i).to_vec();
            lu.solve_transpose(&mut row);
            am.row_mut(i).copy_from_slice(&row);
        }
        am.symmetrize();
        let eig = sym_eig(&am)?;
        let mut r = vec![T::zero(); m];
        r[m - 1] = T::one();
        lu.solve_transpose(&mut r);
        let alpha = (0..m)
            .map(|j| eta * (0..m).map(|i| r[i] * eig.vectors[(i, j)]).sum::<T>())
            .collect();
        let beta = (0..m).map(|j| eig.vectors[(0, j)]).collect();
        Ok(Projected {
            m,
            theta: eig.values,
            vectors: eig.vectors,
            alpha,
            beta,
            b_norm: self.b_norm,
        })
    }

    /// `V_m c` for coefficients of length `m`.
    pub fn combine(&self, coeffs: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.op.dim()];
        for (c, v) in coeffs.iter().zip(&self.basis) {
            axpy(*c, v, &mut out);
        }
        out
    }
}

fn remove_mean<T: Scalar>(v: &mut [T]) {
    let mean = v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len());
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Two passes of modified Gram-Schmidt; returns the projection coefficients.
fn orthogonalize<T: Scalar>(basis: &[Vec<T>], w: &mut [T]) -> Vec<T> {
    let mut coeffs = vec![T::zero(); basis.len()];
    for _ in 0..2 {
        for (c, v) in coeffs.iter_mut().zip(basis) {
            let d = dot(v, w);
            axpy(-d, v, w);
            *c += d;
        }
    }
    coeffs
}

/// Reorders the last two poles of the decomposition, `(inf, xi) -> (xi, inf)`,
/// with one rotation acting on the rows (and basis vectors) and one on the
/// columns of the pencil. No-op when the last pole is already infinite.
pub fn swap_last_pole_to_infinity<T: Scalar, O: KrylovOperator<T> + ?Sized>(
    ra: &mut RationalArnoldi<'_, T, O>,
) -> Result<()> {
    let kk = ra.cols;
    if kk == 0 || ra.poles[kk - 1].is_infinite() {
        return Ok(());
    }
    if kk < 2 || !ra.poles[kk - 2].is_infinite() {
        return Err(Error::Invalid("pole swap expects an infinite pole before the last one".into()));
    }
    let (r0, r1, c0, c1) = (kk - 1, kk, kk - 2, kk - 1);
    let (h, k) = (&mut ra.h, &mut ra.k);
    let (s11, s12, s22) = (h[(r0, c0)], h[(r0, c1)], h[(r1, c1)]);
    let (t11, t12, t22) = (k[(r0, c0)], k[(r0, c1)], k[(r1, c1)]);
    // eigenvector of the pencil for the eigenvalue s22/t22
    let m11 = t22 * s11 - s22 * t11;
    let m12 = t22 * s12 - s22 * t12;
    let nx = m11.hypot(m12);
    if nx == T::zero() {
        return Err(Error::Invalid("degenerate 2x2 pencil in pole swap".into()));
    }
    let (x0, x1) = (m12 / nx, -m11 / nx);
    let sx = (s11 * x0 + s12 * x1, s22 * x1);
    let tx = (t11 * x0 + t12 * x1, t22 * x1);
    let (q0, q1) = {
        let ns = sx.0.hypot(sx.1);
        let nt = tx.0.hypot(tx.1);
        if ns >= nt {
            (sx.0 / ns, sx.1 / ns)
        } else {
            (tx.0 / nt, tx.1 / nt)
        }
    };
    for mat in [&mut *h, &mut *k] {
        for i in 0..=r1 {
            let (a, b) = (mat[(i, c0)], mat[(i, c1)]);
            mat[(i, c0)] = a * x0 + b * x1;
            mat[(i, c1)] = b * x0 - a * x1;
        }
        for j in 0..kk {
            let (a, b) = (mat[(r0, j)], mat[(r1, j)]);
            mat[(r0, j)] = q0 * a + q1 * b;
            mat[(r1, j)] = q0 * b - q1 * a;
        }
    }
    k[(r1, c0)] = T::zero();
    k[(r1, c1)] = T::zero();
    h[(r1, c0)] = T::zero();
    let (va, vb) = {
        let (lo, hi) = ra.basis.split_at_mut(r1);
        (&mut lo[r0], &mut hi[0])
    };
    for (a, b) in va.iter_mut().zip(vb.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = q0 * x + q1 * y;
        *b = q0 * y - q1 * x;
    }
    ra.poles.swap(c0, c1);
    Ok(())
}
