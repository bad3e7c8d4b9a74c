//! Von Neumann entropy `S(rho) = -tr(rho log rho)` of large sparse density
//! matrices.
//!
//! Three families of estimators are provided, all built on the same rational
//! Krylov engine for quadratic forms `b^T f(A) b`:
//!
//! * probing with distance-`d` colorings ([`trace::entropy_probing`]),
//! * Hutchinson and Hutch++ style stochastic estimators ([`trace::entropy_stochastic`]),
//! * a dense reference ([`bounds::entropy_oracle_dense`]) for moderate sizes.
//!
//! [`trace::entropy`] dispatches on a [`trace::Method`].
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

pub mod bounds;
pub mod coloring;
pub mod dense;
pub mod error;
pub mod krylov;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod trace;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Sparse symmetric matrix with `f64` entries.
pub type SparseMatrix = sparse::SparseSymMatrix<f64>;
/// Density matrix with `f64` entries.
pub type Density = sparse::DensityMatrix<f64>;
/// Dense matrix with `f64` entries.
pub type Dense = dense::DenseMatrix<f64>;
/// Entropy estimate computed in `f64`.
pub type EntropyEstimate = trace::EntropyEstimate<f64>;
/// Quadratic form result computed in `f64`.
pub type QuadformResult = krylov::QuadformResult<f64>;
