//! Exact entropy from a spectrum and a priori error bounds for polynomial
//! approximation of `x log x` and for probing.

use crate::dense::sym_eigenvalues;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseSymMatrix;

/// Largest dimension accepted by [`entropy_oracle_dense`].
pub const DENSE_ORACLE_LIMIT: usize = 5000;

/// `-x log x` with the convention `0 log 0 = 0` (non-positive inputs give 0).
#[inline]
pub fn neg_xlogx<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        -x * x.ln()
    } else {
        T::zero()
    }
}

/// `S = -sum lambda log lambda` over the given eigenvalues.
pub fn von_neumann_entropy<T: Scalar>(eigenvalues: &[T]) -> T {
    eigenvalues.iter().map(|&l| neg_xlogx(l)).sum()
}

/// Entropy of a trace-one PSD matrix from its full dense spectrum.
/// Eigenvalues down to `-1e-12 * ||rho||` are treated as zero; anything more
/// negative is reported as an error.
pub fn entropy_oracle_dense<T: Scalar>(rho: &SparseSymMatrix<T>) -> Result<T> {
    let n = rho.n();
    if n > DENSE_ORACLE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: DENSE_ORACLE_LIMIT,
        });
    }
    let eig = sym_eigenvalues(&rho.to_dense())?;
    entropy_of_spectrum(&eig, rho.norm_inf())
}

/// Entropy of a spectrum with the clamping rule of [`entropy_oracle_dense`].
pub fn entropy_of_spectrum<T: Scalar>(eigenvalues: &[T], norm: T) -> Result<T> {
    let floor = -T::lit(1e-12) * norm.max(T::min_positive_value());
    if let Some(&bad) = eigenvalues.iter().find(|&&l| l < floor) {
        return Err(Error::NotPositiveSemidefinite(bad.as_f64()));
    }
    Ok(von_neumann_entropy(eigenvalues))
}

/// Entropy of `rho = gamma A` from the spectrum of `A`:
/// `S(rho) = gamma S(A) - gamma log(gamma) tr(A)`, where `S(A) = -sum lambda log lambda`.
pub fn normalization_identity<T: Scalar>(eigenvalues_a: &[T], gamma: T) -> T {
    let s_a = von_neumann_entropy(eigenvalues_a);
    let tr_a: T = eigenvalues_a.iter().copied().sum();
    gamma * s_a - gamma * gamma.ln() * tr_a
}

/// Chebyshev-based bound `b / (2k(k+1))` on the best uniform polynomial
/// approximation error of `x log x` on `[0, b]` (valid for `k >= 1`).
pub fn chebyshev_bound<T: Scalar>(k: usize, b: T) -> Result<T> {
    if k < 1 {
        return Err(Error::Invalid("degree must be at least 1".into()));
    }
    let k = T::from_usize_lossy(k);
    Ok(b / (T::lit(2.0) * k * (k + T::one())))
}

/// Bound on the best uniform degree-`k` polynomial approximation error of
/// `x log x` on `[a, b]`, `0 <= a < b`, `k >= 2`:
///
/// `b (1 - sqrt g)(1 + g + 2k sqrt g) / (4(k^2 - 1)) * ((1 - sqrt g)/(1 + sqrt g))^k`, `g = a/b`.
pub fn entropy_poly_bound<T: Scalar>(k: usize, a: T, b: T) -> Result<T> {
    if k < 2 {
        return Err(Error::Invalid("degree must be at least 2".into()));
    }
    if !(a >= T::zero() && b > a) {
        return Err(Error::Invalid(format!("need 0 <= a < b, got [{a}, {b}]")));
    }
    let kf = T::from_usize_lossy(k);
    let g = a / b;
    let sg = g.sqrt();
    let one = T::one();
    let lead = b * (one - sg) * (one + g + T::lit(2.0) * kf * sg) / (T::lit(4.0) * (kf * kf - one));
    let ratio = (one - sg) / (one + sg);
    Ok(lead * ratio.powi(k as i32))
}

/// Upper bound on `|S(rho) - traceP_d(rho)|` for probing with a distance-`d`
/// coloring, spectrum in `[a, b]`: `2n` times [`entropy_poly_bound`] at degree `d`.
pub fn probing_bound<T: Scalar>(d: usize, n: usize, a: T, b: T) -> Result<T> {
    Ok(T::lit(2.0) * T::from_usize_lossy(n) * entropy_poly_bound(d, a, b)?)
}

/// Smallest `d` in `2..=d_max` whose [`probing_bound`] is at most `eps_hat`.
pub fn select_d_apriori<T: Scalar>(n: usize, a: T, b: T, eps_hat: T, d_max: usize) -> Result<usize> {
    if !(eps_hat > T::zero()) {
        return Err(Error::Invalid(format!("tolerance must be positive, got {eps_hat}")));
    }
    for d in 2..=d_max {
        if probing_bound(d, n, a, b)? <= eps_hat {
            return Ok(d);
        }
    }
    Err(Error::Invalid(format!(
        "no distance up to {d_max} meets the a priori bound for tolerance {:e}",
        eps_hat.as_f64()
    )))
}

/// Independent proxy for the best approximation error: the sup-norm error of
/// interpolating `x log x` at the `k + 1` Chebyshev points of `[a, b]`,
/// measured on a sample of `10k + 1000` points clustered towards the endpoints
/// plus as many uniformly spaced points.
///
/// The returned value is an upper bound on the best approximation error `E_k`, and
/// `value / (1 + Lambda_k)` a lower bound, with `Lambda_k <= (2/pi) log(k+1) + 1`.
pub fn best_approx_oracle(k: usize, a: f64, b: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    let np = k + 1;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let nodes: Vec<f64> = (0..np)
        .map(|j| mid + half * (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * np) as f64).cos())
        .collect();
    let vals: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    // barycentric weights for first-kind Chebyshev points
    let weights: Vec<f64> = (0..np)
        .map(|j| {
            let th = std::f64::consts::PI * (2 * j + 1) as f64 / (2 * np) as f64;
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            s * th.sin()
        })
        .collect();
    let interp = |x: f64| {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..np {
            let dx = x - nodes[j];
            if dx == 0.0 {
                return vals[j];
            }
            let w = weights[j] / dx;
            num += w * vals[j];
            den += w;
        }
        num / den
    };
    let samples = 10 * k + 1000;
    let mut err: f64 = 0.0;
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        let xc = mid - half * (std::f64::consts::PI * t).cos();
        let xu = a + (b - a) * t;
        for x in [xc, xu] {
            err = err.max((f(x) - interp(x)).abs());
        }
    }
    err
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apriori_distance_scan() {
        // 50/(d^2-1): 1.04 at d = 7, 0.794 at d = 8
        assert_eq!(select_d_apriori(100, 0.0, 1.0, 1.0, 64).unwrap(), 8);
        assert_eq!(select_d_apriori(100, 0.0, 1.0, 100.0, 64).unwrap(), 2);
        assert!(select_d_apriori(100, 0.0, 1.0, 1e-30, 64).is_err());
        let mut last = usize::MAX;
        for e in [1e-6, 1e-4, 1e-2, 1.0] {
            let d = select_d_apriori(500, 1e-5, 1e-2, e, 200).unwrap();
            assert!(d <= last);
            last = d;
        }
    }

    #[test]
    fn poly_bound_reduces_at_zero() {
        for k in 2..20 {
            let b = 3.0;
            let v = entropy_poly_bound(k, 0.0, b).unwrap();
            let want = b / (4.0 * ((k * k) as f64 - 1.0));
            assert!((v - want).abs() <= 1e-15 * want);
        }
    }

    #[test]
    fn probing_bound_is_twice_n_poly_bound() {
        let v: f64 = probing_bound(5, 100, 0.0, 1.0).unwrap();
        assert!((v - 200.0 / (4.0 * 24.0)).abs() < 1e-13);
        assert!(probing_bound(1, 10, 0.0, 1.0).is_err());
    }

    #[test]
    fn entropy_conventions() {
        assert_eq!(von_neumann_entropy(&[1.0, 0.0, 0.0]), 0.0);
        let n = 8;
        let uniform = vec![1.0 / n as f64; n];
        assert!((von_neumann_entropy(&uniform) - (n as f64).ln()).abs() < 1e-15);
        assert!(entropy_of_spectrum(&[0.5, 0.5, -1e-3], 1.0).is_err());
        assert!(entropy_of_spectrum(&[0.5, 0.5, -1e-14], 1.0).is_ok());
    }
}
