//! Equidistributed nested poles on `(-inf, 0)` for Cauchy-Stieltjes type
//! functions with spectrum in `[a, b]`, `0 < a < b`.
//!
//! The Möbius map `S(w) = a(1+k)/2 * (w+1)/(kw+1)` sends the symmetric condenser
//! `[-1/k, -1] ∪ [1, 1/k]` onto `(-inf, 0] ∪ [a, b]`, with `(1+k)^2/(4k) = b/a`.
//! On `[1, 1/k]` the equilibrium measure is the image of the uniform measure on
//! `t ∈ [0, K(k')]` under `t -> 1/dn(t, k')`, and likewise with a sign flip on the
//! other interval. Poles are `S(-1/dn(t_j, k'))` with `t_j = K(k') * v_j`, where
//! `v_j` is the base-2 van der Corput sequence, so every prefix is spread over the
//! whole measure and the sequence is nested.

use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Arithmetic-geometric mean.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let (an, bn) = (0.5 * (a + b), (a * b).sqrt());
        if (an - bn).abs() <= 1e-16 * an {
            return an;
        }
        a = an;
        b = bn;
    }
    a
}

/// Complete elliptic integral of the first kind `K` for modulus `k`, given also
/// the complementary modulus `kc = sqrt(1 - k^2)` to avoid cancellation.
pub fn ellipk_pair(kc: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / agm(1.0, kc)
}

/// Jacobi elliptic functions `(sn, cn, dn)(u | k)` by descending Landen
/// transformations; `kc` is the complementary modulus.
pub fn jacobi_sn_cn_dn(u: f64, k: f64, kc: f64) -> (f64, f64, f64) {
    if k == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = kc;
    while c.last().map_or(false, |&ci| ci.abs() > 1e-16) && a.len() < 40 {
        let an = *a.last().unwrap();
        let (a1, b1, c1) = (0.5 * (an + b), (an * b).sqrt(), 0.5 * (an - b));
        a.push(a1);
        c.push(c1);
        b = b1;
    }
    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    let mut phi_next = phi;
    for i in (1..=n).rev() {
        phi_next = phi;
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = if n == 0 { 1.0 } else { cn / (phi_next - phi).cos() };
    (sn, cn, dn)
}

/// Base-2 van der Corput point for index `j >= 1`: 1/2, 1/4, 3/4, 1/8, ...
pub fn van_der_corput(mut j: u64) -> f64 {
    let mut x = 0.0;
    let mut scale = 0.5;
    while j > 0 {
        if j & 1 == 1 {
            x += scale;
        }
        j >>= 1;
        scale *= 0.5;
    }
    x
}

/// Lazily generated, cached EDS pole sequence for an interval `[a, b]`.
#[derive(Debug)]
pub struct EdsPoles<T> {
    a: f64,
    b: f64,
    k: f64,
    kc: f64,
    kp: f64,
    cache: Mutex<Vec<T>>,
}

impl<T: Scalar> EdsPoles<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        let (a, b) = (a.as_f64(), b.as_f64());
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::Invalid(format!("EDS poles need 0 < a < b, got [{a}, {b}]")));
        }
        // (1+k)^2/(4k) = kappa  =>  k = 2kappa - 1 - sqrt((2kappa-1)^2 - 1)
        let kappa = b / a;
        let s = 2.0 * kappa - 1.0;
        // stable small root: k = 1 / (s + sqrt(s^2 - 1))
        let k = 1.0 / (s + ((s - 1.0) * (s + 1.0)).sqrt());
        let kc = ((1.0 - k) * (1.0 + k)).sqrt();
        // K(k') uses complementary modulus k of k'
        let kp = ellipk_pair(k);
        Ok(Self {
            a,
            b,
            k,
            kc,
            kp,
            cache: Mutex::new(Vec::new()),
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Elliptic modulus `k` of the normalized condenser.
    pub fn modulus(&self) -> f64 {
        self.k
    }

    /// Asymptotic convergence factor `exp(-pi K(k) / K(k'))` per pole.
    pub fn rate(&self) -> f64 {
        let kk = ellipk_pair(self.kc);
        (-std::f64::consts::PI * kk / self.kp).exp()
    }

    fn compute(&self, j: usize) -> f64 {
        let (k, kc, kp) = (self.k, self.kc, self.kp);
        let t = kp * van_der_corput(j as u64);
        let scale = 0.5 * self.a * (1.0 + k);
        // functions of modulus k' (complementary modulus k)
        if t <= 0.5 * kp {
            let (sn, _, dn) = jacobi_sn_cn_dn(t, kc, k);
            // (1 - D)/(1 - kD) with D = 1/dn
            let one_minus_d = -kc * kc * sn * sn / ((1.0 + dn) * dn);
            let one_minus_kd = (dn - k) / dn;
            scale * one_minus_d / one_minus_kd
        } else {
            let (sn, _, dn) = jacobi_sn_cn_dn(kp - t, kc, k);
            // D = dn(K' - t)/k
            let one_minus_d = (k - dn) / k;
            let one_minus_kd = kc * kc * sn * sn / (1.0 + dn);
            scale * one_minus_d / one_minus_kd
        }
    }

    /// Pole number `j` (1-based).
    pub fn pole(&self, j: usize) -> T {
        assert!(j >= 1, "poles are numbered from 1");
        let mut cache = self.cache.lock().expect("pole cache poisoned");
        while cache.len() < j {
            let next = cache.len() + 1;
            cache.push(T::lit(self.compute(next)));
        }
        cache[j - 1]
    }

    /// First `count` poles.
    pub fn prefix(&self, count: usize) -> Vec<T> {
        (1..=count).map(|j| self.pole(j)).collect()
    }
}
