//! Reproducible random streams.
//!
//! Every random vector is drawn from a ChaCha stream selected by `(seed, stream)`,
//! so results do not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Scalar;

/// Counter-based generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard Gaussian vector of length `n` from stream `stream`.
pub fn gaussian_vector<T: Scalar>(n: usize, seed: u64, stream: u64) -> Vec<T> {
    let mut rng = stream_rng(seed, stream);
    (0..n)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            T::lit(x)
        })
        .collect()
}
