use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::SparseSymMatrix;
use crate::error::Error;
use crate::rng::stream_rng;
use crate::scalar::Scalar;

/// Adjacency matrix of the `side x side` lattice with 4-neighbour connectivity.
/// Node `(x, y)` has index `y * side + x`.
pub fn grid2d<T: Scalar>(side: usize) -> SparseSymMatrix<T> {
    let mut t = Vec::with_capacity(2 * side * side);
    for y in 0..side {
        for x in 0..side {
            let i = y * side + x;
            if x + 1 < side {
                t.push((i, i + 1, T::one()));
            }
            if y + 1 < side {
                t.push((i, i + side, T::one()));
            }
        }
    }
    SparseSymMatrix::from_upper_triplets(side * side, &t).expect("indices in range")
}

/// Preferential attachment graph: a star on `attach + 1` nodes, then every new
/// node links to `attach` distinct existing nodes drawn proportionally to degree.
pub fn barabasi_albert<T: Scalar>(n: usize, attach: usize, seed: u64) -> Result<SparseSymMatrix<T>, Error> {
    if attach == 0 || n <= attach {
        return Err(Error::Invalid(format!("need 0 < attach < n, got n = {n}, attach = {attach}")));
    }
    let mut rng = stream_rng(seed, 0xBA);
    let mut edges = Vec::with_capacity(n * attach);
    // endpoint multiset: each node appears once per incident edge
    let mut repeated: Vec<usize> = Vec::with_capacity(2 * n * attach);
    for leaf in 1..=attach {
        edges.push((0, leaf, T::one()));
        repeated.extend([0, leaf]);
    }
    let mut targets = Vec::with_capacity(attach);
    for v in attach + 1..n {
        targets.clear();
        while targets.len() < attach {
            let u = repeated[rng.random_range(0..repeated.len())];
            if !targets.contains(&u) {
                targets.push(u);
            }
        }
        for &u in &targets {
            edges.push((u, v, T::one()));
            repeated.extend([u, v]);
        }
    }
    SparseSymMatrix::from_upper_triplets(n, &edges)
}

/// Synthetic graph description, parsed from `grid2d:SIDE` or `ba:N:M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphSpec {
    Grid2d { side: usize },
    BarabasiAlbert { n: usize, attach: usize },
}

impl GraphSpec {
    pub fn build<T: Scalar>(&self, seed: u64) -> Result<SparseSymMatrix<T>, Error> {
        match *self {
            GraphSpec::Grid2d { side } => Ok(grid2d(side)),
            GraphSpec::BarabasiAlbert { n, attach } => barabasi_albert(n, attach, seed),
        }
    }

    pub fn nodes(&self) -> usize {
        match *self {
            GraphSpec::Grid2d { side } => side * side,
            GraphSpec::BarabasiAlbert { n, .. } => n,
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Grid2d { side } => write!(f, "grid2d:{side}"),
            GraphSpec::BarabasiAlbert { n, attach } => write!(f, "ba:{n}:{attach}"),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| Error::Invalid(format!("bad number '{p}' in generator '{s}'")))
        };
        match parts.as_slice() {
            ["grid2d", side] => {
                let side = num(side)?;
                if side < 2 {
                    return Err(Error::Invalid("grid2d side must be at least 2".into()));
                }
                Ok(GraphSpec::Grid2d { side })
            }
            ["ba", n, m] => {
                let (n, attach) = (num(n)?, num(m)?);
                if attach == 0 || n <= attach {
                    return Err(Error::Invalid("ba requires 0 < M < N".into()));
                }
                Ok(GraphSpec::BarabasiAlbert { n, attach })
            }
            _ => Err(Error::Invalid(format!(
                "unknown generator '{s}' (expected grid2d:SIDE or ba:N:M)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_edge_count() {
        let a = grid2d::<f64>(5);
        assert_eq!(a.nnz(), 2 * 2 * 5 * 4);
    }

    #[test]
    fn ba_is_connected_and_seeded() {
        let a = barabasi_albert::<f64>(300, 2, 7).unwrap();
        let b = barabasi_albert::<f64>(300, 2, 7).unwrap();
        let c = barabasi_albert::<f64>(300, 2, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.graph().components().len(), 1);
        assert_eq!(a.graph().num_edges(), 2 + 2 * (300 - 3));
    }

    #[test]
    fn parse_specs() {
        assert_eq!("grid2d:50".parse::<GraphSpec>().unwrap(), GraphSpec::Grid2d { side: 50 });
        assert_eq!(
            "ba:1024:2".parse::<GraphSpec>().unwrap(),
            GraphSpec::BarabasiAlbert { n: 1024, attach: 2 }
        );
        assert!("ba:3".parse::<GraphSpec>().is_err());
    }
}
