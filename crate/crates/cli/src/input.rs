use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use vne_core::sparse::{largest_component, laplacian, read_binary, read_matrix_market, GraphSpec, SparseSymMatrix};
use vne_core::Density;

use crate::args::InputArgs;
use crate::Failure;

/// A density matrix ready for the estimators.
pub struct Loaded {
    /// file path or generator spec
    pub name: String,
    pub rho: Density,
    /// generator spec, when the matrix was generated
    pub spec: Option<GraphSpec>,
    /// nodes dropped outside the largest component
    pub dropped: usize,
}

impl Loaded {
    pub fn n(&self) -> usize {
        self.rho.n()
    }

    pub fn nnz(&self) -> usize {
        self.rho.matrix().nnz()
    }
}

/// How a stored matrix is turned into a density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// nonnegative off-diagonal entries: weights of a graph
    Adjacency,
    /// anything else is used as given after trace normalization
    Operator,
}

pub fn classify(m: &SparseSymMatrix<f64>) -> Kind {
    let offdiag_nonneg = (0..m.n()).all(|i| m.row(i).all(|(j, v)| j == i || v >= 0.0));
    if offdiag_nonneg {
        Kind::Adjacency
    } else {
        Kind::Operator
    }
}

pub fn read_path(path: &Path) -> Result<SparseSymMatrix<f64>, Failure> {
    let file = File::open(path).map_err(|e| Failure::parse(format!("cannot open {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let parsed = if path.extension().is_some_and(|e| e == "bin") {
        read_binary(reader)
    } else {
        read_matrix_market(reader)
    };
    parsed.map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

/// parse, keep the largest connected component, form the Laplacian of a graph,
/// normalize the trace
pub fn load(input: &InputArgs, seed: u64) -> Result<Loaded, Failure> {
    let (name, raw, spec) = match (&input.input, &input.generator) {
        (Some(path), None) => (path.display().to_string(), read_path(path)?, None),
        (None, Some(spec)) => {
            let m = spec.build(seed).map_err(Failure::config)?;
            (spec.to_string(), m, Some(*spec))
        }
        _ => return Err(Failure::config("give exactly one of --in and --gen")),
    };
    density(name, raw, spec)
}

pub fn density(name: String, raw: SparseSymMatrix<f64>, spec: Option<GraphSpec>) -> Result<Loaded, Failure> {
    let total = raw.n();
    let comp = largest_component(&raw);
    let m = comp.matrix;
    let dropped = total - m.n();
    let l = match classify(&m) {
        Kind::Adjacency => laplacian(&m),
        Kind::Operator => m,
    };
    let rho = Density::from_laplacian(&l).map_err(|e| Failure::parse(format!("{name}: {e}")))?;
    Ok(Loaded { name, rho, spec, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_and_laplacian_give_same_density() {
        let adj = GraphSpec::Grid2d { side: 4 }.build::<f64>(0).unwrap();
        let a = density("a".into(), adj.clone(), None).unwrap();
        let b = density("b".into(), laplacian(&adj), None).unwrap();
        assert_eq!(a.rho.matrix(), b.rho.matrix());
        assert!(a.rho.annihilates_ones());
    }

    #[test]
    fn keeps_largest_component() {
        let trip = [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)];
        let adj = SparseSymMatrix::from_upper_triplets(5, &trip).unwrap();
        let l = density("x".into(), adj, None).unwrap();
        assert_eq!((l.n(), l.dropped), (3, 2));
    }
}
