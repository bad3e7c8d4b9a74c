use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::sparse::Graph;

/// Limits after which [`minimum_degree_order`] gives up.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OrderingBudget {
    /// strictly lower entries of the factor
    pub fill: Option<usize>,
    /// adjacency entries touched while updating the elimination graph; this
    /// tracks the multiply-adds of the numeric factorization
    pub work: Option<usize>,
}

/// Minimum degree ordering computed on the explicit elimination graph.
/// Ties go to the smallest index. Returns `perm[new] = old` and the number of
/// strictly lower entries of the resulting Cholesky factor, or `None` once a
/// limit of `budget` is exceeded.
pub fn minimum_degree_order(g: &Graph, budget: OrderingBudget) -> Option<(Vec<usize>, usize)> {
    let n = g.n();
    let mut adj: Vec<Vec<u32>> = (0..n)
        .map(|i| g.neighbors(i).iter().map(|&j| j as u32).collect())
        .collect();
    let mut eliminated = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|i| Reverse((adj[i].len(), i))).collect();
    let mut order = Vec::with_capacity(n);
    let mut fill = 0usize;
    let mut work = 0usize;
    let mut merged: Vec<u32> = Vec::new();
    while let Some(Reverse((deg, p))) = heap.pop() {
        if eliminated[p] || deg != adj[p].len() {
            continue;
        }
        eliminated[p] = true;
        order.push(p);
        let nbrs = std::mem::take(&mut adj[p]);
        fill += nbrs.len();
        if budget.fill.is_some_and(|b| fill > b) {
            return None;
        }
        for &u in &nbrs {
            let u = u as usize;
            work += adj[u].len() + nbrs.len();
            if budget.work.is_some_and(|b| work > b) {
                return None;
            }
            // adj[u] := (adj[u] ∪ nbrs) \ {u, p}, both inputs sorted
            let a = &adj[u];
            merged.clear();
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < nbrs.len() {
                let next = match (a.get(i), nbrs.get(j)) {
                    (Some(&x), Some(&y)) if x == y => {
                        i += 1;
                        j += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        i += 1;
                        x
                    }
                    (Some(_), Some(&y)) => {
                        j += 1;
                        y
                    }
                    (Some(&x), None) => {
                        i += 1;
                        x
                    }
                    (None, Some(&y)) => {
                        j += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                if next as usize != u && next as usize != p {
                    merged.push(next);
                }
            }
            std::mem::swap(&mut adj[u], &mut merged);
            heap.push(Reverse((adj[u].len(), u)));
        }
    }
    Some((order, fill))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_eliminates_leaves_first() {
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let (order, fill) = minimum_degree_order(&g, OrderingBudget::default()).unwrap();
        assert_eq!(order, vec![1, 2, 3, 0, 4]);
        assert_eq!(fill, 4);
    }

    #[test]
    fn budget_aborts() {
        let g = crate::sparse::grid2d::<f64>(20).graph();
        let fill = OrderingBudget { fill: Some(10), work: None };
        assert!(minimum_degree_order(&g, fill).is_none());
        let work = OrderingBudget { fill: None, work: Some(100) };
        assert!(minimum_degree_order(&g, work).is_none());
        let (order, _) = minimum_degree_order(&g, OrderingBudget::default()).unwrap();
        let mut sorted = order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..400).collect::<Vec<_>>());
    }
}
