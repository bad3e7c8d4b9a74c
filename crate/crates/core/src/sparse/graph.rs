use std::collections::VecDeque;
use std::str::FromStr;

use crate::error::Error;

/// Undirected graph in adjacency (CSR) form; self loops are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    ptr: Vec<usize>,
    adj: Vec<usize>,
}

impl Graph {
    pub(crate) fn from_pattern(n: usize, row_ptr: &[usize], col_idx: &[usize]) -> Self {
        let mut ptr = Vec::with_capacity(n + 1);
        let mut adj = Vec::with_capacity(col_idx.len());
        ptr.push(0);
        for i in 0..n {
            adj.extend(col_idx[row_ptr[i]..row_ptr[i + 1]].iter().copied().filter(|&j| j != i));
            ptr.push(adj.len());
        }
        Self { ptr, adj }
    }

    /// Builds a graph from an undirected edge list (duplicates and loops ignored).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut lists = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i != j {
                lists[i].push(j);
                lists[j].push(i);
            }
        }
        let mut ptr = vec![0];
        let mut adj = Vec::new();
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            adj.extend(l);
            ptr.push(adj.len());
        }
        Self { ptr, adj }
    }

    pub fn n(&self) -> usize {
        self.ptr.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.adj.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[self.ptr[i]..self.ptr[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.ptr[i + 1] - self.ptr[i]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Upper bound on the largest distance between two connected nodes: twice the
    /// eccentricity of one node per component. Probing with a distance-`d` coloring
    /// is exact once `d` reaches this value.
    pub fn diameter_upper_bound(&self) -> usize {
        let mask = vec![true; self.n()];
        self.components()
            .iter()
            .map(|c| 2 * (self.bfs_levels(c[0], &mask).len() - 1))
            .max()
            .unwrap_or(0)
    }

    /// Breadth-first levels from `root`, restricted to unvisited nodes.
    fn bfs_levels(&self, root: usize, mask: &[bool]) -> Vec<Vec<usize>> {
        let mut dist = vec![usize::MAX; self.n()];
        dist[root] = 0;
        let mut levels = vec![vec![root]];
        loop {
            let mut next = Vec::new();
            for &u in levels.last().expect("nonempty") {
                for &v in self.neighbors(u) {
                    if mask[v] && dist[v] == usize::MAX {
                        dist[v] = levels.len();
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                return levels;
            }
            levels.push(next);
        }
    }
}

/// A connected component extracted from a larger matrix.
#[derive(Clone, Debug)]
pub struct Component<M> {
    pub matrix: M,
    /// `original[k]` is the index in the input of node `k` of `matrix`.
    pub original: Vec<usize>,
}

/// Largest connected component; ties go to the component containing the smallest index.
pub fn largest_component<T: crate::Scalar>(
    m: &super::SparseSymMatrix<T>,
) -> Component<super::SparseSymMatrix<T>> {
    let comps = m.graph().components();
    let best = comps
        .into_iter()
        .fold(Vec::new(), |best: Vec<usize>, c| if c.len() > best.len() { c } else { best });
    Component {
        matrix: m.submatrix(&best),
        original: best,
    }
}

/// Node visiting order used by greedy colorings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Ordering {
    /// Degree descending, ties by index.
    #[default]
    Degree,
    /// Reverse Cuthill-McKee.
    Rcm,
    /// Index order.
    Natural,
}

impl Ordering {
    /// Returns `order[k]` = k-th node to visit.
    pub fn order(self, g: &Graph) -> Vec<usize> {
        match self {
            Ordering::Degree => degree_descending_order(g),
            Ordering::Rcm => rcm_order(g),
            Ordering::Natural => (0..g.n()).collect(),
        }
    }
}

impl FromStr for Ordering {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "degree" => Ok(Self::Degree),
            "rcm" => Ok(Self::Rcm),
            "natural" => Ok(Self::Natural),
            _ => Err(Error::Invalid(format!("unknown ordering '{s}'"))),
        }
    }
}

pub fn degree_descending_order(g: &Graph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(g.degree(i)));
    order
}

/// Reverse Cuthill-McKee: each component is started from a pseudo-peripheral node,
/// neighbours are queued by ascending degree (ties by index) and the result reversed.
pub fn rcm_order(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    for comp in g.components() {
        let mut mask = vec![false; n];
        comp.iter().for_each(|&i| mask[i] = true);
        let start = pseudo_peripheral(g, &comp, &mask);
        let mut queue = VecDeque::from([start]);
        placed[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = g.neighbors(u).iter().copied().filter(|&v| !placed[v]).collect();
            nbrs.sort_by_key(|&v| (g.degree(v), v));
            for v in nbrs {
                placed[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(g: &Graph, comp: &[usize], mask: &[bool]) -> usize {
    let min_deg = |nodes: &[usize]| {
        *nodes
            .iter()
            .min_by_key(|&&v| (g.degree(v), v))
            .expect("nonempty")
    };
    let mut root = min_deg(comp);
    let mut levels = g.bfs_levels(root, mask);
    loop {
        let candidate = min_deg(levels.last().expect("nonempty"));
        let next = g.bfs_levels(candidate, mask);
        if next.len() > levels.len() {
            root = candidate;
            levels = next;
        } else {
            return root;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges)
    }

    #[test]
    fn degree_order_is_stable() {
        // star centred at 2 plus an isolated pair
        let g = Graph::from_edges(6, &[(2, 0), (2, 1), (2, 3), (4, 5)]);
        assert_eq!(degree_descending_order(&g), vec![2, 0, 1, 3, 4, 5]);
    }

    #[test]
    fn rcm_on_path_starts_at_an_end() {
        let g = path(5);
        let o = rcm_order(&g);
        assert_eq!(o, vec![4, 3, 2, 1, 0]);
    }

    #[test]
    fn diameter_bound_of_path() {
        let g = path(7);
        let ub = g.diameter_upper_bound();
        assert!((6..=12).contains(&ub));
        assert_eq!(Graph::from_edges(3, &[]).diameter_upper_bound(), 0);
    }

    #[test]
    fn components_sorted() {
        let g = Graph::from_edges(5, &[(3, 4), (0, 2)]);
        assert_eq!(g.components(), vec![vec![0, 2], vec![1], vec![3, 4]]);
    }
}
