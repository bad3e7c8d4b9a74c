//! Distance-`d` colorings used to build probing vectors.
//!
//! A coloring is distance-`d` when any two distinct nodes at graph distance at
//! most `d` receive different colors. Colors are `0..num_colors`.

use crate::error::{Error, Result};
use crate::sparse::Graph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<usize>,
    num_colors: usize,
}

impl Coloring {
    /// Wraps an explicit color assignment.
    pub fn from_colors(colors: Vec<usize>) -> Self {
        let num_colors = colors.iter().map(|&c| c + 1).max().unwrap_or(0);
        Self { colors, num_colors }
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn color(&self, i: usize) -> usize {
        self.colors[i]
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    /// Node sets of each color class, nodes ascending.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.num_colors];
        for (i, &c) in self.colors.iter().enumerate() {
            classes[c].push(i);
        }
        classes
    }

    /// `(largest, smallest)` class sizes.
    pub fn class_size_range(&self) -> (usize, usize) {
        let sizes: Vec<usize> = self.classes().iter().map(Vec::len).collect();
        (
            sizes.iter().copied().max().unwrap_or(0),
            sizes.iter().copied().min().unwrap_or(0),
        )
    }
}

/// Nodes within distance `d` of `root` (excluding `root`), found by a depth
/// limited breadth-first search.
struct Ball {
    stamp: Vec<u32>,
    current: u32,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl Ball {
    fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            current: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    fn visit(&mut self, g: &Graph, root: usize, d: usize, mut f: impl FnMut(usize)) {
        self.current += 1;
        let cur = self.current;
        self.stamp[root] = cur;
        self.frontier.clear();
        self.frontier.push(root);
        for _ in 0..d {
            self.next.clear();
            for &u in &self.frontier {
                for &v in g.neighbors(u) {
                    if self.stamp[v] != cur {
                        self.stamp[v] = cur;
                        self.next.push(v);
                        f(v);
                    }
                }
            }
            if self.next.is_empty() {
                break;
            }
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
    }
}

/// Greedy distance-`d` coloring visiting nodes in `order`: each node takes the
/// smallest color not used by an already colored node within distance `d`.
/// Uses at most `maxdeg^d + 1` colors.
pub fn greedy_distance_coloring(g: &Graph, d: usize, order: &[usize]) -> Result<Coloring> {
    let n = g.n();
    check_order(n, order)?;
    if d == 0 {
        return Err(Error::Invalid("distance must be at least 1".into()));
    }
    let mut colors = vec![usize::MAX; n];
    let mut forbidden: Vec<usize> = Vec::new();
    let mut ball = Ball::new(n);
    let mut num_colors = 0;
    for (step, &i) in order.iter().enumerate() {
        let tag = step + 1;
        ball.visit(g, i, d, |v| {
            let c = colors[v];
            if c != usize::MAX {
                forbidden[c] = tag;
            }
        });
        let c = (0..num_colors).find(|&c| forbidden[c] != tag).unwrap_or(num_colors);
        if c == num_colors {
            num_colors += 1;
            forbidden.push(0);
        }
        colors[i] = c;
    }
    Ok(Coloring { colors, num_colors })
}

/// Same coloring as [`greedy_distance_coloring`] computed through the explicit
/// sparsity pattern of `(I + A)^d`, i.e. a distance-1 greedy coloring of the
/// `d`-th power graph.
pub fn greedy_distance_coloring_via_power(g: &Graph, d: usize, order: &[usize]) -> Result<Coloring> {
    let power = power_graph(g, d);
    greedy_distance_coloring(&power, 1, order)
}

/// Graph connecting nodes at distance `1..=d` in `g`.
pub fn power_graph(g: &Graph, d: usize) -> Graph {
    let n = g.n();
    // pattern of (I + A)^k built by repeated sparse products
    let mut reach: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut mark = vec![usize::MAX; n];
    for _ in 0..d {
        let mut next = Vec::with_capacity(n);
        for (i, row) in reach.iter().enumerate() {
            let mut out = Vec::new();
            for &k in row {
                for &j in std::iter::once(&k).chain(g.neighbors(k)) {
                    if mark[j] != i {
                        mark[j] = i;
                        out.push(j);
                    }
                }
            }
            out.sort_unstable();
            next.push(out);
        }
        mark.iter_mut().for_each(|m| *m = usize::MAX);
        reach = next;
    }
    let edges: Vec<(usize, usize)> = reach
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
        .collect();
    Graph::from_edges(n, &edges)
}

fn check_order(n: usize, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: order.len(),
        });
    }
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Invalid("order is not a permutation".into()));
        }
    }
    Ok(())
}

/// True when no two distinct nodes within distance `d` share a color.
pub fn validate_distance_coloring(g: &Graph, coloring: &Coloring, d: usize) -> bool {
    if coloring.colors.len() != g.n() {
        return false;
    }
    let mut ball = Ball::new(g.n());
    (0..g.n()).all(|i| {
        let mut ok = true;
        ball.visit(g, i, d, |v| ok &= coloring.colors[v] != coloring.colors[i]);
        ok
    })
}

/// Coloring `i -> i mod (d*beta + 1)` for a matrix of bandwidth `beta`; valid at
/// distance `d` since nodes within distance `d` differ in index by at most `d*beta`.
pub fn banded_coloring(n: usize, beta: usize, d: usize) -> Coloring {
    let m = d * beta + 1;
    Coloring::from_colors((0..n).map(|i| i % m).collect())
}

/// Number of colors of the lattice coloring of the 2D grid: `ceil((d+1)^2 / 2)`.
pub fn grid2d_color_count(d: usize) -> usize {
    ((d + 1) * (d + 1)).div_ceil(2)
}

/// Distance-`d` coloring of the `side x side` grid (node `(x, y)` has index
/// `y*side + x`) with `ceil((d+1)^2/2)` colors, of the form
/// `(x + s*y) mod m` for a multiplier `s` found by search.
pub fn grid2d_coloring(side: usize, d: usize) -> Result<Coloring> {
    let m = grid2d_color_count(d);
    let di = d as i64;
    let valid = |s: i64| {
        (-di..=di).all(|dy| {
            let rest = di - dy.abs();
            (-rest..=rest).all(|dx| (dx == 0 && dy == 0) || (dx + s * dy).rem_euclid(m as i64) != 0)
        })
    };
    let s = (0..m as i64)
        .find(|&s| valid(s))
        .ok_or_else(|| Error::Invalid(format!("no lattice coloring with {m} colors for d = {d}")))?;
    let colors = (0..side * side)
        .map(|i| {
            let (x, y) = ((i % side) as i64, (i / side) as i64);
            (x + s * y).rem_euclid(m as i64) as usize
        })
        .collect();
    let mut c = Coloring::from_colors(colors);
    c.num_colors = c.num_colors.max(if side * side >= m { m } else { c.num_colors });
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{grid2d, Ordering};

    #[test]
    fn grid_lattice_coloring_counts() {
        for d in 1..=8 {
            let side = 3 * d + 4;
            let g = grid2d::<f64>(side).graph();
            let c = grid2d_coloring(side, d).unwrap();
            assert_eq!(c.num_colors(), grid2d_color_count(d), "d = {d}");
            assert!(validate_distance_coloring(&g, &c, d), "d = {d}");
        }
    }

    #[test]
    fn banded_is_valid_for_path() {
        let g = Graph::from_edges(30, &(1..30).map(|i| (i - 1, i)).collect::<Vec<_>>());
        for d in 1..5 {
            let c = banded_coloring(30, 1, d);
            assert_eq!(c.num_colors(), d + 1);
            assert!(validate_distance_coloring(&g, &c, d));
        }
    }

    #[test]
    fn greedy_power_route_agrees() {
        let g = crate::sparse::barabasi_albert::<f64>(200, 2, 3).unwrap().graph();
        let order = Ordering::Degree.order(&g);
        for d in 1..4 {
            let a = greedy_distance_coloring(&g, d, &order).unwrap();
            let b = greedy_distance_coloring_via_power(&g, d, &order).unwrap();
            assert_eq!(a, b);
            assert!(validate_distance_coloring(&g, &a, d));
        }
    }
}
