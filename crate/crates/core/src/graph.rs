//! Weighted undirected graphs, their Laplacians, and vertex partitions.
//!
//! Storage is dense: every graph keeps its full symmetric weight matrix.
//! Target sizes are a few hundred vertices at most.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Weighted undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    weights: Matrix,
    name: Option<String>,
}

impl Graph {
    /// Builds a graph from an explicit edge list. Duplicate edges, self-loops,
    /// out-of-range endpoints, and negative or non-finite weights are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one vertex".into()));
        }
        let mut weights = Matrix::zeros(n, n);
        let mut seen = vec![false; n * n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {i}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidGraph(format!("edge ({i}, {j}) has invalid weight {w}")));
            }
            let (a, b) = (i.min(j), i.max(j));
            if seen[a * n + b] {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            seen[a * n + b] = true;
            weights[(a, b)] = w;
            weights[(b, a)] = w;
        }
        Ok(Graph { weights, name: None })
    }

    /// Unit-weight graph from endpoint pairs.
    pub fn from_unit_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let weighted: Vec<_> = edges.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        Self::from_edges(n, &weighted)
    }

    /// Builds a graph from a weight matrix, checking the graph invariants.
    pub fn from_weights(weights: Matrix) -> Result<Self> {
        if !weights.is_square() || weights.rows() == 0 {
            return Err(Error::InvalidGraph("weight matrix must be square and non-empty".into()));
        }
        let n = weights.rows();
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!("nonzero diagonal at vertex {i}")));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidGraph(format!("invalid weight {w} at ({i}, {j})")));
                }
                if w != weights[(j, i)] {
                    return Err(Error::InvalidGraph(format!("asymmetric weights at ({i}, {j})")));
                }
            }
        }
        Ok(Graph { weights, name: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn n(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Edges `(i, j, w)` with `i < j` and `w > 0`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| {
            (i + 1..n).filter_map(move |j| {
                let w = self.weights[(i, j)];
                (w > 0.0).then_some((i, j, w))
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Sum of edge weights; equals the edge count for unweighted graphs.
    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// True when every edge has weight exactly one.
    pub fn is_unweighted(&self) -> bool {
        self.edges().all(|(_, _, w)| w == 1.0)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.weights.row(v).iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(u, _)| u)
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.weights.row(v).iter().sum()
    }

    /// Common weighted degree if all vertices share it.
    pub fn regular_degree(&self) -> Option<f64> {
        let d0 = self.degree(0);
        (1..self.n()).all(|v| (self.degree(v) - d0).abs() <= 1e-12).then_some(d0)
    }

    pub fn laplacian(&self) -> LaplacianView {
        laplacian(self)
    }

    /// Copy of the graph with edge `{i, j}` removed.
    pub fn without_edge(&self, i: usize, j: usize) -> Result<Graph> {
        if i >= self.n() || j >= self.n() || self.weights[(i, j)] == 0.0 {
            return Err(Error::InvalidParameter(format!("no edge ({i}, {j}) to remove")));
        }
        let mut weights = self.weights.clone();
        weights[(i, j)] = 0.0;
        weights[(j, i)] = 0.0;
        Ok(Graph { weights, name: self.name.as_ref().map(|s| format!("{s}-minus-edge")) })
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let (a, b) = (self.n(), other.n());
        let weights = Matrix::from_fn(a + b, a + b, |i, j| match (i < a, j < a) {
            (true, true) => self.weights[(i, j)],
            (false, false) => other.weights[(i - a, j - a)],
            _ => 0.0,
        });
        Graph { weights, name: None }
    }

    /// Subgraph induced by `vertices` (in the given order).
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let m = vertices.len();
        let weights = Matrix::from_fn(m, m, |i, j| self.weights[(vertices[i], vertices[j])]);
        Graph { weights, name: None }
    }
}

/// The Laplacian `Diag(A u) - A` together with the total weighted degree.
#[derive(Clone, Debug)]
pub struct LaplacianView {
    pub matrix: Matrix,
    /// Sum of all entries of `A`; `2|E|` for unit weights.
    pub degree_sum: f64,
}

pub fn laplacian(g: &Graph) -> LaplacianView {
    let n = g.n();
    let mut matrix = g.weights().scaled(-1.0);
    let mut degree_sum = 0.0;
    for i in 0..n {
        let d = g.degree(i);
        // Row sums vanish exactly: the diagonal is the negated sum of the row.
        matrix[(i, i)] = -matrix.row(i).iter().sum::<f64>();
        degree_sum += d;
    }
    LaplacianView { matrix, degree_sum }
}

/// Assignment of each vertex to one of at most `k` parts (parts may be empty).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("partition needs k >= 1".into()));
        }
        if let Some((v, p)) = assignment.iter().enumerate().find(|(_, p)| **p >= k) {
            return Err(Error::InvalidParameter(format!("vertex {v} assigned to part {p} >= k = {k}")));
        }
        Ok(Partition { assignment, k })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &p in &self.assignment {
            sizes[p] += 1;
        }
        sizes
    }

    /// n × k 0/1 incidence matrix whose columns indicate the parts.
    pub fn incidence(&self) -> Matrix {
        let mut x = Matrix::zeros(self.assignment.len(), self.k);
        for (v, &p) in self.assignment.iter().enumerate() {
            x[(v, p)] = 1.0;
        }
        x
    }

    /// The partition matrix `X Xᵀ`: 1 where two vertices share a part.
    pub fn gram(&self) -> Matrix {
        let n = self.assignment.len();
        Matrix::from_fn(n, n, |i, j| f64::from(u8::from(self.assignment[i] == self.assignment[j])))
    }

    /// Relabels parts in order of first appearance (vertex 0 lands in part 0).
    pub fn canonical(&self) -> Partition {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let assignment = self
            .assignment
            .iter()
            .map(|&p| {
                if map[p] == usize::MAX {
                    map[p] = next;
                    next += 1;
                }
                map[p]
            })
            .collect();
        Partition { assignment, k: self.k }
    }
}

/// Total weight of edges whose endpoints lie in different parts.
pub fn cut_weight(g: &Graph, p: &Partition) -> Result<f64> {
    if p.len() != g.n() {
        return Err(Error::Dimension { expected: g.n(), got: p.len() });
    }
    let a = p.assignment();
    Ok(g.edges().filter(|&(i, j, _)| a[i] != a[j]).map(|(_, _, w)| w).sum())
}

/// A connected component as an induced subgraph plus the original vertex ids.
#[derive(Clone, Debug)]
pub struct Component {
    pub graph: Graph,
    pub vertices: Vec<usize>,
}

pub fn connected_components(g: &Graph) -> Vec<Component> {
    let n = g.n();
    let mut label = vec![usize::MAX; n];
    let mut components = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut stack = vec![start];
        let mut vertices = Vec::new();
        label[start] = id;
        while let Some(v) = stack.pop() {
            vertices.push(v);
            for u in g.neighbors(v) {
                if label[u] == usize::MAX {
                    label[u] = id;
                    stack.push(u);
                }
            }
        }
        vertices.sort_unstable();
        components.push(vertices);
    }
    components.into_iter().map(|vertices| Component { graph: g.induced(&vertices), vertices }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_unit_edges(n, &edges).unwrap()
    }

    #[test]
    fn laplacian_of_single_edge() {
        let g = Graph::from_unit_edges(2, &[(0, 1)]).unwrap();
        let l = laplacian(&g);
        assert_eq!(l.matrix, Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]));
        assert_eq!(l.degree_sum, 2.0);
    }

    #[test]
    fn laplacian_of_edgeless_graph_is_zero() {
        let g = Graph::from_unit_edges(3, &[]).unwrap();
        assert_eq!(laplacian(&g).matrix, Matrix::zeros(3, 3));
    }

    #[test]
    fn laplacian_of_pentagon() {
        let l = laplacian(&cycle(5));
        for i in 0..5 {
            assert_eq!(l.matrix[(i, i)], 2.0);
            assert_eq!(l.matrix.row(i).iter().sum::<f64>(), 0.0);
        }
        assert_eq!(l.degree_sum, 10.0);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_unit_edges(3, &[(1, 1)]).is_err());
        assert!(Graph::from_unit_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_unit_edges(3, &[(0, 3)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1, -1.0)]).is_err());
        assert!(Graph::from_unit_edges(0, &[]).is_err());
    }

    #[test]
    fn cut_weight_examples() {
        let k4 = Graph::from_unit_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let p = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        assert_eq!(cut_weight(&k4, &p).unwrap(), 4.0);
        let one = Partition::new(vec![0; 4], 3).unwrap();
        assert_eq!(cut_weight(&k4, &one).unwrap(), 0.0);
        let short = Partition::new(vec![0; 3], 2).unwrap();
        assert!(matches!(cut_weight(&k4, &short), Err(Error::Dimension { expected: 4, got: 3 })));
    }

    #[test]
    fn partition_validation_and_canonical_form() {
        assert!(Partition::new(vec![0, 2], 2).is_err());
        let p = Partition::new(vec![2, 0, 2, 1], 3).unwrap();
        assert_eq!(p.canonical().assignment(), &[0, 1, 0, 2]);
        assert_eq!(p.part_sizes(), vec![1, 1, 2]);
    }

    #[test]
    fn components() {
        let tri = cycle(3);
        let two = tri.disjoint_union(&tri);
        let comps = connected_components(&two);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.graph.n() == 3 && c.graph.edge_count() == 3));
        assert_eq!(comps[1].vertices, vec![3, 4, 5]);

        let c5 = cycle(5);
        let comps = connected_components(&c5);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].graph, c5);

        let empty = Graph::from_unit_edges(4, &[]).unwrap();
        let comps = connected_components(&empty);
        assert_eq!(comps.len(), 4);
        assert!(comps.iter().all(|c| c.graph.n() == 1));
    }
}
