//! Weighted directed communication graphs.
//!
//! An edge `(j, i)` means agent `i` receives information from agent `j`; its
//! weight is stored as `a_ij`, so row `i` of the adjacency matrix lists the
//! in-neighbors of `i`. Node indices are 0-based in this module; [`Edge`]
//! carries 1-based labels as they appear in config files.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge {0}: self-loop")]
    SelfLoop(Edge),
    #[error("edge {0}: duplicate edge")]
    Duplicate(Edge),
    #[error("edge {0}: weight must be finite and positive")]
    BadWeight(Edge),
    #[error("edge {edge}: node out of range 1..={n}")]
    OutOfRange { edge: Edge, n: usize },
}

/// A directed edge with 1-based endpoint labels; information flows `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(from: usize, to: usize, weight: f64) -> Self {
        Self { from, to, weight }
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({} -> {}, w={})", self.from, self.to, self.weight)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    n: usize,
    /// Row-major `a_ij`.
    weights: Vec<f64>,
}

impl DirectedGraph {
    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut weights = vec![0.0; n * n];
        for &e in edges {
            if e.from == 0 || e.to == 0 || e.from > n || e.to > n {
                return Err(GraphError::OutOfRange { edge: e, n });
            }
            if e.from == e.to {
                return Err(GraphError::SelfLoop(e));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(GraphError::BadWeight(e));
            }
            let slot = &mut weights[(e.to - 1) * n + (e.from - 1)];
            if *slot != 0.0 {
                return Err(GraphError::Duplicate(e));
            }
            *slot = e.weight;
        }
        Ok(Self { n, weights })
    }

    pub fn empty(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, &[])
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// `a_ij`: weight with which `i` receives from `j`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// In-neighbors `j` of `i` with their weights, in index order.
    pub fn in_neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights[i * self.n..(i + 1) * self.n]
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(j, &w)| (j, w))
    }

    pub fn out_neighbors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.weight(i, j) > 0.0)
    }

    /// Edges with 1-based labels, ordered by receiver then sender.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for (j, w) in self.in_neighbors(i) {
                out.push(Edge::new(j + 1, i + 1, w));
            }
        }
        out
    }

    pub fn adjacency(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn in_degree(&self, i: usize) -> f64 {
        self.in_neighbors(i).map(|(_, w)| w).sum()
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.in_degree(i)).collect()
    }

    /// Degree vector `d` and Laplacian `L = D - A`.
    pub fn degree_and_laplacian(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let d = self.degrees();
        let mut l = self.adjacency();
        for (i, row) in l.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v = -*v;
            }
            row[i] += d[i];
        }
        (d, l)
    }

    /// Nodes reachable from `start` along edge direction, including `start`.
    pub fn reachable_set(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for v in self.out_neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        (0..self.n).filter(|&k| seen[k]).collect()
    }

    /// Subgraph induced on `nodes` (sorted), reindexed in that order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Option<DirectedGraph> {
        if nodes.is_empty() {
            return None;
        }
        let m = nodes.len();
        let mut weights = vec![0.0; m * m];
        for (a, &i) in nodes.iter().enumerate() {
            for (b, &j) in nodes.iter().enumerate() {
                weights[a * m + b] = self.weight(i, j);
            }
        }
        Some(DirectedGraph { n: m, weights })
    }

    pub fn root_analysis(&self) -> RootAnalysis {
        let roots: Vec<usize> = (0..self.n)
            .filter(|&i| self.reachable_set(i).len() == self.n)
            .collect();
        let non_roots = (0..self.n).filter(|i| !roots.contains(i)).collect();
        let root_subgraph = self.induced_subgraph(&roots);
        RootAnalysis {
            roots,
            non_roots,
            root_subgraph,
        }
    }

    pub fn is_quasi_strongly_connected(&self) -> bool {
        (0..self.n).any(|i| self.reachable_set(i).len() == self.n)
    }

    pub fn is_strongly_connected(&self) -> bool {
        (0..self.n).all(|i| self.reachable_set(i).len() == self.n)
    }
}

/// Root / non-root partition and the subgraph induced on the roots.
#[derive(Debug, Clone, PartialEq)]
pub struct RootAnalysis {
    pub roots: Vec<usize>,
    pub non_roots: Vec<usize>,
    /// `None` when there are no roots.
    pub root_subgraph: Option<DirectedGraph>,
}

impl RootAnalysis {
    pub fn is_root(&self, i: usize) -> bool {
        self.roots.binary_search(&i).is_ok()
    }

    pub fn all_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.roots.iter().chain(&self.non_roots).copied().collect();
        v.sort_unstable();
        v
    }
}
