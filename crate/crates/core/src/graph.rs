//! Undirected, unweighted communication graphs and their Laplacians.
//!
//! Nodes are numbered `1..=n` at the API boundary, matching how agents are
//! named in configuration files.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linops::{sym_eigenvalues, Mat};
use crate::{Error, Result};

/// Undirected graph on nodes `1..=n` with no self-loops or repeated edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommGraph {
    n: usize,
    /// Normalized `(min, max)` pairs, sorted, 1-based.
    edges: Vec<(usize, usize)>,
}

impl CommGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            for node in [i, j] {
                if node == 0 || node > n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if i == j {
                return Err(Error::Invalid {
                    field: "graph",
                    reason: format!("self-loop at node {i}"),
                });
            }
            norm.push((i.min(j), i.max(j)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Invalid {
                field: "graph",
                reason: format!("duplicate edge ({}, {})", w[0].0, w[0].1),
            });
        }
        Ok(CommGraph { n, edges: norm })
    }

    /// Recovers the graph from an unweighted Laplacian `H − W`.
    pub fn from_laplacian(l: &Mat) -> Result<Self> {
        let n = l.rows();
        if !l.is_square() || l.asymmetry() != 0.0 {
            return Err(Error::Invalid {
                field: "laplacian",
                reason: "not square and symmetric".into(),
            });
        }
        let mut edges = Vec::new();
        for i in 0..n {
            let mut degree = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                match l[(i, j)] {
                    0.0 => {}
                    -1.0 => {
                        degree += 1.0;
                        if i < j {
                            edges.push((i + 1, j + 1));
                        }
                    }
                    x => {
                        return Err(Error::Invalid {
                            field: "laplacian",
                            reason: format!(
                                "off-diagonal entry ({}, {}) = {x} is not 0 or -1",
                                i + 1,
                                j + 1
                            ),
                        })
                    }
                }
            }
            if l[(i, i)] != degree {
                return Err(Error::Invalid {
                    field: "laplacian",
                    reason: format!("diagonal entry {} is not the degree {degree}", i + 1),
                });
            }
        }
        CommGraph::new(n, &edges)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (1..=n)
            .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
            .collect();
        CommGraph { n, edges }
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        CommGraph { n, edges }
    }

    pub fn edgeless(n: usize) -> Self {
        CommGraph {
            n,
            edges: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `W` with `[W]_ij = 1` iff `(i, j)` is an edge.
    pub fn adjacency(&self) -> Mat {
        let mut w = Mat::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            w[(i - 1, j - 1)] = 1.0;
            w[(j - 1, i - 1)] = 1.0;
        }
        w
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i - 1] += 1;
            deg[j - 1] += 1;
        }
        deg
    }

    /// `L = H − W`. Entries are small integers, so `L·1 = 0` holds exactly.
    pub fn laplacian(&self) -> Mat {
        let mut l = self.adjacency().scale(-1.0);
        for (i, d) in self.degrees().into_iter().enumerate() {
            l[(i, i)] = d as f64;
        }
        l
    }

    /// `{j : (i, j) ∈ E}`, sorted, 1-based.
    pub fn neighbor_set(&self, i: usize) -> Result<Vec<usize>> {
        if i == 0 || i > self.n {
            return Err(Error::NodeOutOfRange { node: i, n: self.n });
        }
        Ok(self
            .edges
            .iter()
            .filter_map(|&(a, b)| match (a == i, b == i) {
                (true, _) => Some(b),
                (_, true) => Some(a),
                _ => None,
            })
            .collect::<alloc::collections::BTreeSet<_>>()
            .into_iter()
            .collect())
    }

    /// Breadth-first search from node 1. The one-node graph is connected;
    /// the empty graph is not.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i - 1].push(j - 1);
            adj[j - 1].push(i - 1);
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Second-smallest Laplacian eigenvalue (0 for `n < 2`).
    pub fn algebraic_connectivity(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let ev = sym_eigenvalues(&self.laplacian()).expect("Laplacian is symmetric");
        ev[1]
    }
}
