//! Dense symmetric graphs and the one-link succession relation.
//!
//! Graphs are immutable values: every edit returns a new graph. Indices are
//! 0-based here and 1-based in anything shown to a user.

use std::fmt;

use crate::error::{Error, Result};

/// Entries within this distance of 0 or 1 are snapped when a matrix is loaded.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Hard ceiling on node count for the dense representation.
pub const MAX_NODES: usize = 64;

/// Undirected graph stored as a dense `n x n` matrix of weights in `[0, 1]`.
#[derive(Clone)]
pub struct Graph {
    n: usize,
    w: Vec<f64>,
}

/// An unordered pair of distinct nodes; stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkEdit {
    pub i: usize,
    pub j: usize,
}

impl LinkEdit {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::InvalidEdit(format!("self-loop at node {}", i + 1)));
        }
        Ok(LinkEdit {
            i: i.min(j),
            j: i.max(j),
        })
    }

    pub fn touches(&self, v: usize) -> bool {
        self.i == v || self.j == v
    }

    /// The endpoint that is not `v`, if `v` is an endpoint.
    pub fn other(&self, v: usize) -> Option<usize> {
        if self.i == v {
            Some(self.j)
        } else if self.j == v {
            Some(self.i)
        } else {
            None
        }
    }
}

impl fmt::Display for LinkEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i + 1, self.j + 1)
    }
}

impl Graph {
    /// The empty graph on `n` nodes.
    pub fn new_empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("a graph needs at least one node".into()));
        }
        if n > MAX_NODES {
            return Err(Error::InvalidSize(format!(
                "{n} nodes exceeds the dense limit of {MAX_NODES}"
            )));
        }
        Ok(Graph {
            n,
            w: vec![0.0; n * n],
        })
    }

    /// Unweighted graph from 0-based edge pairs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new_empty(n)?;
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidEdit(format!(
                    "edge ({}, {}) out of range for {n} nodes",
                    i + 1,
                    j + 1
                )));
            }
            g = g.add_link(LinkEdit::new(i, j)?)?;
        }
        Ok(g)
    }

    /// Build from a row-major matrix, validating symmetry, the zero diagonal and
    /// the `[0, 1]` range. Values within [`WEIGHT_TOLERANCE`] of a bound are clamped.
    pub fn from_matrix(n: usize, mut w: Vec<f64>) -> Result<Self> {
        Graph::new_empty(n)?;
        if w.len() != n * n {
            return Err(Error::InvalidSize(format!(
                "expected {} entries, got {}",
                n * n,
                w.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = w[i * n + j];
                if !v.is_finite() || v < -WEIGHT_TOLERANCE || v > 1.0 + WEIGHT_TOLERANCE {
                    return Err(Error::InvalidInput(format!(
                        "entry ({}, {}) = {v} outside [0, 1]",
                        i + 1,
                        j + 1
                    )));
                }
                if (v - w[j * n + i]).abs() > WEIGHT_TOLERANCE {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if i == j && v.abs() > WEIGHT_TOLERANCE {
                    return Err(Error::InvalidInput(format!(
                        "non-zero diagonal at node {}",
                        i + 1
                    )));
                }
            }
        }
        for v in w.iter_mut() {
            *v = snap(*v);
        }
        for i in 0..n {
            w[i * n + i] = 0.0;
            for j in 0..i {
                w[i * n + j] = w[j * n + i];
            }
        }
        Ok(Graph { n, w })
    }

    /// The complete graph on `n` nodes.
    pub fn complete(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Graph::from_edges(n, &edges)
    }

    /// Star with `center` linked to every node in `leaves`.
    pub fn star(n: usize, center: usize, leaves: &[usize]) -> Result<Self> {
        let edges: Vec<_> = leaves.iter().map(|&l| (center, l)).collect();
        Graph::from_edges(n, &edges)
    }

    /// Path through the nodes in the given order.
    pub fn path(n: usize, order: &[usize]) -> Result<Self> {
        let edges: Vec<_> = order.windows(2).map(|w| (w[0], w[1])).collect();
        Graph::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    /// Row-major view of the whole matrix.
    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn is_unweighted(&self) -> bool {
        self.w.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn has_link(&self, i: usize, j: usize) -> bool {
        self.weight(i, j) > 0.0
    }

    /// Sum of the upper triangle; the link count for unweighted graphs.
    pub fn total_weight(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i)[i + 1..].iter().sum::<f64>())
            .sum()
    }

    /// Number of links; entries strictly between 0 and 1 are not counted.
    pub fn link_count(&self) -> usize {
        (0..self.n)
            .map(|i| self.row(i)[i + 1..].iter().filter(|&&v| v == 1.0).count())
            .sum()
    }

    /// Weighted degree (row sum).
    pub fn degree(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees().into_iter().fold(0.0, f64::max)
    }

    /// Nodes with positive weight to `i`, ascending.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.has_link(i, j)).collect()
    }

    /// Adjacency bit rows; bit `j` of row `i` is set when `i` and `j` are linked.
    pub fn adjacency_bits(&self) -> Vec<u64> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .filter(|&j| self.has_link(i, j))
                    .fold(0u64, |acc, j| acc | (1 << j))
            })
            .collect()
    }

    /// All unlinked pairs `i < j`, in lexicographic order.
    pub fn open_pairs(&self) -> Vec<LinkEdit> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.weight(i, j) == 0.0 {
                    out.push(LinkEdit { i, j });
                }
            }
        }
        out
    }

    /// `G + E_ij`. Requires an unweighted graph and an open pair.
    pub fn add_link(&self, e: LinkEdit) -> Result<Graph> {
        if e.i == e.j {
            return Err(Error::InvalidEdit(format!("self-loop at node {}", e.i + 1)));
        }
        if e.i >= self.n || e.j >= self.n {
            return Err(Error::InvalidEdit(format!(
                "edit {e} out of range for {} nodes",
                self.n
            )));
        }
        if self.weight(e.i, e.j) != 0.0 {
            return Err(Error::OccupiedLink(e.i + 1, e.j + 1));
        }
        Ok(self.with_weight(e.i, e.j, 1.0))
    }

    /// Copy with the symmetric entry `(i, j)` set to `v`.
    pub fn with_weight(&self, i: usize, j: usize, v: f64) -> Graph {
        debug_assert!(i != j);
        let mut w = self.w.clone();
        w[i * self.n + j] = v;
        w[j * self.n + i] = v;
        Graph { n: self.n, w }
    }

    /// Every graph that succeeds `self` by one new link.
    pub fn successors(&self) -> Result<Vec<Graph>> {
        self.require_unweighted("successors")?;
        Ok(self
            .open_pairs()
            .into_iter()
            .map(|e| self.with_weight(e.i, e.j, 1.0))
            .collect())
    }

    /// Relabel: node `v` of `self` becomes node `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let n = self.n;
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[perm[i] * n + perm[j]] = self.w[i * n + j];
            }
        }
        Graph { n, w }
    }

    /// `G x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Entrywise comparison with absolute tolerance.
    pub fn approx_eq(&self, other: &Graph, tol: f64) -> bool {
        self.n == other.n
            && self
                .w
                .iter()
                .zip(&other.w)
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Link pairs (or positive-weight pairs) `i < j`.
    pub fn edges(&self) -> Vec<(LinkEdit, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let v = self.weight(i, j);
                if v > 0.0 {
                    out.push((LinkEdit { i, j }, v));
                }
            }
        }
        out
    }

    pub(crate) fn require_unweighted(&self, op: &str) -> Result<()> {
        if self.is_unweighted() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("{op} requires an unweighted graph")))
        }
    }
}

fn snap(v: f64) -> f64 {
    if v.abs() <= WEIGHT_TOLERANCE {
        0.0
    } else if (v - 1.0).abs() <= WEIGHT_TOLERANCE {
        1.0
    } else {
        v
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, WEIGHT_TOLERANCE)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unweighted() {
            let edges: Vec<String> = self.edges().iter().map(|(e, _)| e.to_string()).collect();
            write!(f, "Graph(n={}, [{}])", self.n, edges.join(" "))
        } else {
            let edges: Vec<String> = self
                .edges()
                .iter()
                .map(|(e, v)| format!("{e}:{v}"))
                .collect();
            write!(f, "Graph(n={}, [{}])", self.n, edges.join(" "))
        }
    }
}
