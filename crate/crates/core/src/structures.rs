//! Nested split graphs, quasi-complete and quasi-star constructions.

use std::collections::HashSet;

use crate::canon::{canonical_form, MAX_CANON_NODES};
use crate::error::{Error, Result};
use crate::graph::{Graph, LinkEdit, WEIGHT_TOLERANCE};

/// Witness for (or against) nestedness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NsgCertificate {
    /// Nodes by degree descending, ties by index.
    Nested { ordering: Vec<usize> },
    /// First pair `i < j` whose neighbourhoods are not nested.
    Violation { i: usize, j: usize },
}

impl NsgCertificate {
    pub fn is_nsg(&self) -> bool {
        matches!(self, NsgCertificate::Nested { .. })
    }

    pub fn violating_pair(&self) -> Option<(usize, usize)> {
        match self {
            NsgCertificate::Violation { i, j } => Some((*i, *j)),
            NsgCertificate::Nested { .. } => None,
        }
    }
}

/// Quasi-complete structure of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QcDecomposition {
    pub p: usize,
    pub overflow: usize,
    /// Clique members in construction order; the first `overflow` are linked to the spoke.
    pub clique_nodes: Vec<usize>,
    pub spoke_node: Option<usize>,
    /// `labels[v]` is the node of the input playing the role of node `v` in
    /// [`quasi_complete`]`(n, t)`.
    pub labels: Vec<usize>,
}

impl QcDecomposition {
    pub fn p_bar(&self) -> usize {
        self.p * (self.p - 1) / 2
    }
}

fn degree_order(g: &Graph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.n()).collect();
    let deg = g.degrees();
    order.sort_by(|&a, &b| deg[b].total_cmp(&deg[a]).then(a.cmp(&b)));
    order
}

pub fn is_nsg(g: &Graph) -> NsgCertificate {
    debug_assert!(g.is_unweighted());
    let bits = g.adjacency_bits();
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            let a = bits[i] & !(1 << j);
            let b = bits[j] & !(1 << i);
            if a & b != a && a & b != b {
                return NsgCertificate::Violation { i, j };
            }
        }
    }
    NsgCertificate::Nested {
        ordering: degree_order(g),
    }
}

/// Pairwise row domination outside the mutual entries, with tolerance.
pub fn is_weighted_nsg(g: &Graph) -> NsgCertificate {
    let n = g.n();
    for i in 0..n {
        for j in i + 1..n {
            let mut ge = true;
            let mut le = true;
            for k in (0..n).filter(|&k| k != i && k != j) {
                let d = g.weight(i, k) - g.weight(j, k);
                if d < -WEIGHT_TOLERANCE {
                    ge = false;
                }
                if d > WEIGHT_TOLERANCE {
                    le = false;
                }
            }
            if !ge && !le {
                return NsgCertificate::Violation { i, j };
            }
        }
    }
    NsgCertificate::Nested {
        ordering: degree_order(g),
    }
}

fn check_budget(n: usize, t: usize) -> Result<()> {
    let cap = n * (n - 1) / 2;
    if t > cap {
        return Err(Error::InvalidBudget(format!(
            "{t} links exceed the {cap} available on {n} nodes"
        )));
    }
    Ok(())
}

/// Clique size `p` with `p(p-1)/2 <= t < p(p+1)/2`.
pub fn qc_clique_size(t: usize) -> usize {
    let mut p = 1;
    while (p + 1) * p / 2 <= t {
        p += 1;
    }
    p
}

/// Clique on nodes `0..p` plus node `p` linked to nodes `0..t - p(p-1)/2`.
pub fn quasi_complete(n: usize, t: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidSize("a graph needs at least one node".into()));
    }
    check_budget(n, t)?;
    let p = qc_clique_size(t);
    let overflow = t - p * (p - 1) / 2;
    let mut edges = Vec::with_capacity(t);
    for i in 0..p {
        for j in i + 1..p {
            edges.push((i, j));
        }
    }
    for i in 0..overflow {
        edges.push((i, p));
    }
    Graph::from_edges(n, &edges)
}

/// Hub 0 linked to everyone, then hub 1 to nodes 2, 3, ..., and so on.
pub fn quasi_star(n: usize, t: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidSize("a graph needs at least one node".into()));
    }
    check_budget(n, t)?;
    let mut edges = Vec::with_capacity(t);
    'fill: for h in 0..n {
        for j in h + 1..n {
            if edges.len() == t {
                break 'fill;
            }
            edges.push((h, j));
        }
    }
    Graph::from_edges(n, &edges)
}

/// Isomorphism between two nested split graphs, if one exists.
///
/// Nested split graphs are determined by their degree sequence, and nodes of
/// equal degree are twins, so matching nodes in degree order is enough.
/// Returns `m` with `h == g.permuted(&m)`.
pub fn nsg_isomorphism(g: &Graph, h: &Graph) -> Option<Vec<usize>> {
    if g.n() != h.n() || !is_nsg(g).is_nsg() || !is_nsg(h).is_nsg() {
        return None;
    }
    let og = degree_order(g);
    let oh = degree_order(h);
    let mut m = vec![0; g.n()];
    for (a, b) in og.iter().zip(&oh) {
        m[*a] = *b;
    }
    if g.permuted(&m).as_slice() == h.as_slice() {
        Some(m)
    } else {
        None
    }
}

pub fn is_quasi_complete(g: &Graph) -> Option<QcDecomposition> {
    if !g.is_unweighted() {
        return None;
    }
    let n = g.n();
    let t = g.link_count();
    let qc = quasi_complete(n, t).ok()?;
    // m maps g onto qc; invert to get the labels.
    let m = nsg_isomorphism(g, &qc)?;
    let mut labels = vec![0; n];
    for (v, &q) in m.iter().enumerate() {
        labels[q] = v;
    }
    let p = qc_clique_size(t);
    let overflow = t - p * (p - 1) / 2;
    Some(QcDecomposition {
        p,
        overflow,
        clique_nodes: labels[..p.min(n)].to_vec(),
        spoke_node: (p < n).then(|| labels[p]),
        labels,
    })
}

/// Key identifying the isomorphism class of a nested split graph.
fn nsg_class_key(g: &Graph) -> Result<Vec<u8>> {
    if g.n() <= MAX_CANON_NODES {
        Ok(canonical_form(g)?.key)
    } else {
        let mut d: Vec<u8> = g.degrees().iter().map(|&x| x as u8).collect();
        d.sort_unstable_by(|a, b| b.cmp(a));
        Ok(d)
    }
}

/// One representative per isomorphism class of NSGs with `t` links, built from
/// creation sequences (each new node isolated or dominating). Sorted by
/// degree sequence, descending.
pub fn enumerate_nsg(n: usize, t: usize) -> Result<Vec<Graph>> {
    if n == 0 {
        return Err(Error::InvalidSize("a graph needs at least one node".into()));
    }
    if n > MAX_CANON_NODES {
        return Err(Error::SizeLimit(format!(
            "enumeration supports at most {MAX_CANON_NODES} nodes, got {n}"
        )));
    }
    check_budget(n, t)?;
    let mut seen = HashSet::new();
    let mut out: Vec<(Vec<u32>, Graph)> = Vec::new();
    // Bit k-1 of `mask` set: node k dominates nodes 0..k.
    for mask in 0u32..(1 << (n - 1)) {
        let links: usize = (1..n).filter(|k| mask >> (k - 1) & 1 == 1).sum();
        if links != t {
            continue;
        }
        let mut edges = Vec::with_capacity(t);
        for k in 1..n {
            if mask >> (k - 1) & 1 == 1 {
                edges.extend((0..k).map(|j| (j, k)));
            }
        }
        let g = Graph::from_edges(n, &edges)?;
        if seen.insert(canonical_form(&g)?) {
            let mut d: Vec<u32> = g.degrees().iter().map(|&x| x as u32).collect();
            d.sort_unstable_by(|a, b| b.cmp(a));
            out.push((d, g));
        }
    }
    out.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(out.into_iter().map(|(_, g)| g).collect())
}

/// NSG successors of an NSG, one per isomorphism class, in the order of the
/// first open pair producing each class.
pub fn nsg_successors(g: &Graph) -> Result<Vec<Graph>> {
    g.require_unweighted("nsg_successors")?;
    if !is_nsg(g).is_nsg() {
        return Err(Error::InvalidInput("input is not a nested split graph".into()));
    }
    nsg_successor_edits(g).map(|v| v.into_iter().map(|(_, h)| h).collect())
}

/// Like [`nsg_successors`], with the first edit producing each class.
pub fn nsg_successor_edits(g: &Graph) -> Result<Vec<(LinkEdit, Graph)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for e in g.open_pairs() {
        let h = g.add_link(e)?;
        if is_nsg(&h).is_nsg() && seen.insert(nsg_class_key(&h)?) {
            out.push((e, h));
        }
    }
    Ok(out)
}
