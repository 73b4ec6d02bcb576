//! Canonical labeling for small graphs.
//!
//! Individualization-refinement: colour refinement produces an ordered
//! partition that depends only on structure; the search branches on the first
//! non-singleton cell and keeps the lexicographically smallest adjacency string
//! seen at a discrete partition. Branches through twin vertices are skipped,
//! since swapping twins is an automorphism that fixes the partition.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest node count accepted by [`canonical_form`].
pub const MAX_CANON_NODES: usize = 10;

/// Permutation-invariant key of an isomorphism class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    pub key: Vec<u8>,
}

impl CanonicalForm {
    pub fn hex(&self) -> String {
        self.key.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A canonical form together with the relabeling that produced it:
/// `perm[v]` is the canonical position of node `v`.
#[derive(Debug, Clone)]
pub struct Labeling {
    pub form: CanonicalForm,
    pub perm: Vec<usize>,
}

pub fn canonical_form(g: &Graph) -> Result<CanonicalForm> {
    Ok(canonical_labeling(g)?.form)
}

pub fn canonical_labeling(g: &Graph) -> Result<Labeling> {
    g.require_unweighted("canonical_form")?;
    let n = g.n();
    if n > MAX_CANON_NODES {
        return Err(Error::SizeLimit(format!(
            "canonical form supports at most {MAX_CANON_NODES} nodes, got {n}"
        )));
    }
    let levels: Vec<u8> = g.as_slice().iter().map(|&v| v as u8).collect();
    let (cert, perm) = search(n, &levels);
    let mut key = Vec::with_capacity(9);
    key.push(n as u8);
    key.extend_from_slice(&pack_bits(&cert).to_be_bytes());
    Ok(Labeling {
        form: CanonicalForm { key },
        perm,
    })
}

/// Canonical key for a weighted graph whose entries are multiples of
/// `1 / resolution`.
pub fn weighted_canonical_form(g: &Graph, resolution: u32) -> Result<CanonicalForm> {
    let n = g.n();
    if n > MAX_CANON_NODES {
        return Err(Error::SizeLimit(format!(
            "canonical form supports at most {MAX_CANON_NODES} nodes, got {n}"
        )));
    }
    if resolution == 0 || resolution > 255 {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} outside 1..=255"
        )));
    }
    let r = resolution as f64;
    let mut levels = Vec::with_capacity(n * n);
    for &v in g.as_slice() {
        let scaled = v * r;
        let q = scaled.round();
        if (scaled - q).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "weight {v} is not on the 1/{resolution} grid"
            )));
        }
        levels.push(q as u8);
    }
    let (cert, _) = search(n, &levels);
    let mut key = Vec::with_capacity(cert.len() + 2);
    key.push(n as u8);
    key.push(resolution as u8);
    key.extend(cert);
    Ok(CanonicalForm { key })
}

pub fn isomorphic(g: &Graph, h: &Graph) -> Result<bool> {
    if g.n() != h.n() {
        return Err(Error::InvalidComparison(format!(
            "graphs have {} and {} nodes",
            g.n(),
            h.n()
        )));
    }
    Ok(canonical_form(g)? == canonical_form(h)?)
}

/// An explicit isomorphism `m` with `h.weight(m[u], m[v]) == g.weight(u, v)`.
pub fn find_isomorphism(g: &Graph, h: &Graph) -> Result<Option<Vec<usize>>> {
    if g.n() != h.n() {
        return Err(Error::InvalidComparison(format!(
            "graphs have {} and {} nodes",
            g.n(),
            h.n()
        )));
    }
    let lg = canonical_labeling(g)?;
    let lh = canonical_labeling(h)?;
    if lg.form != lh.form {
        return Ok(None);
    }
    let mut inv_h = vec![0; h.n()];
    for (v, &p) in lh.perm.iter().enumerate() {
        inv_h[p] = v;
    }
    Ok(Some(lg.perm.iter().map(|&p| inv_h[p]).collect()))
}

fn pack_bits(cert: &[u8]) -> u64 {
    cert.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b != 0))
}

struct Search<'a> {
    n: usize,
    levels: &'a [u8],
    best: Option<(Vec<u8>, Vec<usize>)>,
}

fn search(n: usize, levels: &[u8]) -> (Vec<u8>, Vec<usize>) {
    let mut s = Search {
        n,
        levels,
        best: None,
    };
    let start = refine(n, levels, vec![(0..n).collect()]);
    s.descend(start);
    s.best.expect("search visits at least one leaf")
}

impl Search<'_> {
    fn level(&self, u: usize, v: usize) -> u8 {
        self.levels[u * self.n + v]
    }

    fn twins(&self, u: usize, v: usize) -> bool {
        (0..self.n)
            .filter(|&x| x != u && x != v)
            .all(|x| self.level(u, x) == self.level(v, x))
    }

    fn descend(&mut self, part: Vec<Vec<usize>>) {
        let Some(ci) = part.iter().position(|c| c.len() > 1) else {
            self.leaf(&part);
            return;
        };
        let cell = part[ci].clone();
        let mut tried: Vec<usize> = Vec::new();
        for &v in &cell {
            if tried.iter().any(|&u| self.twins(u, v)) {
                continue;
            }
            tried.push(v);
            let mut next = part.clone();
            let rest: Vec<usize> = cell.iter().copied().filter(|&x| x != v).collect();
            next.splice(ci..=ci, [vec![v], rest]);
            let refined = refine(self.n, self.levels, next);
            self.descend(refined);
        }
    }

    fn leaf(&mut self, part: &[Vec<usize>]) {
        let n = self.n;
        let mut perm = vec![0; n];
        let mut order = vec![0; n];
        for (pos, cell) in part.iter().enumerate() {
            perm[cell[0]] = pos;
            order[pos] = cell[0];
        }
        let mut cert = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for a in 0..n {
            for b in a + 1..n {
                cert.push(self.level(order[a], order[b]));
            }
        }
        let better = match &self.best {
            None => true,
            Some((c, _)) => cert < *c,
        };
        if better {
            self.best = Some((cert, perm));
        }
    }
}

/// Colour refinement of an ordered partition. Each cell is split by the
/// per-cell multiset of link levels, and subcells are ordered by that signature.
fn refine(n: usize, levels: &[u8], mut part: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    loop {
        let mut cell_of = vec![0usize; n];
        for (c, cell) in part.iter().enumerate() {
            for &v in cell {
                cell_of[v] = c;
            }
        }
        let k = part.len();
        let signature = |v: usize| -> Vec<Vec<u8>> {
            let mut sig = vec![Vec::new(); k];
            for x in 0..n {
                let l = levels[v * n + x];
                if x != v && l > 0 {
                    sig[cell_of[x]].push(l);
                }
            }
            for s in sig.iter_mut() {
                s.sort_unstable();
            }
            sig
        };
        let mut next = Vec::with_capacity(n);
        let mut changed = false;
        for cell in &part {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut tagged: Vec<(Vec<Vec<u8>>, usize)> =
                cell.iter().map(|&v| (signature(v), v)).collect();
            tagged.sort();
            let mut start = 0;
            for idx in 1..=tagged.len() {
                if idx == tagged.len() || tagged[idx].0 != tagged[start].0 {
                    next.push(tagged[start..idx].iter().map(|t| t.1).collect());
                    start = idx;
                }
            }
            if tagged[0].0 != tagged[tagged.len() - 1].0 {
                changed = true;
            }
        }
        part = next;
        if !changed {
            return part;
        }
    }
}
