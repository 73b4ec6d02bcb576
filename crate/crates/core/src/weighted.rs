//! Weighted succession: one unit of weight per period spread over at most
//! two pairs on a grid, the `G[α]` family over a quasi-complete base, and the
//! extreme-point perturbation of weighted paths.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::canon::weighted_canonical_form;
use crate::error::{Error, Result};
use crate::graph::{Graph, LinkEdit, WEIGHT_TOLERANCE};
use crate::metrics::{aggregate_kb, aggregate_kb_squared};
use crate::planner::{DiscountSchedule, FormationPath};
use crate::structures::is_quasi_complete;

fn place(g: &Graph, e: LinkEdit, amount: f64) -> Graph {
    let mut v = g.weight(e.i, e.j) + amount;
    if (v - 1.0).abs() <= WEIGHT_TOLERANCE {
        v = 1.0;
    }
    g.with_weight(e.i, e.j, v)
}

fn all_pairs(n: usize) -> Vec<LinkEdit> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| LinkEdit { i, j }))
        .collect()
}

/// Every way of adding one unit of weight to a single pair, or splitting it
/// `(m/r, 1 - m/r)` over two pairs, that fits under the unit capacity.
pub fn weighted_successors_grid(g: &Graph, resolution: u32) -> Result<Vec<Graph>> {
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be at least 1".into()));
    }
    let r = resolution as f64;
    let pairs = all_pairs(g.n());
    let cap: Vec<f64> = pairs.iter().map(|e| 1.0 - g.weight(e.i, e.j)).collect();
    let mut out = Vec::new();
    for (a, e) in pairs.iter().enumerate() {
        if cap[a] >= 1.0 - WEIGHT_TOLERANCE {
            out.push(place(g, *e, 1.0));
        }
    }
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            for m in 1..resolution {
                let x = m as f64 / r;
                let y = (resolution - m) as f64 / r;
                if x <= cap[a] + WEIGHT_TOLERANCE && y <= cap[b] + WEIGHT_TOLERANCE {
                    out.push(place(&place(g, pairs[a], x), pairs[b], y));
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Saturation(
            "no room for another unit of weight".into(),
        ));
    }
    Ok(out)
}

/// The two pairs of the `G[α]` family in the base's own labels:
/// `(clique extension, new spoke)`.
pub fn alpha_pairs(base: &Graph) -> Result<(LinkEdit, LinkEdit)> {
    let d = is_quasi_complete(base)
        .ok_or_else(|| Error::InvalidBase("base is not quasi-complete".into()))?;
    if d.overflow == 0 {
        return Err(Error::InvalidBase(
            "a complete-clique base has a single NSG successor class".into(),
        ));
    }
    if d.p + 2 > base.n() {
        return Err(Error::InvalidBase(
            "no spare node for a second NSG successor".into(),
        ));
    }
    let ext = LinkEdit::new(d.labels[d.overflow], d.labels[d.p])?;
    let spoke = LinkEdit::new(d.labels[0], d.labels[d.p + 1])?;
    Ok((ext, spoke))
}

/// `G[α]`: weight α on the clique-extension pair and `1 - α` on the new-spoke pair.
pub fn alpha_family(base: &Graph, alpha: f64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside [0, 1]")));
    }
    let (ext, spoke) = alpha_pairs(base)?;
    Ok(base
        .with_weight(ext.i, ext.j, alpha)
        .with_weight(spoke.i, spoke.j, 1.0 - alpha))
}

#[derive(Debug, Clone)]
pub struct WeightedStep {
    pub graph: Graph,
    pub value: f64,
    /// Set when the winner came from the `G[α]` refinement.
    pub alpha: Option<f64>,
}

impl WeightedStep {
    /// Sparse `(i, j, Δw)` rows of the increment over `base`, 1-based.
    pub fn edit_csv(&self, base: &Graph) -> String {
        let mut out = String::from("i,j,dw\n");
        for e in all_pairs(base.n()) {
            let dw = self.graph.weight(e.i, e.j) - base.weight(e.i, e.j);
            if dw.abs() > WEIGHT_TOLERANCE {
                out.push_str(&format!("{},{},{}\n", e.i + 1, e.j + 1, dw));
            }
        }
        out
    }
}

const GOLDEN_TOL: f64 = 1e-10;

/// Best one-period step for the sum of squared centralities: the grid
/// maximum, refined along `G[α]` by golden-section search with a `1e-3`
/// sweep as a guard.
pub fn best_weighted_step_kb2(g: &Graph, phi: f64, resolution: u32) -> Result<WeightedStep> {
    let grid = weighted_successors_grid(g, resolution)?;
    let scored: Vec<f64> = grid
        .par_iter()
        .map(|h| aggregate_kb_squared(h, phi))
        .collect::<Result<_>>()?;
    let (bi, bv) = scored
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    let mut best = WeightedStep {
        graph: grid[bi].clone(),
        value: bv,
        alpha: None,
    };
    if alpha_pairs(g).is_err() {
        return Ok(best);
    }
    let f = |a: f64| -> Result<f64> { aggregate_kb_squared(&alpha_family(g, a)?, phi) };
    let mut candidates = vec![0.0, 1.0, golden_max(&f, 0.0, 1.0)?];
    let sweep: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
    let sweep_vals: Vec<f64> = sweep.iter().map(|&a| f(a)).collect::<Result<_>>()?;
    let sweep_best = sweep_vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
    candidates.push(sweep[sweep_best.0]);
    for a in candidates {
        let v = f(a)?;
        if v > best.value + WEIGHT_TOLERANCE * best.value.abs() {
            best = WeightedStep {
                graph: alpha_family(g, a)?,
                value: v,
                alpha: Some(a),
            };
        }
    }
    Ok(best)
}

fn golden_max(f: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<f64> {
    let inv = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv * (b - a);
    let mut d = a + inv * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > GOLDEN_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv * (b - a);
            fd = f(d)?;
        }
    }
    Ok((a + b) / 2.0)
}

/// Result of the two-sided perturbation of a weighted path.
#[derive(Debug, Clone)]
pub enum Perturbation {
    /// Every period is unweighted.
    ExtremePoint,
    Split {
        /// First strictly weighted period (1-based).
        period: usize,
        pairs: (LinkEdit, LinkEdit),
        plus: Vec<Graph>,
        minus: Vec<Graph>,
        /// Largest entrywise gap between the input and the average of the two sides.
        midpoint_error: f64,
    },
}

impl Perturbation {
    /// Both sides as validated weighted paths.
    pub fn paths(&self) -> Result<Option<(FormationPath, FormationPath)>> {
        match self {
            Perturbation::ExtremePoint => Ok(None),
            Perturbation::Split { plus, minus, .. } => Ok(Some((
                FormationPath::weighted(plus.clone())?,
                FormationPath::weighted(minus.clone())?,
            ))),
        }
    }
}

/// Two-sided perturbation at the first strictly weighted period, following
/// the max/min clamp rules on the first two interior pairs.
pub fn perturb_weighted_path(s: &FormationPath, delta: f64) -> Result<Perturbation> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} outside (0, 1)")));
    }
    let n = s.n();
    let pairs = all_pairs(n);
    let interior = |g: &Graph| -> Vec<LinkEdit> {
        pairs
            .iter()
            .copied()
            .filter(|e| {
                let w = g.weight(e.i, e.j);
                w > WEIGHT_TOLERANCE && w < 1.0 - WEIGHT_TOLERANCE
            })
            .collect()
    };
    let Some((tp, found)) = s
        .graphs()
        .iter()
        .enumerate()
        .map(|(t, g)| (t, interior(g)))
        .find(|(_, v)| !v.is_empty())
    else {
        return Ok(Perturbation::ExtremePoint);
    };
    if found.len() < 2 {
        return Err(Error::InvalidPath(format!(
            "period {} has a single interior entry; mass per period cannot be 1",
            tp + 1
        )));
    }
    let (p, q) = (found[0], found[1]);
    let mut plus = Vec::with_capacity(s.len());
    let mut minus = Vec::with_capacity(s.len());
    let mut midpoint_error: f64 = 0.0;
    for (t, g) in s.graphs().iter().enumerate() {
        if t < tp {
            plus.push(g.clone());
            minus.push(g.clone());
            continue;
        }
        let gij = g.weight(p.i, p.j);
        let gkl = g.weight(q.i, q.j);
        let ij_plus = (gij - delta).max(gij + gkl - 1.0);
        let ij_minus = (gij + delta).min(1.0);
        let kl_plus = (gkl + delta).min(1.0);
        let kl_minus = (gkl - delta).max(gkl + gij - 1.0);
        midpoint_error = midpoint_error
            .max((0.5 * (ij_plus + ij_minus) - gij).abs())
            .max((0.5 * (kl_plus + kl_minus) - gkl).abs());
        plus.push(g.with_weight(p.i, p.j, ij_plus).with_weight(q.i, q.j, kl_plus));
        minus.push(g.with_weight(p.i, p.j, ij_minus).with_weight(q.i, q.j, kl_minus));
    }
    Ok(Perturbation::Split {
        period: tp + 1,
        pairs: (p, q),
        plus,
        minus,
        midpoint_error,
    })
}

/// Best value of `Σ_t D(t) b(G(t))` over grid-weighted paths, by a forward
/// pass over weighted isomorphism classes. Returns the value and the number
/// of distinct states visited.
pub fn best_grid_path_value_kb(
    n: usize,
    d: &DiscountSchedule,
    phi: f64,
    resolution: u32,
) -> Result<(f64, usize)> {
    let r = resolution as usize;
    let pairs = all_pairs(n);
    let to_graph = |levels: &[u8]| -> Graph {
        let mut g = Graph::new_empty(n).expect("n >= 1");
        for (e, &l) in pairs.iter().zip(levels) {
            if l > 0 {
                g = g.with_weight(e.i, e.j, l as f64 / r as f64);
            }
        }
        g
    };
    // canonical key (minus its two header bytes) is itself a level vector
    let canon = |levels: &[u8]| -> Result<Vec<u8>> {
        Ok(weighted_canonical_form(&to_graph(levels), resolution)?.key[2..].to_vec())
    };
    let mut layer: HashMap<Vec<u8>, f64> = HashMap::new();
    layer.insert(vec![0u8; pairs.len()], 0.0);
    let mut visited = 1usize;
    for &w in d.as_slice() {
        let states: Vec<(Vec<u8>, f64)> = layer.into_iter().collect();
        let expanded: Vec<Vec<(Vec<u8>, f64)>> = states
            .par_iter()
            .map(|(s, v)| {
                let mut out = Vec::new();
                for next in grid_level_successors(s, r) {
                    out.push((canon(&next)?, *v));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut merged: HashMap<Vec<u8>, f64> = HashMap::new();
        for (k, v) in expanded.into_iter().flatten() {
            let e = merged.entry(k).or_insert(f64::NEG_INFINITY);
            if v > *e {
                *e = v;
            }
        }
        let keys: Vec<Vec<u8>> = merged.keys().cloned().collect();
        let utils: Vec<f64> = keys
            .par_iter()
            .map(|k| if w == 0.0 { Ok(0.0) } else { aggregate_kb(&to_graph(k), phi) })
            .collect::<Result<_>>()?;
        for (k, u) in keys.iter().zip(utils) {
            *merged.get_mut(k).unwrap() += w * u;
        }
        visited += merged.len();
        layer = merged;
    }
    let best = layer.values().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((best, visited))
}

fn grid_level_successors(levels: &[u8], r: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let p = levels.len();
    for a in 0..p {
        if levels[a] == 0 {
            let mut v = levels.to_vec();
            v[a] = r as u8;
            out.push(v);
        }
    }
    for a in 0..p {
        for b in a + 1..p {
            for m in 1..r {
                if levels[a] as usize + m <= r && levels[b] as usize + (r - m) <= r {
                    let mut v = levels.to_vec();
                    v[a] += m as u8;
                    v[b] += (r - m) as u8;
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Nodes with two or more incident entries strictly inside `(0, 1)`.
pub fn nodes_with_two_interior_links(g: &Graph) -> Vec<usize> {
    (0..g.n())
        .filter(|&i| {
            g.row(i)
                .iter()
                .filter(|&&w| w > WEIGHT_TOLERANCE && w < 1.0 - WEIGHT_TOLERANCE)
                .count()
                >= 2
        })
        .collect()
}
