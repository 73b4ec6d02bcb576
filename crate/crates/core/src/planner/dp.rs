use std::collections::HashMap;

use rayon::prelude::*;

use super::{ties, DiscountSchedule, FormationPath, UtilitySpec};
use crate::canon::{canonical_form, CanonicalForm};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::structures::is_nsg;

pub const DEFAULT_STATE_CAP: usize = 2_000_000;

const MAX_NODES_FULL: usize = 7;
const MAX_NODES_NSG: usize = 9;

#[derive(Debug, Clone, Copy)]
pub struct DpOptions {
    pub restrict_to_nsg: bool,
    /// Total states across all layers.
    pub state_cap: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions {
            restrict_to_nsg: false,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

impl DpOptions {
    pub fn nsg(restrict_to_nsg: bool) -> Self {
        DpOptions {
            restrict_to_nsg,
            ..DpOptions::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct DpSolution {
    pub value: f64,
    pub path: FormationPath,
    /// Class keys along the returned path, periods 1..=T.
    pub classes: Vec<CanonicalForm>,
    /// For each period, every class lying on some optimal path.
    pub optimal_states: Vec<Vec<Graph>>,
    pub states_explored: usize,
}

struct Layer {
    keys: Vec<CanonicalForm>,
    graphs: Vec<Graph>,
    /// Successor indices into the next layer.
    succ: Vec<Vec<usize>>,
    util: Vec<f64>,
}

/// Exact maximizer of `Σ_t D(t) u(G(t))` by backward induction over
/// (period, isomorphism class) states.
pub fn optimal_path_dp(
    n: usize,
    horizon: usize,
    d: &DiscountSchedule,
    u: &UtilitySpec,
    opts: DpOptions,
) -> Result<DpSolution> {
    let limit = if opts.restrict_to_nsg {
        MAX_NODES_NSG
    } else {
        MAX_NODES_FULL
    };
    if n > limit {
        return Err(Error::SizeLimit(if opts.restrict_to_nsg {
            format!("NSG-restricted search supports at most {MAX_NODES_NSG} nodes, got {n}")
        } else {
            format!(
                "unrestricted search supports at most {MAX_NODES_FULL} nodes, got {n}; \
                 use restrict_to_nsg for up to {MAX_NODES_NSG}"
            )
        }));
    }
    let cap = n * n.saturating_sub(1) / 2;
    if horizon == 0 || horizon > cap {
        return Err(Error::InvalidHorizon(format!(
            "horizon {horizon} outside 1..={cap}"
        )));
    }
    if d.len() != horizon {
        return Err(Error::InvalidSchedule(format!(
            "schedule has {} periods, horizon is {horizon}",
            d.len()
        )));
    }
    u.validate()?;
    let dv = d.as_slice();

    let root = Graph::new_empty(n)?;
    let mut layers = vec![Layer {
        keys: vec![canonical_form(&root)?],
        graphs: vec![root],
        succ: Vec::new(),
        util: vec![0.0],
    }];
    let mut total = 1usize;
    for t in 0..horizon {
        let cur = layers.last().unwrap();
        let expanded: Vec<Vec<(CanonicalForm, Graph)>> = cur
            .graphs
            .par_iter()
            .map(|g| expand(g, opts.restrict_to_nsg))
            .collect::<Result<_>>()?;
        let mut index: HashMap<CanonicalForm, usize> = HashMap::new();
        let mut keys = Vec::new();
        let mut graphs = Vec::new();
        let mut succ = Vec::with_capacity(expanded.len());
        for list in expanded {
            let mut row = Vec::with_capacity(list.len());
            for (k, g) in list {
                let id = *index.entry(k.clone()).or_insert_with(|| {
                    keys.push(k);
                    graphs.push(g);
                    keys.len() - 1
                });
                row.push(id);
            }
            succ.push(row);
        }
        total += keys.len();
        if total > opts.state_cap {
            return Err(Error::SizeLimit(format!(
                "state space exceeds {} states at period {}; consider restrict_to_nsg",
                opts.state_cap,
                t + 1
            )));
        }
        layers.last_mut().unwrap().succ = succ;
        let weight = dv[t];
        let util: Vec<f64> = if weight == 0.0 {
            vec![0.0; graphs.len()]
        } else {
            graphs
                .par_iter()
                .map(|g| u.evaluate(g))
                .collect::<Result<_>>()?
        };
        layers.push(Layer {
            keys,
            graphs,
            succ: Vec::new(),
            util,
        });
    }

    // value[t][s]: best remaining value from state s of layer t.
    let mut value: Vec<Vec<f64>> = vec![Vec::new(); horizon + 1];
    let mut choice: Vec<Vec<usize>> = vec![Vec::new(); horizon];
    value[horizon] = vec![0.0; layers[horizon].graphs.len()];
    for t in (0..horizon).rev() {
        let next = &layers[t + 1];
        let w = dv[t];
        let (vals, picks): (Vec<f64>, Vec<usize>) = layers[t]
            .succ
            .iter()
            .map(|row| {
                let cand = |s: usize| w * next.util[s] + value[t + 1][s];
                let best = row.iter().map(|&s| cand(s)).fold(f64::NEG_INFINITY, f64::max);
                let pick = row
                    .iter()
                    .copied()
                    .filter(|&s| ties(cand(s), best) || cand(s) == best)
                    .min_by(|&a, &b| next.keys[a].cmp(&next.keys[b]))
                    .expect("non-saturated states have successors");
                (best, pick)
            })
            .unzip();
        value[t] = vals;
        choice[t] = picks;
    }

    let mut classes = Vec::with_capacity(horizon);
    let mut s = 0usize;
    for (t, picks) in choice.iter().enumerate() {
        s = picks[s];
        classes.push(layers[t + 1].keys[s].clone());
    }
    let path = realize(n, &classes)?;

    let mut optimal_states = Vec::with_capacity(horizon);
    let mut frontier = vec![0usize];
    for t in 0..horizon {
        let next = &layers[t + 1];
        let w = dv[t];
        let mut hit = vec![false; next.graphs.len()];
        for &s in &frontier {
            let best = value[t][s];
            for &c in &layers[t].succ[s] {
                let v = w * next.util[c] + value[t + 1][c];
                if v == best || ties(v, best) {
                    hit[c] = true;
                }
            }
        }
        frontier = (0..hit.len()).filter(|&c| hit[c]).collect();
        optimal_states.push(frontier.iter().map(|&c| next.graphs[c].clone()).collect());
    }

    Ok(DpSolution {
        value: value[0][0],
        path,
        classes,
        optimal_states,
        states_explored: total,
    })
}

/// Successor classes of `g`, first representative of each.
fn expand(g: &Graph, restrict: bool) -> Result<Vec<(CanonicalForm, Graph)>> {
    let mut out: Vec<(CanonicalForm, Graph)> = Vec::new();
    for e in g.open_pairs() {
        let h = g.add_link(e)?;
        if restrict && !is_nsg(&h).is_nsg() {
            continue;
        }
        let k = canonical_form(&h)?;
        if !out.iter().any(|(x, _)| *x == k) {
            out.push((k, h));
        }
    }
    Ok(out)
}

/// A labeled path through the given classes, choosing the first open pair
/// that lands in each class.
fn realize(n: usize, classes: &[CanonicalForm]) -> Result<FormationPath> {
    let mut g = Graph::new_empty(n)?;
    let mut graphs = Vec::with_capacity(classes.len());
    for key in classes {
        let mut found = None;
        for e in g.open_pairs() {
            let h = g.add_link(e)?;
            if canonical_form(&h)? == *key {
                found = Some(h);
                break;
            }
        }
        g = found.expect("every class on the path is a successor class");
        graphs.push(g.clone());
    }
    FormationPath::unweighted(graphs)
}

/// Myopic search: solve with ε, halve it, and stop once two consecutive
/// schedules give the same optimal class sequence. Returns the ε used.
pub fn myopic_adaptive(
    n: usize,
    horizon: usize,
    u: &UtilitySpec,
    epsilon: f64,
    opts: DpOptions,
) -> Result<(f64, DpSolution)> {
    let mut eps = epsilon;
    let mut prev = optimal_path_dp(n, horizon, &DiscountSchedule::myopic(eps, horizon)?, u, opts)?;
    for _ in 0..16 {
        let half = eps / 2.0;
        let next = optimal_path_dp(n, horizon, &DiscountSchedule::myopic(half, horizon)?, u, opts)?;
        if next.classes == prev.classes {
            return Ok((eps, prev));
        }
        eps = half;
        prev = next;
    }
    Ok((eps, prev))
}
