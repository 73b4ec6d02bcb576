use super::{ties, AgentSequence, FormationPath};
use crate::canon::find_isomorphism;
use crate::error::{Error, Result};
use crate::graph::{Graph, LinkEdit};
use crate::metrics::kb_solve;
use crate::structures::nsg_isomorphism;

/// Katz-Bonacich centrality of a single node: walks of every length from it.
pub fn rooted_kb(g: &Graph, agent: usize, phi: f64) -> Result<f64> {
    Ok(kb_solve(g, phi, &vec![1.0; g.n()])?[agent])
}

/// The nominated agent links to the non-neighbour that maximizes her own
/// centrality; ties go to the smallest index.
pub fn delegated_step(g: &Graph, agent: usize, phi_agent: f64) -> Result<Graph> {
    let target = delegated_target(g, agent, phi_agent)?;
    g.add_link(LinkEdit::new(agent, target)?)
}

fn delegated_target(g: &Graph, agent: usize, phi: f64) -> Result<usize> {
    if agent >= g.n() {
        return Err(Error::InvalidInput(format!(
            "agent {} outside 1..={}",
            agent + 1,
            g.n()
        )));
    }
    let options: Vec<usize> = (0..g.n())
        .filter(|&k| k != agent && g.weight(agent, k) == 0.0)
        .collect();
    if options.is_empty() {
        return Err(Error::NoMove(agent + 1));
    }
    let mut scored = Vec::with_capacity(options.len());
    for k in options {
        let h = g.with_weight(agent, k, 1.0);
        scored.push((k, rooted_kb(&h, agent, phi)?));
    }
    let best = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(scored
        .into_iter()
        .find(|s| s.1 == best || ties(s.1, best))
        .map(|s| s.0)
        .expect("at least one option"))
}

pub fn delegated_path(
    n: usize,
    horizon: usize,
    q: &AgentSequence,
    phi_agent: f64,
) -> Result<FormationPath> {
    if q.len() != horizon {
        return Err(Error::InvalidInput(format!(
            "agent sequence has {} entries, horizon is {horizon}",
            q.len()
        )));
    }
    let mut g = Graph::new_empty(n)?;
    let mut graphs = Vec::with_capacity(horizon);
    for &a in q.as_slice() {
        g = delegated_step(&g, a, phi_agent)?;
        graphs.push(g.clone());
    }
    FormationPath::unweighted(graphs)
}

/// Agent sequence that lets delegation track a planner path.
///
/// Period by period, the planner's link is carried over to the delegated
/// network through an isomorphism, and the endpoint whose neighbourhood is
/// nested in the other's is nominated (lower degree, then smaller index, when
/// both or neither are nested).
pub fn delegation_recipe(path: &FormationPath, phi_agent: f64) -> Result<AgentSequence> {
    let n = path.n();
    let edits = path.edits()?;
    let mut planner = Graph::new_empty(n)?;
    let mut delegated = Graph::new_empty(n)?;
    let mut q = Vec::with_capacity(edits.len());
    for (t, e) in edits.iter().enumerate() {
        let m = match nsg_isomorphism(&planner, &delegated) {
            Some(m) => m,
            None => find_isomorphism(&planner, &delegated)?.ok_or_else(|| {
                Error::InvalidPath(format!(
                    "delegated network diverged from the planner path before period {}",
                    t + 1
                ))
            })?,
        };
        let (a, b) = (m[e.i], m[e.j]);
        let agent = nominate(&delegated, a, b);
        q.push(agent);
        delegated = delegated_step(&delegated, agent, phi_agent)?;
        planner = path.graphs()[t].clone();
    }
    AgentSequence::new(q, n)
}

fn nominate(g: &Graph, a: usize, b: usize) -> usize {
    let bits = g.adjacency_bits();
    let na = bits[a] & !(1 << b);
    let nb = bits[b] & !(1 << a);
    let a_in_b = na & nb == na;
    let b_in_a = na & nb == nb;
    match (a_in_b, b_in_a) {
        (true, false) => a,
        (false, true) => b,
        _ => {
            let (da, db) = (g.degree(a), g.degree(b));
            if da < db || (da == db && a < b) {
                a
            } else {
                b
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::isomorphic;
    use crate::planner::greedy_path;
    use crate::planner::UtilitySpec;

    #[test]
    fn empty_graph_links_to_smallest_index() {
        let g = delegated_step(&Graph::new_empty(4).unwrap(), 0, 0.1).unwrap();
        assert!(g.has_link(0, 1));
        assert_eq!(g.link_count(), 1);
    }

    #[test]
    fn star_centre_joins_best_connected_non_neighbour() {
        // Centre 0 with leaves 1, 2; node 3 has degree 2 via 4 and 5.
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (3, 4), (3, 5)]).unwrap();
        let h = delegated_step(&g, 0, 0.1).unwrap();
        let mut best = (0, f64::MIN);
        for k in 3..6 {
            let v = rooted_kb(&g.with_weight(0, k, 1.0), 0, 0.1).unwrap();
            if v > best.1 {
                best = (k, v);
            }
        }
        assert_eq!(best.0, 3);
        assert!(h.has_link(0, 3));
    }

    #[test]
    fn universal_agent_has_no_move() {
        let g = Graph::star(4, 0, &[1, 2, 3]).unwrap();
        assert_eq!(delegated_step(&g, 0, 0.1).unwrap_err(), Error::NoMove(1));
        let q = AgentSequence::new(vec![0, 0, 0, 0], 4).unwrap();
        assert_eq!(delegated_path(4, 4, &q, 0.1).unwrap_err(), Error::NoMove(1));
    }

    #[test]
    fn recipe_reproduces_greedy_path() {
        let p = greedy_path(6, 10, &UtilitySpec::kb(0.05)).unwrap();
        let q = delegation_recipe(&p, 0.05).unwrap();
        let d = delegated_path(6, 10, &q, 0.05).unwrap();
        for (a, b) in p.graphs().iter().zip(d.graphs()) {
            assert!(isomorphic(a, b).unwrap());
        }
    }
}
