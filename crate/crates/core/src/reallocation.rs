//! Neighbour reallocation and the path repair built on it.

use crate::error::{Error, Result};
use crate::graph::{Graph, LinkEdit};
use crate::metrics::{compare_counts, walk_profile, walk_profile_weighted, Dominance, DominanceVerdict, NodeWeights};
use crate::planner::{single_added_link, FormationPath};
use crate::structures::is_nsg;

/// Nodes moved from `j` to `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReallocationPlan {
    pub i: usize,
    pub j: usize,
    pub moved: Vec<usize>,
}

fn check_pair(g: &Graph, i: usize, j: usize) -> Result<()> {
    if i == j {
        return Err(Error::InvalidEdit(format!("nodes coincide at {}", i + 1)));
    }
    if i >= g.n() || j >= g.n() {
        return Err(Error::InvalidEdit(format!(
            "pair ({}, {}) out of range for {} nodes",
            i + 1,
            j + 1,
            g.n()
        )));
    }
    Ok(())
}

/// Move every neighbour of `j` that is not a neighbour of `i` over to `i`.
pub fn reallocate_neighbors(g: &Graph, i: usize, j: usize) -> Result<(Graph, ReallocationPlan)> {
    g.require_unweighted("reallocate_neighbors")?;
    check_pair(g, i, j)?;
    let moved: Vec<usize> = (0..g.n())
        .filter(|&l| l != i && l != j && g.weight(i, l) == 0.0 && g.weight(j, l) == 1.0)
        .collect();
    let mut h = g.clone();
    for &l in &moved {
        h = h.with_weight(i, l, 1.0).with_weight(j, l, 0.0);
    }
    Ok((h, ReallocationPlan { i, j, moved }))
}

/// θ-weighted walk profile of the reallocated graph against the original,
/// over `k = 2..=k_max`.
pub fn reallocate_dominates(
    g: &Graph,
    i: usize,
    j: usize,
    theta: Option<&NodeWeights>,
    k_max: usize,
) -> Result<DominanceVerdict> {
    let (h, _) = reallocate_neighbors(g, i, j)?;
    let a = walk_profile_weighted(&h, k_max, theta)?;
    let b = walk_profile_weighted(g, k_max, theta)?;
    Ok(DominanceVerdict {
        order: compare_counts(&a.counts, &b.counts, 2),
        k_checked: k_max,
    })
}

/// For each `k` outside `{i, j}` shift `min(g_jk, 1 - g_ik)` from `(j, k)` to `(i, k)`.
pub fn reallocate_weight(g: &Graph, i: usize, j: usize) -> Result<Graph> {
    check_pair(g, i, j)?;
    let mut h = g.clone();
    for k in (0..g.n()).filter(|&k| k != i && k != j) {
        let (gi, gj) = (g.weight(i, k), g.weight(j, k));
        let m = gj.min(1.0 - gi);
        if m > 0.0 {
            h = h.with_weight(i, k, gi + m).with_weight(j, k, gj - m);
        }
    }
    Ok(h)
}

/// Apply [`reallocate_weight`] to every period from `from` (0-based) on.
/// The map is entrywise monotone, so feasibility carries over whenever the
/// period before `from` is left unchanged by it.
pub fn reallocate_weight_path(
    s: &FormationPath,
    i: usize,
    j: usize,
    from: usize,
) -> Result<FormationPath> {
    let graphs = s
        .graphs()
        .iter()
        .enumerate()
        .map(|(t, g)| if t >= from { reallocate_weight(g, i, j) } else { Ok(g.clone()) })
        .collect::<Result<Vec<_>>>()?;
    FormationPath::weighted(graphs)
}

/// One pass of the repair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairPass {
    /// First non-NSG period (1-based).
    pub period: usize,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone)]
pub struct RepairReport {
    pub path: FormationPath,
    pub passes: Vec<RepairPass>,
}

pub fn repair_path(s: &FormationPath) -> Result<FormationPath> {
    Ok(repair_path_report(s, 10)?.path)
}

/// Repeatedly locate the first non-NSG period and rebuild the suffix with
/// `j`'s exclusive links routed to `i`. Each pass is checked for
/// feasibility and for walk dominance over its input on `k = 2..=k_max`.
pub fn repair_path_report(s: &FormationPath, k_max: usize) -> Result<RepairReport> {
    if s.is_weighted() {
        return Err(Error::InvalidPath("repair needs an unweighted path".into()));
    }
    let horizon = s.len();
    let mut current = s.clone();
    let mut passes = Vec::new();
    // Each pass raises total degree-square sums, so this bound is generous.
    let cap = horizon * horizon + horizon + 1;
    loop {
        let graphs = current.graphs();
        let Some(tp) = graphs.iter().position(|g| !is_nsg(g).is_nsg()) else {
            return Ok(RepairReport {
                path: current,
                passes,
            });
        };
        if passes.len() >= cap {
            return Err(Error::ConvergenceFailure {
                iterations: passes.len(),
                detail: "path repair did not reach an all-NSG path".into(),
            });
        }
        let prev = if tp == 0 {
            Graph::new_empty(current.n())?
        } else {
            graphs[tp - 1].clone()
        };
        let edit = single_added_link(&prev, &graphs[tp]).expect("validated path");
        let (i, j) = choose_pair(&prev, &graphs[tp], edit).ok_or_else(|| {
            Error::InvalidPath(format!("no reallocatable pair at period {}", tp + 1))
        })?;
        let edits = current.edits()?;
        let mut rebuilt: Vec<Graph> = graphs[..tp].to_vec();
        let mut g = prev;
        for e in &edits[tp..] {
            let placed = route(&g, *e, i, j)?;
            g = g.add_link(placed).map_err(|err| {
                Error::InvalidPath(format!("repair produced an infeasible edit: {err}"))
            })?;
            rebuilt.push(g.clone());
        }
        let next = FormationPath::unweighted(rebuilt)?;
        for (t, (a, b)) in next.graphs().iter().zip(current.graphs()).enumerate() {
            let pa = walk_profile(a, k_max);
            let pb = walk_profile(b, k_max);
            let order = compare_counts(&pa.counts, &pb.counts, 2);
            if !matches!(order, Dominance::StrictlyDominates | Dominance::Equal) {
                return Err(Error::InvalidPath(format!(
                    "repair pass {} lost walk dominance at period {}",
                    passes.len() + 1,
                    t + 1
                )));
            }
        }
        passes.push(RepairPass {
            period: tp + 1,
            i,
            j,
        });
        current = next;
    }
}

/// Orient a violating pair at the first non-NSG period: `j` is an endpoint of
/// the new link and, one period earlier, `N_j \ {i}` was inside `N_i \ {j}`.
/// Among candidates the partner `i` of largest degree wins, then smaller indices.
fn choose_pair(prev: &Graph, g: &Graph, edit: LinkEdit) -> Option<(usize, usize)> {
    let bits = g.adjacency_bits();
    let pbits = prev.adjacency_bits();
    let n = g.n();
    let mut best: Option<(f64, usize, usize)> = None;
    for j in [edit.i, edit.j] {
        for i in (0..n).filter(|&i| i != j) {
            let a = bits[i] & !(1 << j);
            let b = bits[j] & !(1 << i);
            let violates = a & b != a && a & b != b;
            if !violates {
                continue;
            }
            let pa = pbits[i] & !(1 << j);
            let pb = pbits[j] & !(1 << i);
            if pb & pa != pb {
                continue;
            }
            let d = g.degree(i);
            let better = match best {
                None => true,
                Some((bd, bi, bj)) => d > bd || (d == bd && (i, j) < (bi, bj)),
            };
            if better {
                best = Some((d, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// An edit touching `{i, j} x {l}` goes to `(i, l)` when open, else `(j, l)`.
fn route(g: &Graph, e: LinkEdit, i: usize, j: usize) -> Result<LinkEdit> {
    let other = if e.touches(i) && !e.touches(j) {
        e.other(i)
    } else if e.touches(j) && !e.touches(i) {
        e.other(j)
    } else {
        None
    };
    match other {
        Some(l) if g.weight(i, l) == 0.0 => LinkEdit::new(i, l),
        Some(l) => LinkEdit::new(j, l),
        None => Ok(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::isomorphic;
    use crate::metrics::walk_count;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_reallocation_is_isomorphic() {
        let p = Graph::path(3, &[0, 1, 2]).unwrap();
        let (h, plan) = reallocate_neighbors(&p, 0, 1).unwrap();
        assert_eq!(plan.moved, vec![2]);
        assert!(isomorphic(&h, &p).unwrap());
        assert_eq!(walk_count(&h, 2), walk_count(&p, 2));
    }

    #[test]
    fn four_cycle_opposite_nodes_are_unchanged() {
        let c4 = Graph::path(4, &[0, 1, 2, 3, 0]).unwrap();
        let (h, plan) = reallocate_neighbors(&c4, 0, 2).unwrap();
        assert!(plan.moved.is_empty());
        assert_eq!(h, c4);
        assert_eq!(reallocate_dominates(&c4, 0, 2, None, 8).unwrap().order, Dominance::Equal);
    }

    #[test]
    fn two_cherries_merge_into_a_star() {
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (3, 4), (3, 5)]).unwrap();
        let (h, plan) = reallocate_neighbors(&g, 0, 3).unwrap();
        assert_eq!(plan.moved, vec![4, 5]);
        assert_eq!(h, Graph::star(6, 0, &[1, 2, 4, 5]).unwrap());
        // degree squares: star 16 + 4 = 20, cherries 4 + 1 + 1 + 4 + 1 + 1 = 12
        assert_eq!(walk_count(&h, 2), 20.0);
        assert_eq!(walk_count(&g, 2), 12.0);
        assert_eq!(
            reallocate_dominates(&g, 0, 3, None, 10).unwrap().order,
            Dominance::StrictlyDominates
        );
    }

    #[test]
    fn weight_reallocation_arithmetic() {
        let g = Graph::new_empty(3).unwrap().with_weight(1, 2, 0.6).with_weight(0, 2, 0.7);
        let h = reallocate_weight(&g, 0, 1).unwrap();
        assert!((h.weight(0, 2) - 1.0).abs() < 1e-15);
        assert!((h.weight(1, 2) - 0.3).abs() < 1e-15);
        assert!((h.total_weight() - g.total_weight()).abs() < 1e-15);
    }

    #[test]
    fn unweighted_weight_reallocation_matches_neighbour_reallocation() {
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (3, 4), (3, 5), (2, 4)]).unwrap();
        let (a, _) = reallocate_neighbors(&g, 0, 3).unwrap();
        assert_eq!(reallocate_weight(&g, 0, 3).unwrap(), a);
    }

    #[test]
    fn repair_leaves_nsg_paths_alone() {
        let s = FormationPath::unweighted(
            (1..=6).map(|t| crate::structures::quasi_complete(5, t).unwrap()).collect(),
        )
        .unwrap();
        let r = repair_path_report(&s, 10).unwrap();
        assert!(r.passes.is_empty());
        assert_eq!(r.path, s);
    }

    #[test]
    fn repair_random_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs: Vec<LinkEdit> = (0..6)
            .flat_map(|i| (i + 1..6).map(move |j| LinkEdit { i, j }))
            .collect();
        for _ in 0..50 {
            let mut p = pairs.clone();
            p.shuffle(&mut rng);
            let s = FormationPath::from_edits(6, &p[..8]).unwrap();
            let r = repair_path_report(&s, 10).unwrap();
            assert!(r.path.graphs().iter().all(|g| is_nsg(g).is_nsg()));
            assert!(r.passes.len() <= 8);
        }
    }
}
