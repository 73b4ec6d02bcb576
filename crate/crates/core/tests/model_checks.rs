use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqnet::canon::canonical_form;
use seqnet::games::{iterate_vector, planner_welfare, solve_equilibrium, ResponseFunction, Transform};
use seqnet::metrics::{walk_count_weighted, NodeWeights};
use seqnet::planner::{
    greedy_path, optimal_path_dp, period_utilities, DiscountSchedule, DpOptions, UtilityKind,
    UtilitySpec,
};
use seqnet::structures::is_nsg;
use seqnet::Graph;

fn all_classes(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let g = Graph::from_edges(n, &edges).unwrap();
        if seen.insert(canonical_form(&g).unwrap()) {
            out.push(g);
        }
    }
    out
}

/// `(G, i, j, Ĝ, Ḡ)`: `j`'s other neighbours sit strictly inside `i`'s, and a
/// non-empty set `L` of nodes outside both is attached to `i` in `Ĝ` and to
/// `j` in `Ḡ`.
fn split_instances(max_n: usize) -> Vec<(usize, usize, Graph, Graph)> {
    let mut out = Vec::new();
    for n in 3..=max_n {
        for g in all_classes(n) {
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let ni: BTreeSet<usize> = g.neighbors(i).into_iter().filter(|&x| x != j).collect();
                    let nj: BTreeSet<usize> = g.neighbors(j).into_iter().filter(|&x| x != i).collect();
                    if !(nj.is_subset(&ni) && nj.len() < ni.len()) {
                        continue;
                    }
                    let free: Vec<usize> = (0..n)
                        .filter(|&l| l != i && l != j && !g.has_link(i, l) && !g.has_link(j, l))
                        .collect();
                    for mask in 1u32..(1 << free.len()) {
                        let l = free.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &v)| v);
                        let (mut hat, mut bar) = (g.clone(), g.clone());
                        for v in l {
                            hat = hat.with_weight(i, v, 1.0);
                            bar = bar.with_weight(j, v, 1.0);
                        }
                        out.push((i, j, hat, bar));
                    }
                }
            }
        }
    }
    out
}

#[test]
fn iterate_comparisons_hold_step_by_step() {
    let catalog = [
        ResponseFunction::Softplus { base: 1.0, shift: 0.0 },
        ResponseFunction::Quadratic { a: 1.0, b: 0.1, c: 0.001 },
        ResponseFunction::linear(1.0, 0.5),
    ];
    let tol = 1e-12;
    let instances = split_instances(5);
    assert!(!instances.is_empty());
    for (i, j, hat, bar) in &instances {
        for psi in &catalog {
            let mut prev_x = vec![0.0; hat.n()];
            for m in 1..=12 {
                let x = iterate_vector(hat, psi, m).unwrap();
                let y = iterate_vector(bar, psi, m).unwrap();
                for k in (0..hat.n()).filter(|k| k != j) {
                    assert!(x[k] + tol >= y[k], "node {k} at m={m}");
                }
                assert!(x[*i] + tol >= y[*i].max(y[*j]));
                assert!(x[*i] + x[*j] + tol >= y[*i] + y[*j]);
                assert!(x.iter().zip(&prev_x).all(|(a, b)| a + tol >= *b));
                prev_x = x;
            }
        }
    }
}

#[test]
fn linear_response_ties_only_at_the_second_iterate() {
    // Second-round sums depend on degree totals alone, which the two graphs share.
    let psi = ResponseFunction::linear(1.0, 0.5);
    for (_, _, hat, bar) in split_instances(5) {
        let x: f64 = iterate_vector(&hat, &psi, 2).unwrap().iter().sum();
        let y: f64 = iterate_vector(&bar, &psi, 2).unwrap().iter().sum();
        assert!((x - y).abs() < 1e-12);
        for m in 3..=12 {
            let x: f64 = iterate_vector(&hat, &psi, m).unwrap().iter().sum();
            let y: f64 = iterate_vector(&bar, &psi, m).unwrap().iter().sum();
            assert!(x > y, "m={m}");
        }
    }
}

#[test]
fn heavier_node_gains_from_the_exclusive_links() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (i, j, hat, bar) in split_instances(5) {
        for _ in 0..4 {
            let mut theta: Vec<f64> = (0..hat.n()).map(|_| rng.gen_range(0.1..2.0)).collect();
            if theta[i] <= theta[j] {
                theta.swap(i, j);
            }
            if theta[i] == theta[j] {
                theta[i] += 0.5;
            }
            let theta = NodeWeights::new(theta).unwrap();
            for k in 2..=10 {
                let x = walk_count_weighted(&hat, k, &theta).unwrap();
                let y = walk_count_weighted(&bar, k, &theta).unwrap();
                assert!(x > y, "k={k}");
            }
        }
    }
}

#[test]
fn equilibrium_welfare_optimum_is_nested_split() {
    let psi = ResponseFunction::Quadratic { a: 1.0, b: 0.1, c: 0.001 };
    for transform in [Transform::Identity, Transform::Square, Transform::ExpMinusOne] {
        let u = UtilitySpec::new(UtilityKind::EquilibriumWelfare {
            psi: psi.clone(),
            transform,
        });
        for (n, horizon) in [(5, 5), (6, 6)] {
            let d = DiscountSchedule::geometric(0.8, horizon).unwrap();
            let sol = optimal_path_dp(n, horizon, &d, &u, DpOptions::default()).unwrap();
            for layer in &sol.optimal_states {
                assert!(layer.iter().all(|g| is_nsg(g).is_nsg()), "{transform:?} n={n}");
            }
        }
    }
}

#[test]
fn equilibrium_welfare_rises_along_greedy_path() {
    let psi = ResponseFunction::Quadratic { a: 1.0, b: 0.1, c: 0.001 };
    let u = UtilitySpec::new(UtilityKind::EquilibriumWelfare {
        psi: psi.clone(),
        transform: Transform::Square,
    });
    let p = greedy_path(6, 15, &u).unwrap();
    let w = period_utilities(&p, &u).unwrap();
    assert!(w.windows(2).all(|v| v[1] > v[0]));
    let eq = solve_equilibrium(p.last(), &psi, 1e-12, 100_000).unwrap();
    assert!((planner_welfare(&eq.action, Transform::Square) - w[14]).abs() < 1e-9);
}

fn random_weighted(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut g = Graph::new_empty(n).unwrap();
    for i in 0..n {
        for j in i + 1..n {
            match rng.gen_range(0..4) {
                0 => {}
                1 => g = g.with_weight(i, j, 1.0),
                _ => g = g.with_weight(i, j, rng.gen_range(0.0..1.0)),
            }
        }
    }
    g
}

#[test]
fn weight_reallocation_raises_squared_centrality() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let phi = 0.05;
    let (mut lower, mut higher) = (0, 0);
    for _ in 0..4000 {
        let n = rng.gen_range(3..=7);
        let g = random_weighted(&mut rng, n);
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let h = seqnet::reallocation::reallocate_weight(&g, i, j).unwrap();
        let moved: f64 = (0..n).filter(|&k| k != i && k != j).map(|k| h.weight(i, k) - g.weight(i, k)).sum();
        let mut swap: Vec<usize> = (0..n).collect();
        swap.swap(i, j);
        if moved < 1e-6 || h.approx_eq(&g.permuted(&swap), 1e-12) {
            continue;
        }
        let b = seqnet::metrics::katz_bonacich(&g, phi).unwrap().values;
        let before = seqnet::metrics::aggregate_kb_squared(&g, phi).unwrap();
        let after = seqnet::metrics::aggregate_kb_squared(&h, phi).unwrap();
        let others = || (0..n).filter(|&k| k != i && k != j);
        if b[i] > b[j] {
            assert!(others().all(|k| h.weight(i, k) >= h.weight(j, k)));
            assert!(after > before);
            lower += 1;
        } else if b[i] < b[j] && others().all(|k| h.weight(i, k) >= g.weight(j, k)) {
            assert!(after > before);
            higher += 1;
        }
    }
    assert!(lower > 100 && higher > 10, "lower={lower} higher={higher}");
}
