//! Formation paths, discount schedules, utilities, and the planners that
//! choose links: greedy, exact dynamic programming, and delegation.

mod delegation;
mod dp;
mod greedy;

pub use delegation::{delegated_path, delegated_step, delegation_recipe, rooted_kb};
pub use dp::{myopic_adaptive, optimal_path_dp, DpOptions, DpSolution, DEFAULT_STATE_CAP};
pub use greedy::greedy_path;

use crate::error::{Error, Result};
use crate::games::{planner_welfare, solve_equilibrium, ResponseFunction, Transform};
use crate::graph::{Graph, LinkEdit, WEIGHT_TOLERANCE};
use crate::metrics::{
    aggregate_kb_squared_weighted, aggregate_kb_weighted, diffusion_weighted, spectral_radius,
    walk_profile_weighted, NodeWeights,
};

/// Relative tolerance under which two utilities count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub(crate) fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

/// `G(1), ..., G(T)`; `G(0)` is the empty graph and is not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationPath {
    graphs: Vec<Graph>,
    weighted: bool,
}

impl FormationPath {
    /// Unweighted path: each graph adds exactly one link to its predecessor.
    pub fn unweighted(graphs: Vec<Graph>) -> Result<Self> {
        let first = graphs
            .first()
            .ok_or_else(|| Error::InvalidPath("a path needs at least one period".into()))?;
        let mut prev = Graph::new_empty(first.n())?;
        for (t, g) in graphs.iter().enumerate() {
            if g.n() != prev.n() {
                return Err(Error::InvalidPath(format!("period {} changes node count", t + 1)));
            }
            if !g.is_unweighted() {
                return Err(Error::InvalidPath(format!("period {} is weighted", t + 1)));
            }
            single_added_link(&prev, g).ok_or_else(|| {
                Error::InvalidPath(format!("period {} does not add exactly one link", t + 1))
            })?;
            prev = g.clone();
        }
        Ok(FormationPath {
            graphs,
            weighted: false,
        })
    }

    /// Weighted path: each increment is non-negative with total mass one pair-unit.
    pub fn weighted(graphs: Vec<Graph>) -> Result<Self> {
        let first = graphs
            .first()
            .ok_or_else(|| Error::InvalidPath("a path needs at least one period".into()))?;
        let mut prev = Graph::new_empty(first.n())?;
        for (t, g) in graphs.iter().enumerate() {
            if g.n() != prev.n() {
                return Err(Error::InvalidPath(format!("period {} changes node count", t + 1)));
            }
            let mut mass = 0.0;
            for (a, b) in g.as_slice().iter().zip(prev.as_slice()) {
                if a - b < -1e-9 {
                    return Err(Error::InvalidPath(format!(
                        "period {} removes weight",
                        t + 1
                    )));
                }
                mass += a - b;
            }
            // mass counts each pair twice
            if (mass - 2.0).abs() > 1e-9 {
                return Err(Error::InvalidPath(format!(
                    "period {} adds mass {} instead of 1",
                    t + 1,
                    mass / 2.0
                )));
            }
            prev = g.clone();
        }
        Ok(FormationPath {
            graphs,
            weighted: true,
        })
    }

    /// Unweighted path from a list of edits applied to the empty graph.
    pub fn from_edits(n: usize, edits: &[LinkEdit]) -> Result<Self> {
        let mut g = Graph::new_empty(n)?;
        let mut graphs = Vec::with_capacity(edits.len());
        for &e in edits {
            g = g
                .add_link(e)
                .map_err(|err| Error::InvalidPath(err.to_string()))?;
            graphs.push(g.clone());
        }
        FormationPath::unweighted(graphs)
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn into_graphs(self) -> Vec<Graph> {
        self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn n(&self) -> usize {
        self.graphs[0].n()
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn last(&self) -> &Graph {
        self.graphs.last().expect("paths are non-empty")
    }

    /// Link added in each period (unweighted paths only).
    pub fn edits(&self) -> Result<Vec<LinkEdit>> {
        if self.weighted {
            return Err(Error::InvalidPath("weighted paths have no link edits".into()));
        }
        let mut prev = Graph::new_empty(self.n())?;
        let mut out = Vec::with_capacity(self.len());
        for g in &self.graphs {
            out.push(single_added_link(&prev, g).expect("validated on construction"));
            prev = g.clone();
        }
        Ok(out)
    }
}

/// The unique link in `next` but not in `prev`, when that is the only change.
pub(crate) fn single_added_link(prev: &Graph, next: &Graph) -> Option<LinkEdit> {
    let n = prev.n();
    let mut found = None;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (prev.weight(i, j), next.weight(i, j));
            if a == b {
                continue;
            }
            if a == 0.0 && b == 1.0 && found.is_none() {
                found = Some(LinkEdit { i, j });
            } else {
                return None;
            }
        }
    }
    found
}

/// Per-period weights `D(1), ..., D(T)` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountSchedule(Vec<f64>);

impl DiscountSchedule {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::InvalidHorizon("horizon must be at least 1".into()));
        }
        if let Some((t, v)) = d
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::InvalidSchedule(format!(
                "D({}) = {v} outside [0, 1]",
                t + 1
            )));
        }
        Ok(DiscountSchedule(d))
    }

    /// All weight on the last period.
    pub fn farsighted(horizon: usize) -> Result<Self> {
        check_horizon(horizon)?;
        let mut d = vec![0.0; horizon];
        d[horizon - 1] = 1.0;
        Ok(DiscountSchedule(d))
    }

    /// `D(t) = δ^(t-1)`.
    pub fn geometric(delta: f64, horizon: usize) -> Result<Self> {
        check_horizon(horizon)?;
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidSchedule(format!("ratio {delta} outside (0, 1]")));
        }
        Ok(DiscountSchedule(
            (0..horizon).map(|t| delta.powi(t as i32)).collect(),
        ))
    }

    /// `D(t) = ε^(t-1)` for small ε.
    pub fn myopic(epsilon: f64, horizon: usize) -> Result<Self> {
        DiscountSchedule::geometric(epsilon, horizon)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&d| d > 0.0)
    }
}

pub const DEFAULT_MYOPIC_EPSILON: f64 = 1e-4;

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        Err(Error::InvalidHorizon("horizon must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Instantaneous utility family.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilityKind {
    /// `Σ_k c_k 1'G^k θ`, coefficients indexed from `k = 0`.
    WalkWeighted(Vec<f64>),
    KbAggregate { phi: f64 },
    KbSquared { phi: f64 },
    Diffusion { phi: f64, length: usize },
    SpectralRadius,
    EquilibriumWelfare { psi: ResponseFunction, transform: Transform },
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilitySpec {
    pub kind: UtilityKind,
    pub theta: Option<NodeWeights>,
}

impl UtilitySpec {
    pub fn new(kind: UtilityKind) -> Self {
        UtilitySpec { kind, theta: None }
    }

    pub fn kb(phi: f64) -> Self {
        UtilitySpec::new(UtilityKind::KbAggregate { phi })
    }

    pub fn kb_squared(phi: f64) -> Self {
        UtilitySpec::new(UtilityKind::KbSquared { phi })
    }

    pub fn diffusion(phi: f64, length: usize) -> Self {
        UtilitySpec::new(UtilityKind::Diffusion { phi, length })
    }

    pub fn walks(coeffs: Vec<f64>) -> Self {
        UtilitySpec::new(UtilityKind::WalkWeighted(coeffs))
    }

    pub fn with_theta(mut self, theta: NodeWeights) -> Self {
        self.theta = Some(theta);
        self
    }

    /// Parameter checks that do not depend on a graph.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            UtilityKind::WalkWeighted(c) => {
                if c.is_empty() || c.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidParameter(
                        "walk coefficients must be non-empty and non-negative".into(),
                    ));
                }
            }
            UtilityKind::KbAggregate { phi } | UtilityKind::KbSquared { phi } => {
                if !phi.is_finite() || *phi < 0.0 {
                    return Err(Error::InvalidParameter(format!("decay {phi} must be >= 0")));
                }
            }
            UtilityKind::Diffusion { phi, .. } => {
                if !(0.0..=1.0).contains(phi) {
                    return Err(Error::InvalidParameter(format!(
                        "diffusion decay {phi} outside [0, 1]"
                    )));
                }
            }
            UtilityKind::SpectralRadius | UtilityKind::EquilibriumWelfare { .. } => {
                if self.theta.is_some() {
                    return Err(Error::InvalidParameter(
                        "node weights apply only to walk-based utilities".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, g: &Graph) -> Result<f64> {
        self.validate()?;
        let theta = match &self.theta {
            Some(t) => t.clone(),
            None => NodeWeights::uniform(g.n()),
        };
        match &self.kind {
            UtilityKind::WalkWeighted(c) => {
                let p = walk_profile_weighted(g, c.len() - 1, Some(&theta))?;
                Ok(c.iter().zip(&p.counts).map(|(a, b)| a * b).sum())
            }
            UtilityKind::KbAggregate { phi } => aggregate_kb_weighted(g, *phi, &theta),
            UtilityKind::KbSquared { phi } => aggregate_kb_squared_weighted(g, *phi, &theta),
            UtilityKind::Diffusion { phi, length } => diffusion_weighted(g, *phi, *length, &theta),
            UtilityKind::SpectralRadius => spectral_radius(g),
            UtilityKind::EquilibriumWelfare { psi, transform } => {
                let eq = solve_equilibrium(
                    g,
                    psi,
                    crate::games::DEFAULT_TOL,
                    crate::games::DEFAULT_MAX_ITER,
                )?;
                Ok(planner_welfare(&eq.action, *transform))
            }
        }
    }
}

/// `Σ_t D(t) u(G(t))`; periods with `D(t) = 0` are skipped.
pub fn evaluate_path(s: &FormationPath, d: &DiscountSchedule, u: &UtilitySpec) -> Result<f64> {
    if s.len() != d.len() {
        return Err(Error::InvalidSchedule(format!(
            "schedule has {} periods, path has {}",
            d.len(),
            s.len()
        )));
    }
    let mut total = 0.0;
    for (g, &w) in s.graphs().iter().zip(d.as_slice()) {
        if w != 0.0 {
            total += w * u.evaluate(g)?;
        }
    }
    Ok(total)
}

/// Per-period utilities.
pub fn period_utilities(s: &FormationPath, u: &UtilitySpec) -> Result<Vec<f64>> {
    s.graphs().iter().map(|g| u.evaluate(g)).collect()
}

/// Agents nominated per period (0-based internally).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSequence(Vec<usize>);

impl AgentSequence {
    pub fn new(q: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(a) = q.iter().find(|&&a| a >= n) {
            return Err(Error::InvalidInput(format!(
                "agent {} outside 1..={n}",
                a + 1
            )));
        }
        Ok(AgentSequence(q))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Weighted-path helper: true when `next - prev` is a valid weight increment.
pub fn is_weight_increment(prev: &Graph, next: &Graph) -> bool {
    let mut mass = 0.0;
    for (a, b) in next.as_slice().iter().zip(prev.as_slice()) {
        if a - b < -WEIGHT_TOLERANCE {
            return false;
        }
        mass += a - b;
    }
    (mass - 2.0).abs() <= 1e-9
}
