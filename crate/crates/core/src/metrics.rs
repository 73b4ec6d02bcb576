//! Walk counts, Katz-Bonacich and diffusion centrality, spectral radius, and
//! the walk-profile dominance comparator.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Relative tolerance used when comparing walk counts.
pub const WALK_TOLERANCE: f64 = 1e-12;

const POWER_TOLERANCE: f64 = 1e-10;
const POWER_MAX_ITER: usize = 1_000_000;

/// Non-negative per-node weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeWeights(Vec<f64>);

impl NodeWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidWeights(format!(
                "weight of node {} is {v}",
                i + 1
            )));
        }
        Ok(NodeWeights(values))
    }

    pub fn uniform(n: usize) -> Self {
        NodeWeights(vec![1.0; n])
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

    fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidWeights(format!(
                "expected {n} node weights, got {}",
                self.0.len()
            )))
        }
    }
}

/// Total walk counts `1'G^k 1` for `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkProfile {
    pub counts: Vec<f64>,
}

impl WalkProfile {
    pub fn k_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{k},{c}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralityKind {
    KatzBonacich,
    Diffusion { length: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector {
    pub values: Vec<f64>,
    pub decay: f64,
    pub kind: CentralityKind,
}

impl CentralityVector {
    pub fn aggregate(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn aggregate_squares(&self) -> f64 {
        self.values.iter().map(|b| b * b).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{v}\n", i + 1));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    StrictlyDominates,
    DominatedStrictly,
    Equal,
    Incomparable,
}

impl Dominance {
    pub fn flipped(self) -> Self {
        match self {
            Dominance::StrictlyDominates => Dominance::DominatedStrictly,
            Dominance::DominatedStrictly => Dominance::StrictlyDominates,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DominanceVerdict {
    pub order: Dominance,
    pub k_checked: usize,
}

/// Default truncation depth for the comparator.
pub fn default_k_max(n: usize) -> usize {
    2 * n
}

/// `G^k x` by repeated products.
fn power_apply(g: &Graph, k: usize, x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    for _ in 0..k {
        v = g.mul_vec(&v);
    }
    v
}

pub fn walk_count(g: &Graph, k: usize) -> f64 {
    power_apply(g, k, &vec![1.0; g.n()]).iter().sum()
}

pub fn walk_count_weighted(g: &Graph, k: usize, theta: &NodeWeights) -> Result<f64> {
    theta.check_len(g.n())?;
    Ok(power_apply(g, k, theta.as_slice()).iter().sum())
}

/// `1'G^k θ` for all `k ≤ k_max` (θ = 1 when omitted).
pub fn walk_profile_weighted(
    g: &Graph,
    k_max: usize,
    theta: Option<&NodeWeights>,
) -> Result<WalkProfile> {
    let mut v = match theta {
        Some(t) => {
            t.check_len(g.n())?;
            t.as_slice().to_vec()
        }
        None => vec![1.0; g.n()],
    };
    let mut counts = Vec::with_capacity(k_max + 1);
    counts.push(v.iter().sum());
    for _ in 0..k_max {
        v = g.mul_vec(&v);
        counts.push(v.iter().sum());
    }
    Ok(WalkProfile { counts })
}

pub fn walk_profile(g: &Graph, k_max: usize) -> WalkProfile {
    walk_profile_weighted(g, k_max, None).expect("uniform weights have matching length")
}

fn check_decay(g: &Graph, phi: f64) -> Result<()> {
    if !phi.is_finite() || phi < 0.0 {
        return Err(Error::InvalidParameter(format!("decay {phi} must be >= 0")));
    }
    // lambda_max never exceeds the largest row sum.
    if phi * g.max_degree() < 1.0 {
        return Ok(());
    }
    let lambda = spectral_radius(g)?;
    if phi * lambda >= 1.0 {
        return Err(Error::Divergence(format!(
            "decay {phi} is not below 1/lambda_max = {}",
            1.0 / lambda
        )));
    }
    Ok(())
}

/// Solve `(I - φG) x = rhs`.
pub fn kb_solve(g: &Graph, phi: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    check_decay(g, phi)?;
    let n = g.n();
    if rhs.len() != n {
        return Err(Error::InvalidWeights(format!(
            "expected {n} entries, got {}",
            rhs.len()
        )));
    }
    let m = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - phi * g.weight(i, j)
    });
    let b = DVector::from_column_slice(rhs);
    let x = m
        .clone()
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Divergence("singular system".into()))?;
    let residual = (&m * &x - &b).norm();
    let scale = b.norm().max(1.0);
    if residual > 1e-10 * scale {
        return Err(Error::ConvergenceFailure {
            iterations: 1,
            detail: format!("linear solve residual {residual:e}"),
        });
    }
    Ok(x.iter().copied().collect())
}

pub fn katz_bonacich(g: &Graph, phi: f64) -> Result<CentralityVector> {
    Ok(CentralityVector {
        values: kb_solve(g, phi, &vec![1.0; g.n()])?,
        decay: phi,
        kind: CentralityKind::KatzBonacich,
    })
}

pub fn aggregate_kb(g: &Graph, phi: f64) -> Result<f64> {
    Ok(katz_bonacich(g, phi)?.aggregate())
}

pub fn aggregate_kb_squared(g: &Graph, phi: f64) -> Result<f64> {
    Ok(katz_bonacich(g, phi)?.aggregate_squares())
}

/// `1'(I - φG)^{-1} θ`.
pub fn aggregate_kb_weighted(g: &Graph, phi: f64, theta: &NodeWeights) -> Result<f64> {
    theta.check_len(g.n())?;
    Ok(kb_solve(g, phi, theta.as_slice())?.iter().sum())
}

/// `b'(I - φG)^{-1} θ`, which reduces to the sum of squares when θ = 1.
pub fn aggregate_kb_squared_weighted(g: &Graph, phi: f64, theta: &NodeWeights) -> Result<f64> {
    theta.check_len(g.n())?;
    let b = kb_solve(g, phi, &vec![1.0; g.n()])?;
    let y = kb_solve(g, phi, theta.as_slice())?;
    Ok(b.iter().zip(&y).map(|(a, c)| a * c).sum())
}

pub fn diffusion_centrality(g: &Graph, phi: f64, length: usize) -> Result<CentralityVector> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::InvalidParameter(format!(
            "diffusion decay {phi} outside [0, 1]"
        )));
    }
    let n = g.n();
    let mut term = vec![1.0; n];
    let mut values = vec![1.0; n];
    for _ in 0..length {
        term = g.mul_vec(&term).into_iter().map(|v| v * phi).collect();
        for (acc, t) in values.iter_mut().zip(&term) {
            *acc += t;
        }
    }
    Ok(CentralityVector {
        values,
        decay: phi,
        kind: CentralityKind::Diffusion { length },
    })
}

/// Weighted diffusion aggregate `Σ_{k≤L} φ^k 1'G^k θ`.
pub fn diffusion_weighted(g: &Graph, phi: f64, length: usize, theta: &NodeWeights) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::InvalidParameter(format!(
            "diffusion decay {phi} outside [0, 1]"
        )));
    }
    let p = walk_profile_weighted(g, length, Some(theta))?;
    Ok(p.counts
        .iter()
        .enumerate()
        .map(|(k, c)| phi.powi(k as i32) * c)
        .sum())
}

/// Largest adjacency eigenvalue by shifted power iteration from the all-ones vector.
pub fn spectral_radius(g: &Graph) -> Result<f64> {
    let n = g.n();
    let shift = g.max_degree();
    if shift == 0.0 {
        return Ok(0.0);
    }
    let apply = |x: &[f64]| -> Vec<f64> {
        g.mul_vec(x)
            .into_iter()
            .zip(x)
            .map(|(gx, xi)| gx + shift * xi)
            .collect()
    };
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x: Vec<f64> = vec![1.0 / (n as f64).sqrt(); n];
    for iter in 1..=POWER_MAX_ITER {
        let y = apply(&x);
        let ny = norm(&y);
        let y: Vec<f64> = y.into_iter().map(|v| v / ny).collect();
        let step = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = y;
        if step < POWER_TOLERANCE {
            let gx = g.mul_vec(&x);
            let rq: f64 = gx.iter().zip(&x).map(|(a, b)| a * b).sum();
            return Ok(rq.max(0.0));
        }
        if iter == POWER_MAX_ITER {
            break;
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: POWER_MAX_ITER,
        detail: "power iteration did not settle".into(),
    })
}

/// Compare two count sequences entrywise from `k_min` on.
pub fn compare_counts(a: &[f64], b: &[f64], k_min: usize) -> Dominance {
    let mut greater = false;
    let mut less = false;
    for (x, y) in a.iter().zip(b).skip(k_min) {
        let tol = WALK_TOLERANCE * x.abs().max(y.abs());
        if x - y > tol {
            greater = true;
        } else if y - x > tol {
            less = true;
        }
    }
    match (greater, less) {
        (true, true) => Dominance::Incomparable,
        (true, false) => Dominance::StrictlyDominates,
        (false, true) => Dominance::DominatedStrictly,
        (false, false) => Dominance::Equal,
    }
}

pub fn walk_dominates(g: &Graph, h: &Graph, k_max: usize) -> Result<DominanceVerdict> {
    if g.n() != h.n() {
        return Err(Error::InvalidComparison(format!(
            "graphs have {} and {} nodes",
            g.n(),
            h.n()
        )));
    }
    let a = walk_profile(g, k_max);
    let b = walk_profile(h, k_max);
    Ok(DominanceVerdict {
        order: compare_counts(&a.counts, &b.counts, 0),
        k_checked: k_max,
    })
}
