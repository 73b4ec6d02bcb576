//! Network games with increasing convex best responses `a_i = ψ(Σ_j g_ij a_j)`.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::spectral_radius;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_TRACE_DEPTH: usize = 64;

/// Best-response function ψ.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseFunction {
    /// `a + b x`
    Linear { intercept: f64, slope: f64 },
    /// `a + b x + c x^2`
    Quadratic { a: f64, b: f64, c: f64 },
    /// `a + b x^p` with `p >= 1`
    Power { a: f64, b: f64, exponent: f64 },
    /// `base + ln(1 + exp(x - shift))`
    Softplus { base: f64, shift: f64 },
    /// Piecewise-linear interpolation through `(xs[k], ys[k])`, extended
    /// linearly past the last knot.
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
}

impl ResponseFunction {
    pub fn linear(intercept: f64, slope: f64) -> Self {
        ResponseFunction::Linear { intercept, slope }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            ResponseFunction::Linear { intercept, slope } => intercept + slope * x,
            ResponseFunction::Quadratic { a, b, c } => a + b * x + c * x * x,
            ResponseFunction::Power { a, b, exponent } => a + b * x.max(0.0).powf(*exponent),
            ResponseFunction::Softplus { base, shift } => base + softplus(x - shift),
            ResponseFunction::Tabulated { xs, ys } => {
                let k = segment(xs, x);
                let s = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
                ys[k] + s * (x - xs[k])
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            ResponseFunction::Linear { slope, .. } => *slope,
            ResponseFunction::Quadratic { b, c, .. } => b + 2.0 * c * x,
            ResponseFunction::Power { b, exponent, .. } => {
                b * exponent * x.max(0.0).powf(exponent - 1.0)
            }
            ResponseFunction::Softplus { shift, .. } => 1.0 / (1.0 + (shift - x).exp()),
            ResponseFunction::Tabulated { xs, ys } => {
                let k = segment(xs, x);
                (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])
            }
        }
    }

    /// Check parameters, then monotonicity and convexity on a grid over `[0, hi]`.
    pub fn validate(&self, hi: f64) -> Result<()> {
        match self {
            ResponseFunction::Power { exponent, .. } if *exponent < 1.0 => {
                return Err(Error::InvalidParameter(format!(
                    "power exponent {exponent} < 1 is concave"
                )))
            }
            ResponseFunction::Tabulated { xs, ys } => {
                if xs.len() < 2 || xs.len() != ys.len() {
                    return Err(Error::InvalidParameter(
                        "tabulated response needs at least two matching knots".into(),
                    ));
                }
                if xs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter(
                        "tabulated knots must be strictly increasing".into(),
                    ));
                }
            }
            _ => {}
        }
        if self.value(0.0) < 0.0 {
            return Err(Error::InvalidParameter("response is negative at 0".into()));
        }
        let hi = if hi.is_finite() && hi > 0.0 { hi } else { 1.0 };
        let steps = 256;
        let h = hi / steps as f64;
        let mut prev_d = f64::NEG_INFINITY;
        for s in 0..=steps {
            let x = s as f64 * h;
            let d = self.derivative(x);
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "response is decreasing at {x}"
                )));
            }
            if d < prev_d - 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "response is not convex near {x}"
                )));
            }
            prev_d = d;
        }
        Ok(())
    }
}

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn segment(xs: &[f64], x: f64) -> usize {
    let last = xs.len() - 2;
    (0..=last).find(|&k| x < xs[k + 1]).unwrap_or(last)
}

/// Planner's per-agent transform of equilibrium actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    Square,
    ExpMinusOne,
}

impl Transform {
    pub fn apply(self, a: f64) -> f64 {
        match self {
            Transform::Identity => a,
            Transform::Square => a * a,
            Transform::ExpMinusOne => a.exp_m1(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumTrace {
    /// `x^(0) = 0, x^(1), ...`, capped at the retained depth.
    pub iterates: Vec<Vec<f64>>,
    /// Final iterate.
    pub action: Vec<f64>,
    pub converged: bool,
    /// Sup-norm of the last step.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub trace_depth: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            trace_depth: DEFAULT_TRACE_DEPTH,
        }
    }
}

fn step(g: &Graph, psi: &ResponseFunction, x: &[f64]) -> (Vec<f64>, f64) {
    let z = g.mul_vec(x);
    let max_slope = z.iter().map(|&zi| psi.derivative(zi)).fold(0.0, f64::max);
    (z.into_iter().map(|zi| psi.value(zi)).collect(), max_slope)
}

pub fn solve_equilibrium(
    g: &Graph,
    psi: &ResponseFunction,
    tol: f64,
    max_iter: usize,
) -> Result<EquilibriumTrace> {
    solve_equilibrium_with(
        g,
        psi,
        SolveOptions {
            tol,
            max_iter,
            ..SolveOptions::default()
        },
    )
}

/// Fixed-point iteration from zero. Iterates rise monotonically, so the slope
/// bound is checked at the current point on every step; the final check is
/// the tightest one.
pub fn solve_equilibrium_with(
    g: &Graph,
    psi: &ResponseFunction,
    opts: SolveOptions,
) -> Result<EquilibriumTrace> {
    let lambda = spectral_radius(g)?;
    let n = g.n();
    let mut x = vec![0.0; n];
    let mut iterates = vec![x.clone()];
    for m in 1..=opts.max_iter {
        let (next, slope) = step(g, psi, &x);
        if lambda > 0.0 && slope * lambda >= 1.0 {
            return Err(Error::Divergence(format!(
                "response slope {slope} is not below 1/lambda_max = {}",
                1.0 / lambda
            )));
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence("iterates are not finite".into()));
        }
        let residual = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        if iterates.len() < opts.trace_depth {
            iterates.push(x.clone());
        }
        if residual < opts.tol {
            let hi = g.mul_vec(&x).into_iter().fold(0.0, f64::max);
            psi.validate(hi)?;
            return Ok(EquilibriumTrace {
                iterates,
                action: x,
                converged: true,
                residual,
                iterations: m,
            });
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: opts.max_iter,
        detail: "best-response iteration did not settle".into(),
    })
}

/// `Σ_k x_k^(m)` after `m` best-response rounds from zero.
///
/// Truncated sums are defined whenever ψ is finite, so no contraction bound
/// is imposed here.
pub fn iterate_sums(g: &Graph, psi: &ResponseFunction, m: usize) -> Result<f64> {
    Ok(iterate_vector(g, psi, m)?.iter().sum())
}

/// `x^(m)` itself.
pub fn iterate_vector(g: &Graph, psi: &ResponseFunction, m: usize) -> Result<Vec<f64>> {
    let mut x = vec![0.0; g.n()];
    for _ in 0..m {
        x = step(g, psi, &x).0;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence("iterates are not finite".into()));
        }
    }
    Ok(x)
}

pub fn planner_welfare(a: &[f64], transform: Transform) -> f64 {
    a.iter().map(|&ai| transform.apply(ai)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::katz_bonacich;

    #[test]
    fn linear_response_recovers_katz_bonacich() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap();
        let phi = 0.2;
        let eq = solve_equilibrium(&g, &ResponseFunction::linear(1.0, phi), 1e-13, 10_000).unwrap();
        let kb = katz_bonacich(&g, phi).unwrap();
        for (a, b) in eq.action.iter().zip(&kb.values) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(eq.converged);
    }

    #[test]
    fn empty_graph_plays_psi_of_zero() {
        let g = Graph::new_empty(4).unwrap();
        let psi = ResponseFunction::Quadratic { a: 1.5, b: 0.1, c: 0.001 };
        let eq = solve_equilibrium(&g, &psi, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(eq.action, vec![1.5; 4]);
    }

    #[test]
    fn quadratic_dyad_matches_closed_form() {
        // a = 1 + 0.1 a + 0.001 a^2  =>  0.001 a^2 - 0.9 a + 1 = 0, smaller root.
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let psi = ResponseFunction::Quadratic { a: 1.0, b: 0.1, c: 0.001 };
        let eq = solve_equilibrium(&g, &psi, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let root = (0.9 - (0.81f64 - 0.004).sqrt()) / 0.002;
        assert!((eq.action[0] - root).abs() < 1e-10);
        assert!((eq.action[1] - root).abs() < 1e-10);
    }

    #[test]
    fn iterates_rise_monotonically() {
        let g = Graph::complete(4).unwrap();
        let psi = ResponseFunction::Softplus { base: 0.5, shift: 3.0 };
        let eq = solve_equilibrium(&g, &ResponseFunction::linear(1.0, 0.2), 1e-12, 1000).unwrap();
        for w in eq.iterates.windows(2) {
            assert!(w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
        }
        assert!(eq.iterates.len() <= DEFAULT_TRACE_DEPTH);
        let x2 = iterate_vector(&g, &psi, 2).unwrap();
        let x3 = iterate_vector(&g, &psi, 3).unwrap();
        assert!(x2.iter().zip(&x3).all(|(a, b)| a <= b));
    }

    #[test]
    fn slope_above_bound_diverges() {
        let g = Graph::complete(4).unwrap();
        let r = solve_equilibrium(&g, &ResponseFunction::linear(1.0, 0.5), DEFAULT_TOL, 1000);
        assert!(matches!(r, Err(Error::Divergence(_))));
    }

    #[test]
    fn iterate_sum_basics() {
        let g = Graph::path(4, &[0, 1, 2, 3]).unwrap();
        let psi = ResponseFunction::Quadratic { a: 1.0, b: 0.1, c: 0.001 };
        assert_eq!(iterate_sums(&g, &psi, 0).unwrap(), 0.0);
        assert_eq!(iterate_sums(&g, &psi, 1).unwrap(), 4.0);
    }

    #[test]
    fn validation_rejects_concave() {
        assert!(ResponseFunction::Quadratic { a: 1.0, b: 0.5, c: -0.01 }.validate(10.0).is_err());
        assert!(ResponseFunction::Power { a: 1.0, b: 1.0, exponent: 0.5 }.validate(10.0).is_err());
        assert!(ResponseFunction::Softplus { base: 0.1, shift: 2.0 }.validate(10.0).is_ok());
        let tab = ResponseFunction::Tabulated { xs: vec![0.0, 1.0, 2.0], ys: vec![1.0, 1.1, 1.3] };
        assert!(tab.validate(3.0).is_ok());
        assert!((tab.value(1.5) - 1.2).abs() < 1e-12);
        let bent = ResponseFunction::Tabulated { xs: vec![0.0, 1.0, 2.0], ys: vec![1.0, 1.3, 1.4] };
        assert!(bent.validate(3.0).is_err());
    }

    #[test]
    fn welfare_reductions() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2)]).unwrap();
        let phi = 0.1;
        let eq = solve_equilibrium(&g, &ResponseFunction::linear(1.0, phi), 1e-13, 1000).unwrap();
        let kb = katz_bonacich(&g, phi).unwrap();
        assert!((planner_welfare(&eq.action, Transform::Identity) - kb.aggregate()).abs() < 1e-10);
        assert!((planner_welfare(&eq.action, Transform::Square) - kb.aggregate_squares()).abs() < 1e-10);
        assert!((planner_welfare(&[0.0, 1.0], Transform::ExpMinusOne) - (1f64.exp() - 1.0)).abs() < 1e-15);
    }
}
