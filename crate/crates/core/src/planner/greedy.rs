use rayon::prelude::*;

use super::{ties, FormationPath, UtilitySpec};
use crate::canon::{canonical_form, CanonicalForm, MAX_CANON_NODES};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Each period adds the link whose successor maximizes `u`. Ties go to the
/// smallest canonical form (or, above the canonical-form size limit, to the
/// first open pair).
pub fn greedy_path(n: usize, horizon: usize, u: &UtilitySpec) -> Result<FormationPath> {
    let cap = n * n.saturating_sub(1) / 2;
    if horizon == 0 || horizon > cap {
        return Err(Error::InvalidHorizon(format!(
            "horizon {horizon} outside 1..={cap}"
        )));
    }
    u.validate()?;
    let mut g = Graph::new_empty(n)?;
    let mut graphs = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        g = greedy_step(&g, u)?;
        graphs.push(g.clone());
    }
    FormationPath::unweighted(graphs)
}

pub(crate) fn greedy_step(g: &Graph, u: &UtilitySpec) -> Result<Graph> {
    let canon = g.n() <= MAX_CANON_NODES;
    let scored: Vec<(Graph, Option<CanonicalForm>, f64)> = g
        .successors()?
        .into_par_iter()
        .map(|h| {
            let key = if canon { Some(canonical_form(&h)?) } else { None };
            let v = u.evaluate(&h)?;
            Ok((h, key, v))
        })
        .collect::<Result<_>>()?;
    let best = scored
        .iter()
        .map(|s| s.2)
        .fold(f64::NEG_INFINITY, f64::max);
    let choice = scored
        .into_iter()
        .filter(|s| s.2 == best || ties(s.2, best))
        .min_by(|a, b| a.1.cmp(&b.1))
        .ok_or_else(|| Error::Saturation("no open pair remains".into()))?;
    Ok(choice.0)
}
