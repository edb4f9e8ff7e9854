//! Latin hypercube designs with maximin selection.

use crate::error::{Error, Result};
use crate::problem::Bounds;
use crate::rng::RngStream;

/// Default number of candidate designs screened by [`lhs_maximin`].
pub const DEFAULT_MAXIMIN_CANDIDATES: usize = 10;

/// `n` points in `D` dimensions, one row per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub points: Vec<Vec<f64>>,
}

impl Design {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest Euclidean distance between two distinct points, `+inf` for a
    /// single point.
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                best = best.min(d2);
            }
        }
        best.sqrt()
    }
}

/// Stratified sample: in every dimension each of the `n` equal-width strata
/// holds exactly one point, placed uniformly inside its stratum.
pub fn lhs(n: usize, bounds: &Bounds, rng: &mut RngStream) -> Result<Design> {
    if n < 1 {
        return Err(Error::Contract("a design needs at least one point".into()));
    }
    let dim = bounds.dim();
    let mut points = vec![vec![0.0; dim]; n];
    for d in 0..dim {
        let strata = rng.permutation(n);
        let (lo, width) = (bounds.lower()[d], bounds.width(d));
        for (point, &k) in points.iter_mut().zip(&strata) {
            let unit = (k as f64 + rng.uniform()) / n as f64;
            // Rounding can push the top stratum onto ub; clamp keeps it inside.
            point[d] = (lo + unit * width).min(bounds.upper()[d]);
        }
    }
    Ok(Design { points })
}

/// Draws `n_candidates` independent LHS designs and keeps the one with the
/// largest minimum pairwise distance (first one wins ties).
pub fn lhs_maximin(
    n: usize,
    bounds: &Bounds,
    rng: &mut RngStream,
    n_candidates: usize,
) -> Result<Design> {
    let (best, mut candidates) = lhs_maximin_candidates(n, bounds, rng, n_candidates)?;
    Ok(candidates.swap_remove(best))
}

/// Like [`lhs_maximin`] but returns every candidate and the index chosen.
pub fn lhs_maximin_candidates(
    n: usize,
    bounds: &Bounds,
    rng: &mut RngStream,
    n_candidates: usize,
) -> Result<(usize, Vec<Design>)> {
    if n_candidates < 1 {
        return Err(Error::Contract("need at least one candidate design".into()));
    }
    let mut candidates = Vec::with_capacity(n_candidates);
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for c in 0..n_candidates {
        let design = lhs(n, bounds, rng)?;
        let score = design.min_pairwise_distance();
        if score > best_score {
            best_score = score;
            best = c;
        }
        candidates.push(design);
    }
    Ok((best, candidates))
}
