//! The distance-to-reference-points embedding of a bounded metric space into
//! sup-norm coordinate space.
//!
//! Point `x_i` maps to the row `(d(x_i, x_1), ..., d(x_i, x_N))`. Under the
//! sup norm this is an isometry: every coordinate difference
//! `|d(x_i, x_k) - d(x_j, x_k)|` is at most `d(x_i, x_j)` by the triangle
//! inequality, and coordinate `k = j` attains it. Boundedness makes the
//! untranslated map work as is; the translated variant subtracts the first
//! row so the first point lands at the origin.

use crate::error::Result;
use crate::metric::FiniteMetricSpace;
use crate::norms::NormSpec;
use serde::{Deserialize, Serialize};

/// Coordinates of an embedded space together with the norm the isometry is
/// claimed under and the worst pairwise residual
/// `max_{i<j} | ‖p_i - p_j‖ - d(x_i, x_j) |`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Embedding {
    pub points: Vec<Vec<f64>>,
    pub norm: NormSpec,
    pub max_residual: f64,
}

/// Worst-case pairwise residual of `points` against the space's distances,
/// measured under `norm`.
pub fn max_pairwise_residual(
    points: &[Vec<f64>],
    norm: &NormSpec,
    space: &FiniteMetricSpace,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let diff: Vec<f64> = points[i].iter().zip(&points[j]).map(|(a, b)| a - b).collect();
            worst = worst.max((norm.eval(&diff)? - space.distance(i, j)).abs());
        }
    }
    Ok(worst)
}

/// The untranslated embedding: row i is `(d(x_i, x_k))_k`. For a finite space
/// the rows are exactly the rows of the distance matrix.
pub fn frechet_sigma(space: &FiniteMetricSpace) -> Result<Embedding> {
    space.check_structure()?;
    let points = space.dist.clone();
    let norm = NormSpec::sup(space.len())?;
    let max_residual = max_pairwise_residual(&points, &norm, space)?;
    Ok(Embedding { points, norm, max_residual })
}

/// The translated embedding: sigma with the first row subtracted from every
/// row, sending the first point to the origin. Pairwise distances are
/// unchanged by the translation.
pub fn frechet_translated(space: &FiniteMetricSpace) -> Result<Embedding> {
    space.check_structure()?;
    let base = &space.dist[0];
    let points: Vec<Vec<f64>> = space
        .dist
        .iter()
        .map(|row| row.iter().zip(base).map(|(d, b)| d - b).collect())
        .collect();
    let norm = NormSpec::sup(space.len())?;
    let max_residual = max_pairwise_residual(&points, &norm, space)?;
    Ok(Embedding { points, norm, max_residual })
}
