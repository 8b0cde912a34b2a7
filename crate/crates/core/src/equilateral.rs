//! Equilateral point sets in near-sup norms, built from the discrete metric.
//!
//! The discrete space on n points has concavity gap 1 and diameter 1, so any
//! norm with distortion delta <= 1 against the sup norm is admissible and the
//! fixed-point embedding yields n points at pairwise distance exactly 1. A
//! requested side length other than 1 is handled by scaling the points
//! afterwards (norms are homogeneous).

use crate::error::{Error, Result};
use crate::fixed_point::{embed, EmbeddingResult, SolverConfig};
use crate::frechet::Embedding;
use crate::metric::FiniteMetricSpace;
use crate::norms::NormSpec;
use serde::Serialize;

/// A pair of points whose distance misses the target side length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairViolation {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

/// Outcome of [`verify_equilateral`]: empty violations means every pairwise
/// distance is within `tol` of `lambda`.
#[derive(Debug, Clone, Serialize)]
pub struct EquilateralReport {
    pub lambda: f64,
    pub tol: f64,
    pub violations: Vec<PairViolation>,
}

impl EquilateralReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Builds `n` points whose pairwise distances under `norm` are all 1, by
/// embedding the discrete n-point space. The points are rows of length n with
/// finitely many nonzero entries.
pub fn equilateral_set(n: usize, norm: &NormSpec, config: &SolverConfig) -> Result<EmbeddingResult> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "an equilateral set needs at least 2 points, got {n}"
        )));
    }
    embed(&FiniteMetricSpace::discrete(n)?, norm, config)
}

/// Checks that all pairwise distances of `points` under `norm` are within
/// `tol` of `lambda`, listing the offending pairs otherwise.
pub fn verify_equilateral(
    points: &[Vec<f64>],
    norm: &NormSpec,
    lambda: f64,
    tol: f64,
) -> Result<EquilateralReport> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "equilateral verification needs at least 2 points, got {}",
            points.len()
        )));
    }
    if !(lambda > 0.0) || !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need lambda > 0 and tol >= 0, got lambda={lambda}, tol={tol}"
        )));
    }
    let mut violations = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let diff: Vec<f64> = points[i].iter().zip(&points[j]).map(|(a, b)| a - b).collect();
            let distance = norm.eval(&diff)?;
            if (distance - lambda).abs() > tol {
                violations.push(PairViolation { i, j, distance });
            }
        }
    }
    Ok(EquilateralReport { lambda, tol, violations })
}

/// Scales all points of an embedding by `lambda > 0` and re-measures the
/// residual against the scaled target distances. Turns a 1-equilateral set
/// into a lambda-equilateral one.
pub fn scale_embedding(embedding: &Embedding, lambda: f64) -> Result<Embedding> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale factor must be positive and finite, got {lambda}"
        )));
    }
    let points: Vec<Vec<f64>> = embedding
        .points
        .iter()
        .map(|p| p.iter().map(|x| lambda * x).collect())
        .collect();
    // Target distances scale with the points; the residual bound is the scaled
    // original residual plus whatever rounding the homogeneity step adds.
    let mut homogeneity_gap = 0.0f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let scaled: Vec<f64> = points[i].iter().zip(&points[j]).map(|(a, b)| a - b).collect();
            let original: Vec<f64> = embedding.points[i]
                .iter()
                .zip(&embedding.points[j])
                .map(|(a, b)| a - b)
                .collect();
            let drift = (embedding.norm.eval(&scaled)? - lambda * embedding.norm.eval(&original)?).abs();
            homogeneity_gap = homogeneity_gap.max(drift);
        }
    }
    Ok(Embedding {
        points,
        norm: embedding.norm.clone(),
        max_residual: lambda * embedding.max_residual + homogeneity_gap,
    })
}
