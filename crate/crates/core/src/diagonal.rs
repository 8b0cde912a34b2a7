//! Finite diagonal argument: extract, from a lazily presented bounded
//! countable metric space, a subset whose embedding rows are coordinate-wise
//! convergent up to a tolerance.
//!
//! The infinite argument picks nested infinite index sets `A_1 ⊇ A_2 ⊇ ...` on
//! which the rows `n ↦ d(x_{n_k}, x_n)` converge, then takes `n_{k+1} = min A_k`.
//! At desk scale "converges" becomes "oscillates at most `tol` over the
//! surviving candidate pool", and the sub-sequence selection becomes value
//! bucketing: scan indices up to a horizon, and at each stage keep the most
//! populated width-`tol` bucket of the current row (buckets aligned at
//! multiples of `tol`, ties going to the lowest bucket, so extraction is
//! deterministic). Running out of candidates is reported as an explicit
//! shortfall, not papered over.
//!
//! Indices are 1-based throughout this module, matching the enumeration of a
//! countable space as `x_1, x_2, ...`.

use crate::error::{Error, Result};
use crate::fixed_point::{embed, EmbeddingResult, SolverConfig};
use crate::metric::FiniteMetricSpace;
use crate::norms::NormSpec;
use serde::Serialize;
use std::collections::BTreeMap;

/// A countable bounded metric space presented as a distance oracle over
/// 1-based indices, with a uniform bound on all distances.
pub trait LazyMetric {
    /// Distance between the i-th and j-th points, `i, j >= 1`.
    fn distance(&self, i: usize, j: usize) -> f64;
    /// Uniform upper bound on all distances; enforced on every fetched value.
    fn bound(&self) -> f64;
    /// Display label of the i-th point.
    fn label(&self, i: usize) -> String {
        format!("x{i}")
    }
}

/// Outcome of [`extract_convergent_subset`].
#[derive(Debug, Clone, Serialize)]
pub struct ExtractionResult {
    /// Extracted indices `n_1 < n_2 < ...` (1-based).
    pub indices: Vec<usize>,
    /// Tail estimate of the limit of row k: the row value at the deepest
    /// retained candidate.
    pub limits_estimate: Vec<f64>,
    /// Max deviation of row k from its limit estimate over the retained tail;
    /// at most `tol` by construction.
    pub tail_oscillation: Vec<f64>,
    /// True when the horizon was exhausted before `count` indices were found.
    pub shortfall: bool,
}

/// Composition of extraction, restriction and the fixed-point embedding.
#[derive(Debug, Clone)]
pub struct DiagonalEmbedding {
    pub extraction: ExtractionResult,
    /// The finite restriction of the lazy metric to the extracted indices.
    pub space: FiniteMetricSpace,
    pub result: EmbeddingResult,
}

fn fetch(metric: &dyn LazyMetric, i: usize, j: usize) -> Result<f64> {
    let d = metric.distance(i, j);
    if !d.is_finite() || d < 0.0 {
        return Err(Error::InvalidEntry { i, j, value: d });
    }
    let bound = metric.bound();
    if d > bound + 1e-9 * bound.max(1.0) {
        return Err(Error::BoundExceeded { i, j, value: d, bound });
    }
    Ok(d)
}

/// Axiom spot check on a small prefix of the enumeration.
fn spot_check(metric: &dyn LazyMetric, horizon: usize) -> Result<()> {
    let prefix = horizon.min(8);
    let space = restrict_to_indices(metric, &(1..=prefix).collect::<Vec<_>>())?;
    let report = space.validate(1e-9 * metric.bound().max(1.0))?;
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidArgument(format!(
            "lazy metric fails the metric axioms on its prefix: {v:?}"
        )));
    }
    Ok(())
}

/// Restricts the lazy metric to the given 1-based indices, producing a finite
/// space whose distances equal the oracle's values exactly.
pub fn restrict_to_indices(metric: &dyn LazyMetric, indices: &[usize]) -> Result<FiniteMetricSpace> {
    if indices.is_empty() {
        return Err(Error::InvalidArgument("restriction needs at least one index".into()));
    }
    let labels = indices.iter().map(|&i| metric.label(i)).collect();
    let mut dist = vec![vec![0.0; indices.len()]; indices.len()];
    for (a, &i) in indices.iter().enumerate() {
        for (b, &j) in indices.iter().enumerate().skip(a + 1) {
            let d = fetch(metric, i, j)?;
            dist[a][b] = d;
            dist[b][a] = d;
        }
    }
    FiniteMetricSpace::new(labels, dist)
}

/// Scans indices `1..=horizon` and extracts `count` indices such that within
/// the surviving candidate pool every row `d(x_{n_k}, ·)` oscillates at most
/// `tol`. Returns fewer indices with `shortfall = true` when the pool runs
/// dry first.
pub fn extract_convergent_subset(
    metric: &dyn LazyMetric,
    count: usize,
    tol: f64,
    horizon: usize,
) -> Result<ExtractionResult> {
    if count == 0 {
        return Err(Error::InvalidArgument("extraction count must be at least 1".into()));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "extraction tolerance must be positive and finite, got {tol}"
        )));
    }
    if horizon < 2 {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} is too small for even one extraction stage"
        )));
    }
    spot_check(metric, horizon)?;

    let mut pool: Vec<usize> = (1..=horizon).collect();
    let mut indices: Vec<usize> = Vec::with_capacity(count);
    let mut shortfall = false;
    while indices.len() < count {
        if pool.len() < 2 {
            // Selecting the last candidate would leave no tail to certify.
            shortfall = true;
            break;
        }
        let nk = pool[0];
        indices.push(nk);
        let mut buckets: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for &n in &pool[1..] {
            let d = fetch(metric, nk, n)?;
            buckets.entry((d / tol).floor() as i64).or_default().push(n);
        }
        // Most populated bucket wins; ascending iteration makes ties go to
        // the lowest bucket.
        let mut winner: &Vec<usize> = buckets.values().next().expect("pool had a tail");
        for members in buckets.values() {
            if members.len() > winner.len() {
                winner = members;
            }
        }
        pool = winner.clone();
    }

    // Limits and oscillations over the retained tail: the surviving pool plus
    // the later extracted indices (each of which survived every earlier cut).
    let mut limits_estimate = Vec::with_capacity(indices.len());
    let mut tail_oscillation = Vec::with_capacity(indices.len());
    for (k, &nk) in indices.iter().enumerate() {
        let tail: Vec<usize> = indices[k + 1..].iter().chain(pool.iter()).copied().collect();
        let deepest = *tail.iter().max().expect("every selected row keeps a tail");
        let alpha = fetch(metric, nk, deepest)?;
        let mut osc = 0.0f64;
        for &n in &tail {
            osc = osc.max((fetch(metric, nk, n)? - alpha).abs());
        }
        limits_estimate.push(alpha);
        tail_oscillation.push(osc);
    }

    Ok(ExtractionResult { indices, limits_estimate, tail_oscillation, shortfall })
}

/// Extracts a coordinate-convergent subset and embeds its restriction under
/// `norm` (whose dimension must equal `count`). The restriction must be
/// strongly concave; a shortfall is an error here.
pub fn embed_via_c(
    metric: &dyn LazyMetric,
    count: usize,
    norm: &NormSpec,
    tol: f64,
    horizon: usize,
    config: &SolverConfig,
) -> Result<DiagonalEmbedding> {
    let extraction = extract_convergent_subset(metric, count, tol, horizon)?;
    if extraction.shortfall {
        return Err(Error::Shortfall { requested: count, got: extraction.indices.len() });
    }
    let space = restrict_to_indices(metric, &extraction.indices)?;
    let result = embed(&space, norm, config)?;
    Ok(DiagonalEmbedding { extraction, space, result })
}

/// The lambda-equilateral countable space.
#[derive(Debug, Clone)]
pub struct EquilateralFamily {
    pub lambda: f64,
}

impl LazyMetric for EquilateralFamily {
    fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.lambda
        }
    }
    fn bound(&self) -> f64 {
        self.lambda
    }
}

/// The countable discrete space (all distances 1).
#[derive(Debug, Clone)]
pub struct DiscreteFamily;

impl LazyMetric for DiscreteFamily {
    fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            1.0
        }
    }
    fn bound(&self) -> f64 {
        1.0
    }
}

/// `d(x_i, x_j) = |1/i - 1/j| + 1` for `i != j`: row k converges to
/// `1 + 1/n_k`, so limits have a closed form to test against.
#[derive(Debug, Clone)]
pub struct HarmonicFamily;

impl LazyMetric for HarmonicFamily {
    fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            (1.0 / i as f64 - 1.0 / j as f64).abs() + 1.0
        }
    }
    fn bound(&self) -> f64 {
        2.0
    }
}

/// Points alternate between two types by index parity; distances depend only
/// on whether the types match. Requires `within <= 2 * cross` so the triangle
/// inequality holds.
#[derive(Debug, Clone)]
pub struct TwoClusterFamily {
    pub within: f64,
    pub cross: f64,
}

impl TwoClusterFamily {
    pub fn new(within: f64, cross: f64) -> Result<Self> {
        if !(within > 0.0 && cross > 0.0) || within > 2.0 * cross {
            return Err(Error::InvalidArgument(format!(
                "two-cluster distances need 0 < within <= 2*cross, got within={within}, cross={cross}"
            )));
        }
        Ok(TwoClusterFamily { within, cross })
    }
}

impl LazyMetric for TwoClusterFamily {
    fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else if i % 2 == j % 2 {
            self.within
        } else {
            self.cross
        }
    }
    fn bound(&self) -> f64 {
        self.within.max(self.cross)
    }
}
