//! Correcting the sup-norm embedding so it becomes isometric under a norm
//! that is only (1+delta)-close to the sup norm.
//!
//! For points `x_1..x_N` of a strongly concave space with gap at least `eta`,
//! the translated embedding rows are perturbed by one slack variable per pair
//! `(m,n)`, `n < m`, living in the cube `K = [0, eta]^I`:
//!
//! ```text
//! p_n(eps)[k] = d(x_n, x_k) - d(x_1, x_k) + eps_(n,k)     (eps_(k,l) = 0 for l >= k)
//! ```
//!
//! Two facts drive everything here. First, the sup-norm distance identity:
//! `‖p_n(eps) - p_m(eps)‖_∞ = d(x_n, x_m) + eps_(m,n)` for every `eps` in `K`,
//! because strong concavity caps every other coordinate gap by
//! `d(x_n, x_m) - eta + eps <= d(x_n, x_m)`. Second, for a norm sandwiched as
//! `‖x‖ <= ‖x‖_∞ <= (1+delta)‖x‖`, the map
//!
//! ```text
//! phi_(m,n)(eps) = d(x_n, x_m) + eps_(m,n) - ‖p_n(eps) - p_m(eps)‖
//! ```
//!
//! takes values in `[0, delta/(1+delta) * (d + eps)]`, so it maps `K` into
//! itself whenever `delta/(1+delta) * (diameter + eta) <= eta`. A fixed point
//! `phi(eps') = eps'` makes every pair distance under `‖·‖` exactly
//! `d(x_n, x_m)`. Existence is guaranteed by compactness and continuity; this
//! module *searches* for the fixed point by damped Picard iteration from
//! `eps = 0` and reports honestly when the search fails: non-convergence is a
//! data outcome (`converged = false`), never a silent fallback.

use crate::error::{Error, Result};
use crate::frechet::Embedding;
use crate::metric::FiniteMetricSpace;
use crate::norms::{delta_admissible, NormSpec};
use serde::Serialize;

/// Absolute tolerance for the per-coordinate bound checks on the iteration map.
pub const PHI_BOUND_TOL: f64 = 1e-12;

/// Sample count used when certifying custom norms inside the solver.
const CERT_SAMPLES: usize = 1024;

/// The point `eps` of the cube `K = [0, eta]^I`, `I = {(m,n): n < m}`.
///
/// Slack values are stored only for `n < m` (0-based), in lexicographic order
/// by `m` then `n`; reads at `l >= k` return 0 by convention and are never
/// stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationState {
    n_points: usize,
    eta: f64,
    eps: Vec<f64>,
}

impl PerturbationState {
    /// The zero perturbation for `n_points` points with cube edge `eta > 0`.
    pub fn zero(n_points: usize, eta: f64) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::InvalidArgument("state needs at least one point".into()));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cube edge eta must be positive and finite, got {eta}"
            )));
        }
        Ok(PerturbationState {
            n_points,
            eta,
            eps: vec![0.0; n_points * (n_points - 1) / 2],
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Number of stored pair coordinates, `N(N-1)/2`.
    pub fn pair_count(&self) -> usize {
        self.eps.len()
    }

    /// The stored coordinates in canonical pair order (see [`pair_indices`]).
    pub fn coords(&self) -> &[f64] {
        &self.eps
    }

    fn index(m: usize, n: usize) -> usize {
        m * (m - 1) / 2 + n
    }

    /// Reads `eps_(m,n)`; returns 0 for `n >= m`. Panics if `m` is out of range.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        assert!(m < self.n_points, "pair index {m} out of range for {} points", self.n_points);
        if n >= m {
            0.0
        } else {
            self.eps[Self::index(m, n)]
        }
    }

    /// Writes `eps_(m,n)`. Requires `n < m < n_points` and a value in `[0, eta]`.
    pub fn set(&mut self, m: usize, n: usize, value: f64) -> Result<()> {
        if m >= self.n_points || n >= m {
            return Err(Error::InvalidArgument(format!(
                "pair ({m},{n}) is not a valid index pair for {} points",
                self.n_points
            )));
        }
        if !(0.0..=self.eta).contains(&value) {
            return Err(Error::InvalidArgument(format!(
                "slack value {value} outside the cube [0, {}]",
                self.eta
            )));
        }
        self.eps[Self::index(m, n)] = value;
        Ok(())
    }
}

/// Canonical pair enumeration `(m, n)` with `n < m`, matching the storage
/// order of [`PerturbationState`] and of per-pair residual vectors.
pub fn pair_indices(n_points: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..n_points).flat_map(|m| (0..m).map(move |n| (m, n)))
}

/// Convergence record of one fixed-point search.
#[derive(Debug, Clone, Serialize)]
pub struct IterationDiagnostics {
    /// Number of iteration-map evaluations performed.
    pub iterations: usize,
    /// Sup-norm of `phi(eps) - eps` at each step.
    pub residual_history: Vec<f64>,
    /// Residual of the returned state (the best state seen, if not converged).
    pub final_residual: f64,
    pub converged: bool,
    /// Steps where some coordinate of `phi` left `[0, delta/(1+delta)(d+eps)]`
    /// (or the cube itself) by more than [`PHI_BOUND_TOL`].
    pub bound_violations: usize,
}

/// Solver settings for [`solve_fixed_point`] and [`embed`].
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stopping tolerance on the sup-coordinate residual; `None` means
    /// `1e-12 * (diameter + eta)`.
    pub tolerance: Option<f64>,
    /// Picard damping factor in (0,1]. With the default 1.0 the solver falls
    /// back to 0.5 once the residual increases between steps.
    pub damping: f64,
    /// Cube edge to use instead of the concavity gap; must not exceed the gap.
    pub eta_override: Option<f64>,
    /// Permits norms without an analytic certificate and inadmissible
    /// distortions. In this mode coordinates that leave the cube are clamped
    /// and counted instead of raising an error, so failure regions can be
    /// mapped.
    pub allow_uncertified_norm: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 10_000,
            tolerance: None,
            damping: 1.0,
            eta_override: None,
            allow_uncertified_norm: false,
        }
    }
}

/// Full outcome of [`embed`]: the embedding, the solved slack variables, the
/// per-pair residuals `| ‖p_n - p_m‖ - d(x_n, x_m) |` in canonical pair
/// order, and the iteration record.
#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    pub embedding: Embedding,
    pub state: PerturbationState,
    pub pair_residuals: Vec<f64>,
    pub diagnostics: IterationDiagnostics,
}

/// The perturbed embedding rows `p_n(eps)` for the given slack state.
pub fn perturbed_points(
    space: &FiniteMetricSpace,
    state: &PerturbationState,
) -> Result<Vec<Vec<f64>>> {
    space.check_structure()?;
    if state.n_points() != space.len() {
        return Err(Error::InvalidArgument(format!(
            "state indexes {} points but the space has {}",
            state.n_points(),
            space.len()
        )));
    }
    let n = space.len();
    let base = &space.dist[0];
    Ok((0..n)
        .map(|row| {
            (0..n)
                .map(|k| space.dist[row][k] - base[k] + state.get(row, k))
                .collect()
        })
        .collect())
}

/// Computes `‖p_n(eps) - p_m(eps)‖_∞` and checks it equals
/// `d(x_n, x_m) + eps_(m,n)` to within a few ulps.
///
/// This identity is what strong concavity buys: a failure means the space is
/// not strongly concave with gap `eta` (or the state left the cube), and the
/// error names the coordinate where the sup escapes.
pub fn sup_distance_identity(
    space: &FiniteMetricSpace,
    state: &PerturbationState,
    n: usize,
    m: usize,
) -> Result<f64> {
    space.check_structure()?;
    if state.n_points() != space.len() {
        return Err(Error::InvalidArgument(format!(
            "state indexes {} points but the space has {}",
            state.n_points(),
            space.len()
        )));
    }
    if !(n < m && m < space.len()) {
        return Err(Error::InvalidArgument(format!(
            "need point indices n < m < {}, got n={n}, m={m}",
            space.len()
        )));
    }
    let base = &space.dist[0];
    let mut sup = f64::NEG_INFINITY;
    let mut arg = 0;
    for k in 0..space.len() {
        let pn = space.dist[n][k] - base[k] + state.get(n, k);
        let pm = space.dist[m][k] - base[k] + state.get(m, k);
        let gap = (pn - pm).abs();
        if gap > sup {
            sup = gap;
            arg = k;
        }
    }
    let expected = space.dist[n][m] + state.get(m, n);
    let tol = 4.0 * f64::EPSILON * (space.diameter() + state.eta()).max(1.0);
    if (sup - expected).abs() > tol {
        return Err(Error::IdentityViolation { n, m, coord: arg, actual: sup, expected });
    }
    Ok(sup)
}

struct PhiEngine<'a> {
    space: &'a FiniteMetricSpace,
    norm: &'a NormSpec,
    delta: f64,
    eta: f64,
    /// Tolerance for the per-pair sup-distance identity check.
    identity_tol: f64,
    /// Clamp-and-count cube exits instead of erroring (override mode).
    clamp_mode: bool,
}

impl PhiEngine<'_> {
    /// One application of the iteration map; returns the new state and
    /// whether any coordinate broke its bound this step.
    ///
    /// The sup-distance identity is asserted for every pair at every visited
    /// state; it is the hypothesis everything else rests on.
    fn apply(&self, state: &PerturbationState) -> Result<(PerturbationState, bool)> {
        let points = perturbed_points(self.space, state)?;
        let mut next = PerturbationState::zero(state.n_points(), self.eta)?;
        let mut flagged = false;
        let ratio = self.delta / (1.0 + self.delta);
        for (m, n) in pair_indices(state.n_points()) {
            let diff: Vec<f64> = points[n].iter().zip(&points[m]).map(|(a, b)| a - b).collect();
            let d_plus_eps = self.space.dist[n][m] + state.get(m, n);
            let (mut sup, mut arg) = (f64::NEG_INFINITY, 0);
            for (k, &v) in diff.iter().enumerate() {
                if v.abs() > sup {
                    sup = v.abs();
                    arg = k;
                }
            }
            if (sup - d_plus_eps).abs() > self.identity_tol {
                return Err(Error::IdentityViolation {
                    n,
                    m,
                    coord: arg,
                    actual: sup,
                    expected: d_plus_eps,
                });
            }
            let raw = d_plus_eps - self.norm.eval(&diff)?;
            let soft_bound = ratio * d_plus_eps;
            if raw < -PHI_BOUND_TOL || raw > soft_bound + PHI_BOUND_TOL {
                flagged = true;
            }
            if raw < -PHI_BOUND_TOL || raw > self.eta + PHI_BOUND_TOL {
                if !self.clamp_mode {
                    return Err(Error::CubeExit { n, m, eta: self.eta, value: raw });
                }
                flagged = true;
            }
            next.set(m, n, raw.clamp(0.0, self.eta))?;
        }
        Ok((next, flagged))
    }
}

/// Resolved solve parameters shared between the strict public entry points.
struct Prepared {
    eta: f64,
    delta: f64,
    tolerance: f64,
    identity_tol: f64,
}

fn prepare(space: &FiniteMetricSpace, norm: &NormSpec, config: &SolverConfig) -> Result<Prepared> {
    space.check_structure()?;
    if norm.dimension() != space.len() {
        return Err(Error::DimensionMismatch { expected: space.len(), got: norm.dimension() });
    }
    if !(config.damping > 0.0 && config.damping <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0,1], got {}",
            config.damping
        )));
    }
    if config.max_iterations == 0 {
        return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
    }

    let report = space.concavity_report()?;
    let diameter = report.diameter;
    if report.gap <= 0.0 {
        let (i, j, k) = report.witness_triple.unwrap_or((0, 0, 0));
        return Err(Error::NotStronglyConcave {
            i,
            j,
            k,
            slack: report.gap,
            required: f64::MIN_POSITIVE,
        });
    }

    // Cube edge: the concavity gap by default. Below 3 points there are no
    // triples (the gap is the +inf sentinel); the diameter is the natural
    // finite edge there, and 1.0 covers the single-point space.
    let eta = match config.eta_override {
        Some(e) => {
            if !(e > 0.0) || !e.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "eta override must be positive and finite, got {e}"
                )));
            }
            if e > report.gap {
                return Err(Error::InvalidArgument(format!(
                    "eta override {e} exceeds the concavity gap {}",
                    report.gap
                )));
            }
            e
        }
        None if report.gap.is_finite() => report.gap,
        None if diameter > 0.0 => diameter,
        None => 1.0,
    };

    let cert = norm.certify_distortion(CERT_SAMPLES)?;
    if !cert.certified && !config.allow_uncertified_norm {
        return Err(Error::UncertifiedNorm);
    }
    if space.len() > 1 && !delta_admissible(cert.delta, eta, diameter)? && !config.allow_uncertified_norm
    {
        return Err(Error::NotAdmissible { delta: cert.delta, eta, diameter });
    }

    let tolerance = match config.tolerance {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive and finite, got {t}"
            )))
        }
        None => 1e-12 * (diameter + eta),
    };

    Ok(Prepared {
        eta,
        delta: cert.delta,
        tolerance,
        identity_tol: 4.0 * f64::EPSILON * (diameter + eta).max(1.0),
    })
}

/// One application of the iteration map
/// `phi_(m,n)(eps) = d(x_n, x_m) + eps_(m,n) - ‖p_n(eps) - p_m(eps)‖`.
///
/// Checks the norm certificate and the cube-invariance condition up front; a
/// coordinate leaving `[0, eta]` beyond [`PHI_BOUND_TOL`] is an error naming
/// the pair. Stored coordinates are clamped to `[0, eta]` to absorb rounding.
pub fn phi_map(
    space: &FiniteMetricSpace,
    norm: &NormSpec,
    state: &PerturbationState,
) -> Result<PerturbationState> {
    let config = SolverConfig { eta_override: Some(state.eta()), ..SolverConfig::default() };
    let prep = prepare(space, norm, &config)?;
    let engine = PhiEngine {
        space,
        norm,
        delta: prep.delta,
        eta: prep.eta,
        identity_tol: prep.identity_tol,
        clamp_mode: false,
    };
    Ok(engine.apply(state)?.0)
}

/// Searches for a fixed point of the iteration map by damped Picard iteration
/// from `eps = 0`.
///
/// Stops when the sup-coordinate residual `‖phi(eps) - eps‖_∞` drops to the
/// tolerance, returning the state that passed. Hitting `max_iterations` is
/// not an error: the best state seen is returned with `converged = false` and
/// the full residual history, so callers can map the failure region.
pub fn solve_fixed_point(
    space: &FiniteMetricSpace,
    norm: &NormSpec,
    config: &SolverConfig,
) -> Result<(PerturbationState, IterationDiagnostics)> {
    let prep = prepare(space, norm, config)?;
    let engine = PhiEngine {
        space,
        norm,
        delta: prep.delta,
        eta: prep.eta,
        identity_tol: prep.identity_tol,
        clamp_mode: config.allow_uncertified_norm,
    };

    let mut eps = PerturbationState::zero(space.len(), prep.eta)?;
    let mut gamma = config.damping;
    let mut history = Vec::new();
    let mut bound_violations = 0usize;
    let mut best = eps.clone();
    let mut best_residual = f64::INFINITY;
    let mut prev_residual = f64::INFINITY;

    for it in 1..=config.max_iterations {
        let (phi, flagged) = engine.apply(&eps)?;
        if flagged {
            bound_violations += 1;
        }
        let residual = eps
            .coords()
            .iter()
            .zip(phi.coords())
            .fold(0.0f64, |r, (a, b)| r.max((b - a).abs()));
        history.push(residual);
        if residual < best_residual {
            best_residual = residual;
            best = eps.clone();
        }
        if residual <= prep.tolerance {
            return Ok((
                eps,
                IterationDiagnostics {
                    iterations: it,
                    residual_history: history,
                    final_residual: residual,
                    converged: true,
                    bound_violations,
                },
            ));
        }
        if gamma == 1.0 && residual > prev_residual {
            // Undamped iteration started oscillating; damp the rest of the way.
            gamma = 0.5;
        }
        prev_residual = residual;
        for idx in 0..eps.pair_count() {
            let mixed = (1.0 - gamma) * eps.eps[idx] + gamma * phi.eps[idx];
            eps.eps[idx] = mixed.clamp(0.0, prep.eta);
        }
    }

    Ok((
        best,
        IterationDiagnostics {
            iterations: config.max_iterations,
            residual_history: history,
            final_residual: best_residual,
            converged: false,
            bound_violations,
        },
    ))
}

/// Embeds a strongly concave space isometrically under `norm`: solves for the
/// slack variables, perturbs the rows, and measures every pair residual under
/// the target norm.
pub fn embed(
    space: &FiniteMetricSpace,
    norm: &NormSpec,
    config: &SolverConfig,
) -> Result<EmbeddingResult> {
    let (state, diagnostics) = solve_fixed_point(space, norm, config)?;
    let points = perturbed_points(space, &state)?;
    let mut pair_residuals = Vec::with_capacity(state.pair_count());
    for (m, n) in pair_indices(space.len()) {
        let diff: Vec<f64> = points[n].iter().zip(&points[m]).map(|(a, b)| a - b).collect();
        pair_residuals.push((norm.eval(&diff)? - space.dist[n][m]).abs());
    }
    let max_residual = pair_residuals.iter().copied().fold(0.0f64, f64::max);
    Ok(EmbeddingResult {
        embedding: Embedding { points, norm: norm.clone(), max_residual },
        state,
        pair_residuals,
        diagnostics,
    })
}
