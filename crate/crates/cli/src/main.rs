//! Command-line front end: validate and report on distance matrices, run the
//! embedding pipeline, build equilateral sets, extract convergent subsets
//! from builtin countable families, and sweep distortion levels.
//!
//! Exit codes: 0 on success (and convergence), 1 on validation failure,
//! non-convergence or extraction shortfall, 2 on structural or argument
//! errors (unreadable input, schema mismatches, inadmissible parameters).
//!
//! Distance matrices are read from JSON `{"labels": [...], "dist": [[...]]}`
//! or, for `.csv` paths, from an NxN numeric grid with an optional leading
//! label row. Norms are read from JSON
//! `{"kind": "sup"|"weighted_sup"|"sup_plus_l1", "dimension": n, ...}`.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use supembed::diagonal::{
    extract_convergent_subset, DiscreteFamily, EquilateralFamily, HarmonicFamily, LazyMetric,
    TwoClusterFamily,
};
use supembed::equilateral::{equilateral_set, scale_embedding};
use supembed::fixed_point::embed;
use supembed::{FiniteMetricSpace, NormSpec, SolverConfig};

#[derive(Parser)]
#[command(
    name = "supembed",
    version,
    about = "Isometric embeddings of strongly concave metric spaces into near-sup norms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SolverFlags {
    /// Maximum fixed-point iterations.
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// Stopping tolerance on the iteration residual [default: 1e-12*(diameter+eta)].
    #[arg(long)]
    tolerance: Option<f64>,
    /// Picard damping factor in (0,1].
    #[arg(long, default_value_t = 1.0)]
    damping: f64,
    /// Cube edge to use instead of the concavity gap (must not exceed it).
    #[arg(long)]
    eta_override: Option<f64>,
    /// Accept uncertified norms and inadmissible distortions; cube exits are
    /// then clamped and counted instead of failing.
    #[arg(long)]
    allow_uncertified_norm: bool,
}

impl SolverFlags {
    fn to_config(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            damping: self.damping,
            eta_override: self.eta_override,
            allow_uncertified_norm: self.allow_uncertified_norm,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms of a distance matrix and list every violation.
    Validate {
        /// Distance matrix (JSON, or CSV for .csv paths).
        #[arg(long)]
        input: PathBuf,
        /// Additive tolerance [default: 1e-12 * diameter].
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Concavity gap, witness triple, separation and diameter of a space.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
    /// Embed a space isometrically under a norm; prints the embedding and
    /// solver diagnostics as one JSON object.
    Embed {
        #[arg(long)]
        input: PathBuf,
        /// Norm JSON; its dimension must equal the point count.
        #[arg(long)]
        norm_spec: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Build n points with all pairwise distances lambda under a norm.
    Equilateral {
        #[arg(long)]
        n: usize,
        /// Norm JSON of dimension n.
        #[arg(long)]
        norm_spec: PathBuf,
        /// Side length; the unit set is scaled afterwards.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Extract a coordinate-convergent subset from a builtin countable family.
    Extract {
        /// One of: discrete, equilateral, harmonic, two-cluster.
        #[arg(long)]
        family: String,
        /// Side length for the equilateral family.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Same-type distance for the two-cluster family.
        #[arg(long, default_value_t = 1.0)]
        within: f64,
        /// Cross-type distance for the two-cluster family.
        #[arg(long, default_value_t = 1.5)]
        cross: f64,
        /// Number of indices to extract.
        #[arg(long)]
        count: usize,
        /// Oscillation tolerance per extracted row.
        #[arg(long)]
        tol: f64,
        /// Enumeration prefix to scan.
        #[arg(long)]
        horizon: usize,
    },
    /// Solve the embedding across a grid of distortion deltas and write a CSV
    /// of (delta, iterations, final_residual, converged) rows.
    Sweep {
        /// Space generator: discrete, equilateral or random.
        #[arg(long)]
        space: String,
        /// Point count.
        #[arg(long)]
        n: usize,
        /// Side length for the equilateral generator.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Concavity constant for the random generator.
        #[arg(long)]
        c: Option<f64>,
        /// Seed for the random generator (required with --space random).
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated distortion deltas; each is realized as a weighted
        /// sup norm with weights (1, 1/(1+delta), ..., 1/(1+delta)).
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
        /// Output CSV path.
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { input, tol } => cmd_validate(&input, tol),
        Command::Report { input } => cmd_report(&input),
        Command::Embed { input, norm_spec, solver } => cmd_embed(&input, &norm_spec, &solver),
        Command::Equilateral { n, norm_spec, lambda, solver } => {
            cmd_equilateral(n, &norm_spec, lambda, &solver)
        }
        Command::Extract { family, lambda, within, cross, count, tol, horizon } => {
            cmd_extract(&family, lambda, within, cross, count, tol, horizon)
        }
        Command::Sweep { space, n, lambda, c, seed, deltas, output, solver } => {
            cmd_sweep(&space, n, lambda, c, seed, &deltas, &output, &solver)
        }
    }
}

fn load_space(path: &Path) -> Result<FiniteMetricSpace> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return load_space_csv(path);
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let space: FiniteMetricSpace = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a valid distance-matrix JSON", path.display()))?;
    space.check_structure()?;
    Ok(space)
}

fn load_space_csv(path: &Path) -> Result<FiniteMetricSpace> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let rows: Vec<csv::StringRecord> =
        reader.records().collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        bail!("{}: empty CSV", path.display());
    }
    let has_label_row = rows[0].iter().any(|cell| cell.parse::<f64>().is_err());
    let (labels, data): (Vec<String>, &[csv::StringRecord]) = if has_label_row {
        (rows[0].iter().map(str::to_owned).collect(), &rows[1..])
    } else {
        ((1..=rows.len()).map(|i| format!("x{i}")).collect(), &rows[..])
    };
    let mut dist = Vec::with_capacity(data.len());
    for (i, row) in data.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (j, cell) in row.iter().enumerate() {
            out.push(cell.parse::<f64>().map_err(|_| {
                anyhow!("{}: row {}, column {} is not a number: {cell:?}", path.display(), i + 1, j + 1)
            })?);
        }
        dist.push(out);
    }
    let space = FiniteMetricSpace::new(labels, dist)?;
    Ok(space)
}

fn load_norm(path: &Path) -> Result<NormSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let norm: NormSpec = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a valid norm JSON", path.display()))?;
    Ok(norm)
}

fn default_tol(space: &FiniteMetricSpace) -> f64 {
    1e-12 * space.diameter()
}

/// Validates and prints the report; returns the exit code without printing
/// when `quiet` (used as a precondition check by other commands).
fn validate_space(space: &FiniteMetricSpace, tol: f64, quiet: bool) -> Result<bool> {
    let report = space.validate(tol)?;
    if !quiet {
        let out = serde_json::json!({
            "ok": report.is_ok(),
            "tol": tol,
            "violations": report.violations,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
    }
    Ok(report.is_ok())
}

fn cmd_validate(input: &Path, tol: Option<f64>) -> Result<ExitCode> {
    let space = load_space(input)?;
    let tol = tol.unwrap_or_else(|| default_tol(&space));
    let ok = validate_space(&space, tol, false)?;
    Ok(ExitCode::from(if ok { 0 } else { 1 }))
}

fn cmd_report(input: &Path) -> Result<ExitCode> {
    let space = load_space(input)?;
    if !validate_space(&space, default_tol(&space), true)? {
        // Re-print the violations so the failure is actionable.
        validate_space(&space, default_tol(&space), false)?;
        return Ok(ExitCode::from(1));
    }
    let report = space.concavity_report()?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::from(0))
}

fn cmd_embed(input: &Path, norm_spec: &Path, solver: &SolverFlags) -> Result<ExitCode> {
    let space = load_space(input)?;
    if !validate_space(&space, default_tol(&space), true)? {
        validate_space(&space, default_tol(&space), false)?;
        return Ok(ExitCode::from(1));
    }
    let norm = load_norm(norm_spec)?;
    let result = embed(&space, &norm, &solver.to_config())?;
    let out = serde_json::json!({
        "embedding": result.embedding,
        "diagnostics": result.diagnostics,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(ExitCode::from(if result.diagnostics.converged { 0 } else { 1 }))
}

fn cmd_equilateral(n: usize, norm_spec: &Path, lambda: f64, solver: &SolverFlags) -> Result<ExitCode> {
    let norm = load_norm(norm_spec)?;
    let result = equilateral_set(n, &norm, &solver.to_config())?;
    let embedding = if lambda == 1.0 {
        result.embedding
    } else {
        scale_embedding(&result.embedding, lambda)?
    };
    let out = serde_json::json!({
        "embedding": embedding,
        "lambda": lambda,
        "diagnostics": result.diagnostics,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(ExitCode::from(if result.diagnostics.converged { 0 } else { 1 }))
}

fn build_family(
    family: &str,
    lambda: f64,
    within: f64,
    cross: f64,
) -> Result<Box<dyn LazyMetric>> {
    Ok(match family {
        "discrete" => Box::new(DiscreteFamily),
        "equilateral" => Box::new(EquilateralFamily { lambda }),
        "harmonic" => Box::new(HarmonicFamily),
        "two-cluster" => Box::new(TwoClusterFamily::new(within, cross)?),
        other => bail!("unknown family {other:?}; expected discrete, equilateral, harmonic or two-cluster"),
    })
}

fn cmd_extract(
    family: &str,
    lambda: f64,
    within: f64,
    cross: f64,
    count: usize,
    tol: f64,
    horizon: usize,
) -> Result<ExitCode> {
    let metric = build_family(family, lambda, within, cross)?;
    let result = extract_convergent_subset(metric.as_ref(), count, tol, horizon)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(ExitCode::from(if result.shortfall { 1 } else { 0 }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    space_kind: &str,
    n: usize,
    lambda: f64,
    c: Option<f64>,
    seed: Option<u64>,
    deltas: &[f64],
    output: &Path,
    solver: &SolverFlags,
) -> Result<ExitCode> {
    let space = match space_kind {
        "discrete" => FiniteMetricSpace::discrete(n)?,
        "equilateral" => FiniteMetricSpace::equilateral(n, lambda)?,
        "random" => {
            let c = c.ok_or_else(|| anyhow!("--space random requires --c"))?;
            let seed = seed.ok_or_else(|| anyhow!("--space random requires --seed"))?;
            FiniteMetricSpace::random_strongly_concave(n, c, seed)?
        }
        other => bail!("unknown space generator {other:?}; expected discrete, equilateral or random"),
    };

    // The sweep explores the failure region too, so inadmissible deltas run
    // in clamp-and-count mode rather than erroring out.
    let mut config = solver.to_config();
    config.allow_uncertified_norm = true;

    let mut csv = String::from("delta,iterations,final_residual,converged\n");
    let mut all_converged = true;
    for &delta in deltas {
        if delta < 0.0 || !delta.is_finite() {
            bail!("delta values must be nonnegative and finite, got {delta}");
        }
        let mut weights = vec![1.0 / (1.0 + delta); n];
        weights[0] = 1.0;
        let norm = NormSpec::weighted_sup(weights)?;
        let result = embed(&space, &norm, &config)?;
        all_converged &= result.diagnostics.converged;
        csv.push_str(&format!(
            "{},{},{},{}\n",
            delta,
            result.diagnostics.iterations,
            result.diagnostics.final_residual,
            result.diagnostics.converged
        ));
    }
    std::fs::write(output, &csv)
        .with_context(|| format!("cannot write {}", output.display()))?;
    println!("wrote {} rows to {}", deltas.len(), output.display());
    Ok(ExitCode::from(if all_converged { 0 } else { 1 }))
}
