//! The `pickands` command-line entry point: data ingestion, configuration,
//! deterministic experiment execution, CSV/JSON emission.
//!
//! Exit codes: 0 on success, 2 on validation errors, 3 on numerical errors
//! (ties, factorization failures), with one machine-parseable line on
//! standard error. Every output embeds the configuration and seed that
//! produced it. Sample CSV files are a single column of raw observations;
//! a header line is optional and `#` lines are comments; input is sorted
//! internally, never assumed pre-sorted.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::evt_core::{
    check_condition_k, check_rc, ExtremeIndex, KSequence, SortedSample, TailGrid, TailModel,
};
use crate::functionals::{integral_estimator, normalized_estimate, GridMeasure};
use crate::limit_gaussian::{
    kernel_discrepancy_report, simulate_limit_paths, CovarianceKernel,
};
use crate::mc_harness::{
    run_covariance_experiment, run_lemma1_experiment, run_modulus_experiment,
    run_normality_experiment, McReport,
};
use crate::optimizer::{optimize_measure, MassConstraint, OptimizationProblem};
use crate::pickands::{kappa_star_path, pickands_path, theoretical_path};
use crate::samplers::{sample_sorted, RngStream};

/// Environment variable overriding the default seed (flags still win).
pub const SEED_ENV_VAR: &str = "PICKANDS_SEED";

fn default_seed() -> u64 {
    std::env::var(SEED_ENV_VAR)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn parse_grid(text: &str) -> std::result::Result<TailGrid, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected a,b,m, got '{text}'"));
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| "bad grid start")?;
    let b: f64 = parts[1].trim().parse().map_err(|_| "bad grid end")?;
    let m: usize = parts[2].trim().parse().map_err(|_| "bad grid size")?;
    TailGrid::linspace(a, b, m).map_err(|e| e.to_string())
}

fn parse_f64_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number '{p}'")))
        .collect()
}

fn parse_u64_list(text: &str) -> std::result::Result<Vec<u64>, String> {
    text.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|_| format!("bad integer '{p}'")))
        .collect()
}

#[derive(Debug, Parser)]
#[command(
    name = "pickands",
    version,
    about = "Tail-index estimation over a continuum of tail levels: estimator paths, \
             limit covariance kernels, variance-optimal measures, and Monte Carlo checks."
)]
pub struct Cli {
    /// Worker threads for parallel subcommands (default: one per core).
    /// Output is byte-identical regardless of this setting.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a model sample and export it as single-column CSV.
    Sample(SampleArgs),
    /// Estimator path over a grid: columns s, P_n, p_n, kappa, kappa_star.
    Estimate(EstimateArgs),
    /// Integral estimate over a measure, with its standard error.
    #[command(name = "integral-estimate")]
    IntegralEstimate(IntegralArgs),
    /// Emit the limit covariance matrix on a grid as CSV.
    #[command(name = "limit-cov")]
    LimitCov(LimitCovArgs),
    /// Simulate limit-process paths on a grid (one CSV row per path).
    #[command(name = "simulate-paths")]
    SimulatePaths(SimulatePathsArgs),
    /// Variance-minimizing measure on a support grid.
    #[command(name = "optimize-measure")]
    OptimizeMeasure(OptimizeArgs),
    /// Rank-sequence growth check, plus regularity conditions for a model.
    #[command(name = "check-conditions")]
    CheckConditions(CheckArgs),
    /// Per-level normality check of the centered estimator.
    #[command(name = "mc-normality")]
    McNormality(McNormalityArgs),
    /// Empirical covariance of the centered estimator vs the kernel.
    #[command(name = "mc-covariance")]
    McCovarianceCmd(McCovarianceArgs),
    /// Scaling check of the scaled uniform order statistics.
    #[command(name = "mc-lemma1")]
    McLemma1(McLemma1Args),
    /// Continuity-modulus diagnostic on simulated limit paths.
    #[command(name = "mc-modulus")]
    McModulus(McModulusArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Model id: pareto:<gamma>, uniform, exponential.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stream id within the seed (replications use consecutive streams).
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Model id to sample from (exactly one of --model / --input).
    #[arg(long, conflicts_with = "input")]
    pub model: Option<String>,
    /// Sample size when sampling from a model.
    #[arg(long)]
    pub n: Option<usize>,
    /// Single-column CSV of raw observations (sorted internally).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub k: usize,
    /// Evaluation grid a,b,m (m equally spaced points on [a, b]).
    #[arg(long, value_parser = parse_grid)]
    pub grid: TailGrid,
    /// Reference tail index for the kappa_star column (defaults to the
    /// model's; accepts `inf` for the light-tail case).
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IntegralArgs {
    /// Single-column CSV of raw observations (exactly one of --input / --model).
    #[arg(long, conflicts_with = "model")]
    pub input: Option<PathBuf>,
    /// Model id to sample from instead of reading a file.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: usize,
    /// Measure JSON: {"support": [...], "weights": [...]}.
    #[arg(long)]
    pub measure: PathBuf,
    /// Working exponent for the standard error (defaults to the model's
    /// when sampling; without it only the estimate is reported).
    #[arg(short = 'K', long = "K")]
    pub k_exponent: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LimitCovArgs {
    #[arg(short = 'K', long = "K")]
    pub k_exponent: f64,
    #[arg(long, value_parser = parse_grid)]
    pub grid: TailGrid,
    /// Evaluate the closed-form kernel instead of the constructive one.
    #[arg(long, conflicts_with = "constructive")]
    pub closed: bool,
    /// Evaluate the constructive kernel (the default).
    #[arg(long)]
    pub constructive: bool,
    /// Also write the closed-vs-constructive discrepancy report (JSON).
    #[arg(long)]
    pub discrepancy_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulatePathsArgs {
    #[arg(short = 'K', long = "K")]
    pub k_exponent: f64,
    #[arg(long, value_parser = parse_grid)]
    pub grid: TailGrid,
    #[arg(long)]
    pub paths: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(short = 'K', long = "K")]
    pub k_exponent: f64,
    #[arg(long, value_parser = parse_grid)]
    pub grid: TailGrid,
    /// Restrict to nonnegative weights (signed allowed by default).
    #[arg(long)]
    pub nonneg: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Rank rule: sqrt, log, linear, pow:<alpha>, const:<k>.
    #[arg(long = "k-rule")]
    pub k_rule: String,
    /// Sample sizes to evaluate, comma separated.
    #[arg(long)]
    pub n: String,
    /// Built-in model id for the regularity checks.
    #[arg(long, conflicts_with = "model_file")]
    pub model: Option<String>,
    /// Custom model JSON path for the regularity checks.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Neighborhood inflation factor (> 1).
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    /// Left endpoint of the evaluation range.
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McNormalityArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_parser = parse_grid)]
    pub grid: TailGrid,
    #[arg(long)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional per-point CSV for plotting.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McCovarianceArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_parser = parse_grid)]
    pub grid: TailGrid,
    #[arg(long)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McLemma1Args {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Levels in (0, 1], comma separated (alternative to --grid).
    #[arg(long, conflicts_with = "grid")]
    pub levels: Option<String>,
    /// Evaluation grid a,b,m with b < 1 (use --levels to include 1).
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<TailGrid>,
    #[arg(long)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McModulusArgs {
    #[arg(short = 'K', long = "K")]
    pub k_exponent: f64,
    #[arg(long, value_parser = parse_grid)]
    pub grid: TailGrid,
    #[arg(long)]
    pub paths: usize,
    /// Window widths, comma separated.
    #[arg(long = "h")]
    pub h_values: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// IO helpers
// ---------------------------------------------------------------------------

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Read a single-column sample CSV: `#` lines are comments, one optional
/// non-numeric header line is tolerated.
pub fn read_sample_csv(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    let mut header_seen = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim().trim_end_matches(',');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if !header_seen && values.is_empty() => header_seen = true,
            Err(_) => {
                return Err(Error::InvalidInput(format!(
                    "{}:{}: not a number: '{line}'",
                    path.display(),
                    lineno + 1
                )));
            }
        }
    }
    if values.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: no observations found",
            path.display()
        )));
    }
    Ok(values)
}

fn grid_echo(grid: &TailGrid) -> String {
    format!("{},{},{}", grid.a(), grid.b(), grid.len())
}

fn report_outputs(report: &McReport, out: Option<&Path>, csv: Option<&Path>) -> Result<()> {
    let json = report.to_json()?;
    emit(out, &(json + "\n"))?;
    if let Some(csv_path) = csv {
        let mut table = String::from("s,mean,variance,ks_statistic,ks_p_value\n");
        for p in &report.points {
            let ks_s = p.ks_statistic.map(|v| v.to_string()).unwrap_or_default();
            let ks_p = p.ks_p_value.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(table, "{},{},{},{},{}", p.s, p.mean, p.variance, ks_s, ks_p);
        }
        fs::write(csv_path, table)?;
    }
    eprintln!(
        "{}: reps_used={} excluded={} elapsed_seconds={:.3}",
        report.experiment, report.reps_used, report.excluded, report.elapsed_seconds
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

fn cmd_sample(args: &SampleArgs) -> Result<()> {
    let model = TailModel::from_id(&args.model)?;
    let seed = args.seed.unwrap_or_else(default_seed);
    let sample = sample_sorted(&model, args.n, &RngStream::new(seed, args.stream))?;
    let mut csv = format!(
        "# schema=1 command=sample model={} n={} seed={} stream={}\n",
        args.model, args.n, seed, args.stream
    );
    for v in sample.values() {
        let _ = writeln!(csv, "{v}");
    }
    emit(args.out.as_deref(), &csv)
}

fn resolve_sample(
    model: Option<&TailModel>,
    n: Option<usize>,
    input: Option<&Path>,
    seed: u64,
) -> Result<SortedSample> {
    match (model, input) {
        (Some(model), None) => {
            let n = n.ok_or_else(|| {
                Error::InvalidInput("--n is required when sampling from --model".into())
            })?;
            sample_sorted(model, n, &RngStream::new(seed, 0))
        }
        (None, Some(path)) => SortedSample::from_unsorted(read_sample_csv(path)?),
        (None, None) => Err(Error::InvalidInput(
            "exactly one of --model / --input is required".into(),
        )),
        (Some(_), Some(_)) => Err(Error::InvalidInput(
            "exactly one of --model / --input is required, not both".into(),
        )),
    }
}

fn cmd_estimate(args: &EstimateArgs) -> Result<()> {
    let model = args.model.as_deref().map(TailModel::from_id).transpose()?;
    let seed = args.seed.unwrap_or_else(default_seed);
    let sample = resolve_sample(model.as_ref(), args.n, args.input.as_deref(), seed)?;

    let gamma = match (args.gamma, &model) {
        (Some(g), _) => Some(ExtremeIndex::new(g)?),
        (None, Some(m)) => Some(m.index()),
        (None, None) => None,
    };

    let estimate = pickands_path(&sample, args.k, &args.grid);
    let theoretical = model
        .as_ref()
        .map(|m| theoretical_path(m, sample.n(), args.k, &args.grid));
    let star = gamma.map(|g| kappa_star_path(&sample, g, args.k, &args.grid));

    let source = match (&args.model, &args.input) {
        (Some(id), _) => format!("model={id}"),
        (_, Some(path)) => format!("input={}", path.display()),
        _ => unreachable!("validated above"),
    };
    let mut csv = format!(
        "# schema=1 command=estimate {source} n={} k={} grid={} seed={}\n",
        sample.n(),
        args.k,
        grid_echo(&args.grid),
        seed
    );
    csv.push_str("s,P_n,p_n,kappa,kappa_star\n");
    for (i, &s) in args.grid.points().iter().enumerate() {
        let p_hat = estimate.values[i];
        let p_model = theoretical.as_ref().map_or(f64::NAN, |t| t.values[i]);
        let kappa = (args.k as f64).sqrt() * (p_hat - p_model);
        let kappa_star = star.as_ref().map_or(f64::NAN, |t| t.values[i]);
        let _ = writeln!(csv, "{s},{p_hat},{p_model},{kappa},{kappa_star}");
    }
    emit(args.out.as_deref(), &csv)?;
    let issues = estimate.meta.issues.len()
        + theoretical.as_ref().map_or(0, |t| t.meta.issues.len())
        + star.as_ref().map_or(0, |t| t.meta.issues.len());
    if issues > 0 {
        eprintln!("estimate: {issues} grid points recorded as NaN (see columns)");
    }
    Ok(())
}

fn cmd_integral(args: &IntegralArgs) -> Result<()> {
    let model = args.model.as_deref().map(TailModel::from_id).transpose()?;
    let seed = args.seed.unwrap_or_else(default_seed);
    let sample = resolve_sample(model.as_ref(), args.n, args.input.as_deref(), seed)?;
    let measure = GridMeasure::from_json(&fs::read_to_string(&args.measure)?)?;
    let k_exponent = args.k_exponent.or_else(|| model.as_ref().map(|m| m.k_of_gamma()));

    #[derive(serde::Serialize)]
    struct Output {
        schema: u32,
        n: usize,
        k: usize,
        measure: GridMeasure,
        seed: u64,
        #[serde(skip_serializing_if = "Option::is_none")]
        k_exponent: Option<f64>,
        estimate: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        std_error: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        z: Option<f64>,
    }

    let output = match k_exponent {
        Some(ke) => {
            let kernel = CovarianceKernel::constructive(ke)?;
            let est = normalized_estimate(&sample, args.k, &measure, &kernel, Some(ke))?;
            Output {
                schema: 1,
                n: sample.n(),
                k: args.k,
                measure,
                seed,
                k_exponent: Some(ke),
                estimate: est.estimate,
                std_error: Some(est.std_error),
                z: est.z,
            }
        }
        None => Output {
            schema: 1,
            n: sample.n(),
            k: args.k,
            estimate: integral_estimator(&sample, args.k, &measure)?,
            measure,
            seed,
            k_exponent: None,
            std_error: None,
            z: None,
        },
    };
    emit(
        args.out.as_deref(),
        &(serde_json::to_string_pretty(&output)? + "\n"),
    )
}

fn cmd_limit_cov(args: &LimitCovArgs) -> Result<()> {
    let kernel = if args.closed {
        CovarianceKernel::closed_form(args.k_exponent)?
    } else {
        CovarianceKernel::constructive(args.k_exponent)?
    };
    let points = args.grid.points();
    let mut csv = format!(
        "# schema=1 command=limit-cov K={} grid={} form={}\n",
        args.k_exponent,
        grid_echo(&args.grid),
        if args.closed { "closed" } else { "constructive" }
    );
    for &s in points {
        let row: Vec<String> = points.iter().map(|&t| kernel.eval(s, t).to_string()).collect();
        let _ = writeln!(csv, "{}", row.join(","));
    }
    emit(args.out.as_deref(), &csv)?;
    if let Some(path) = &args.discrepancy_out {
        let report = kernel_discrepancy_report(points, &[args.k_exponent], 1e-10);
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(())
}

fn cmd_simulate_paths(args: &SimulatePathsArgs) -> Result<()> {
    let seed = args.seed.unwrap_or_else(default_seed);
    let paths = simulate_limit_paths(
        args.k_exponent,
        &args.grid,
        args.paths,
        &RngStream::new(seed, 0),
    )?;
    let mut csv = format!(
        "# schema=1 command=simulate-paths K={} grid={} paths={} seed={}\n",
        args.k_exponent,
        grid_echo(&args.grid),
        args.paths,
        seed
    );
    let header: Vec<String> = args.grid.points().iter().map(|s| s.to_string()).collect();
    let _ = writeln!(csv, "{}", header.join(","));
    for path in &paths {
        let row: Vec<String> = path.values.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(csv, "{}", row.join(","));
    }
    emit(args.out.as_deref(), &csv)
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<()> {
    let kernel = CovarianceKernel::constructive(args.k_exponent)?;
    let constraint = if args.nonneg {
        MassConstraint::UnitMassNonNegative
    } else {
        MassConstraint::UnitMass
    };
    let problem = OptimizationProblem::from_kernel(&kernel, &args.grid, constraint)?;
    let optimum = optimize_measure(&problem, &args.grid)?;

    #[derive(serde::Serialize)]
    struct Output {
        schema: u32,
        k_exponent: f64,
        constraint: MassConstraint,
        #[serde(flatten)]
        optimum: crate::optimizer::MeasureOptimum,
    }
    let output = Output {
        schema: 1,
        k_exponent: args.k_exponent,
        constraint,
        optimum,
    };
    emit(
        args.out.as_deref(),
        &(serde_json::to_string_pretty(&output)? + "\n"),
    )
}

fn cmd_check(args: &CheckArgs) -> Result<()> {
    let kseq = KSequence::from_id(&args.k_rule)?;
    let n_values = parse_u64_list(&args.n).map_err(Error::InvalidInput)?;
    let condition_k = check_condition_k(&kseq, &n_values)?;

    let model = match (&args.model, &args.model_file) {
        (Some(id), None) => Some(TailModel::from_id(id)?),
        (None, Some(path)) => Some(TailModel::from_json(&fs::read_to_string(path)?)?),
        (None, None) => None,
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let rc = model
        .as_ref()
        .map(|m| check_rc(m, &kseq, args.lambda, args.a, &n_values))
        .transpose()?;

    #[derive(serde::Serialize)]
    struct Output {
        schema: u32,
        k_rule: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        model: Option<String>,
        lambda: f64,
        a: f64,
        condition_k: crate::evt_core::ConditionKVerdict,
        #[serde(skip_serializing_if = "Option::is_none")]
        rc: Option<crate::evt_core::RcVerdict>,
    }
    let output = Output {
        schema: 1,
        k_rule: args.k_rule.clone(),
        model: model.as_ref().map(|m| m.id().to_string()),
        lambda: args.lambda,
        a: args.a,
        condition_k,
        rc,
    };
    emit(
        args.out.as_deref(),
        &(serde_json::to_string_pretty(&output)? + "\n"),
    )
}

fn cmd_mc_normality(args: &McNormalityArgs) -> Result<()> {
    let model = TailModel::from_id(&args.model)?;
    let seed = args.seed.unwrap_or_else(default_seed);
    let report = run_normality_experiment(
        &model,
        &KSequence::constant(args.k as u64),
        args.n,
        &args.grid,
        args.reps,
        &RngStream::new(seed, 0),
    )?;
    report_outputs(&report, args.out.as_deref(), args.csv.as_deref())
}

fn cmd_mc_covariance(args: &McCovarianceArgs) -> Result<()> {
    let model = TailModel::from_id(&args.model)?;
    let seed = args.seed.unwrap_or_else(default_seed);
    let report = run_covariance_experiment(
        &model,
        args.n,
        args.k,
        &args.grid,
        args.reps,
        &RngStream::new(seed, 0),
    )?;
    report_outputs(&report, args.out.as_deref(), args.csv.as_deref())
}

fn cmd_mc_lemma1(args: &McLemma1Args) -> Result<()> {
    let seed = args.seed.unwrap_or_else(default_seed);
    let levels: Vec<f64> = match (&args.levels, &args.grid) {
        (Some(levels), None) => parse_f64_list(levels).map_err(Error::InvalidInput)?,
        (None, Some(grid)) => grid.points().to_vec(),
        _ => {
            return Err(Error::InvalidInput(
                "exactly one of --levels / --grid is required".into(),
            ))
        }
    };
    let report = run_lemma1_experiment(args.n, args.k, &levels, args.reps, &RngStream::new(seed, 0))?;
    report_outputs(&report, args.out.as_deref(), args.csv.as_deref())
}

fn cmd_mc_modulus(args: &McModulusArgs) -> Result<()> {
    let seed = args.seed.unwrap_or_else(default_seed);
    let h_values = parse_f64_list(&args.h_values).map_err(Error::InvalidInput)?;
    let report = run_modulus_experiment(
        args.k_exponent,
        &args.grid,
        args.paths,
        &h_values,
        &RngStream::new(seed, 0),
    )?;
    report_outputs(&report, args.out.as_deref(), args.csv.as_deref())
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Execute a parsed invocation.
pub fn run(cli: &Cli) -> Result<()> {
    let body = || match &cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::IntegralEstimate(args) => cmd_integral(args),
        Command::LimitCov(args) => cmd_limit_cov(args),
        Command::SimulatePaths(args) => cmd_simulate_paths(args),
        Command::OptimizeMeasure(args) => cmd_optimize(args),
        Command::CheckConditions(args) => cmd_check(args),
        Command::McNormality(args) => cmd_mc_normality(args),
        Command::McCovarianceCmd(args) => cmd_mc_covariance(args),
        Command::McLemma1(args) => cmd_mc_lemma1(args),
        Command::McModulus(args) => cmd_mc_modulus(args),
    };
    match cli.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            pool.install(body)
        }
        None => body(),
    }
}

/// Parse the process arguments, run, and exit with the documented codes.
pub fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error kind={} exit={} msg=\"{}\"", e.kind(), e.exit_code(), e);
        std::process::exit(e.exit_code());
    }
}
