//! Argument definitions and the `fit` / `simulate` commands.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cqreg::pipeline::{fit, FitRequest};
use cqreg::{Algorithm, Error, QuantileLevels, SolverOptions};
use cqreg_sim::{run_experiment, Preset, SimError};

use crate::document::{RequestEcho, ResultDocument, SCHEMA_VERSION};
use crate::input::{read_csv, ResponseColumn};
use crate::report::{report_to_csv, ReportDocument};
use crate::{CliError, EXIT_NOT_CONVERGED, EXIT_OK};

/// Environment variable that overrides `simulate --seed`.
pub const SEED_ENV: &str = "CQR_SEED";

#[derive(Debug, Parser)]
#[command(name = "cqreg", version, about = "Quantile and composite quantile regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit QR or CQR, optionally with an adaptive-lasso penalty, to a CSV file.
    Fit(FitArgs),
    /// Run a simulation experiment and write a report.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Response column: header name, or zero-based column index.
    #[arg(long)]
    pub response: String,
    /// Comma-separated, strictly increasing quantile levels in (0, 1).
    #[arg(long, value_parser = parse_levels)]
    pub tau: QuantileLevels,
    #[arg(long, value_parser = parse_algorithm)]
    pub algorithm: Algorithm,
    /// Adaptive-lasso penalty level; omit for an unpenalized fit.
    #[arg(long, value_parser = parse_positive)]
    pub lambda: Option<f64>,
    /// Solver for the unpenalized pilot fit (default: --algorithm).
    #[arg(long, value_parser = parse_algorithm, requires = "lambda")]
    pub pilot_algorithm: Option<Algorithm>,
    #[arg(long, value_parser = parse_count)]
    pub max_iter: Option<usize>,
    #[arg(long, value_parser = parse_positive)]
    pub tol: Option<f64>,
    #[arg(long, value_parser = parse_positive)]
    pub rho: Option<f64>,
    #[arg(long, value_parser = parse_positive)]
    pub eps_mm: Option<f64>,
    /// Write the document here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_preset)]
    pub preset: Preset,
    #[arg(long, value_parser = parse_count)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// Number of nonzero true coefficients (default: p, or min(p, 4) for the
    /// regularized presets).
    #[arg(long)]
    pub support: Option<usize>,
    #[arg(long, value_parser = parse_count)]
    pub reps: Option<usize>,
    /// Base seed; replication r uses seed + r. Overridden by CQR_SEED.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Penalty level for the regularized presets (default sqrt(n log p) / 4).
    #[arg(long, value_parser = parse_positive)]
    pub lambda: Option<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, required = true)]
    pub algorithms: Vec<Algorithm>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

fn parse_levels(s: &str) -> Result<QuantileLevels, String> {
    let levels = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect::<Result<Vec<_>, _>>()?;
    QuantileLevels::new(levels).map_err(|e| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: SimError| e.to_string())
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive finite number")),
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

pub fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::Input(e.to_string()))
        }
    }
}

pub fn cmd_fit(args: FitArgs) -> Result<i32, CliError> {
    let table = read_csv(&args.input, &ResponseColumn(args.response.clone()))?;
    let mut options = SolverOptions::new(args.algorithm);
    if let Some(v) = args.max_iter {
        options.max_iter = v;
    }
    if let Some(v) = args.tol {
        options.tol = v;
    }
    if let Some(v) = args.rho {
        options.rho = v;
    }
    if let Some(v) = args.eps_mm {
        options.eps_mm = v;
    }

    let mut req = match args.lambda {
        Some(lambda) => FitRequest::regularized(table.data, args.tau.clone(), lambda, options.clone()),
        None => FitRequest::unregularized(table.data, args.tau.clone(), options.clone()),
    };
    if let Some(pilot) = args.pilot_algorithm {
        req = req.with_pilot_algorithm(pilot);
    }
    let result = fit(&req).map_err(|e| match e {
        Error::NotConverged { stage, .. } => CliError::NotConverged(format!("{e}; no estimates produced at the {stage} stage")),
        other => CliError::Input(other.to_string()),
    })?;

    let converged = result.converged;
    let iterations = result.iterations;
    let echo = RequestEcho {
        algorithm: args.algorithm,
        pilot_algorithm: args.pilot_algorithm.unwrap_or(args.algorithm),
        levels: args.tau.as_slice().to_vec(),
        lambda: args.lambda,
        options,
        response: table.response,
    };
    let doc = ResultDocument::new(echo, table.covariates, result);
    let text = match args.format {
        Format::Json => doc.to_json(),
        Format::Csv => doc.to_csv(),
    };
    emit(args.output.as_ref(), &text)?;
    if converged {
        Ok(EXIT_OK)
    } else {
        let what = if args.lambda.is_some() { "final" } else { "unpenalized" };
        eprintln!("warning: {what} fit did not converge after {iterations} iterations");
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

pub fn cmd_simulate(args: SimulateArgs) -> Result<i32, CliError> {
    let mut config = args.preset.config(args.n, args.p);
    let regularized = config.regularized;
    if args.lambda.is_some() && !regularized {
        return Err(CliError::Usage(format!("--lambda is not used by preset {}", args.preset.as_str())));
    }
    config.lambda = args.lambda;
    if let Some(s) = args.support {
        config.true_support_size = s;
    }
    if let Some(r) = args.reps {
        config.reps = r;
    }
    config.base_seed = seed_override()?.unwrap_or(args.seed);
    config.algorithms = args.algorithms;
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    if let Some(lambda) = config.effective_lambda() {
        let origin = if args.lambda.is_some() { "given" } else { "default sqrt(n log p)/4" };
        eprintln!("lambda = {lambda} ({origin})");
    }
    let report = run_experiment(&config).map_err(|e| CliError::Input(e.to_string()))?;
    for row in &report.rows {
        eprintln!(
            "{} n={} p={}: error={:.4} N_T={:.2} N_F={:.2} failures={}/{}",
            row.algorithm, row.n, row.p, row.mean_error, row.mean_n_t, row.mean_n_f, row.failures, row.reps
        );
        if row.flagged() {
            eprintln!("warning: {} failed in more than 20% of replications", row.algorithm);
        }
    }
    let preset = args.preset.as_str();
    let text = match args.format {
        Format::Csv => report_to_csv(preset, &report),
        Format::Json => {
            let doc = ReportDocument { schema_version: SCHEMA_VERSION.into(), preset: preset.into(), report };
            serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
        }
    };
    emit(Some(&args.output), &text)?;
    Ok(EXIT_OK)
}
