//! Command-line front end. [`run`] parses arguments, dispatches one
//! subcommand and returns the process exit status.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::agents::{plan_with_model, train, Algorithm, TrainConfig};
use crate::bench::{gen_instance, SyntheticSpec};
use crate::io::{
    check_digests, load_cameras, load_coverage_cache, load_mesh, load_model, load_plan,
    save_coverage_cache, save_model, save_plan, write_learning_curve, write_report, Certification,
    CoverageCache, DigestCheck, ReportRow, RunReport,
};
use crate::planner::{run_alternating, run_fixed_lambda, Plan};
use crate::visibility::precompute_coverage;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

/// Environment variable that caps the worker thread count.
pub const THREADS_ENV: &str = "VIEWPLAN_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "viewplan",
    version,
    about = "Camera view planning for 3D model coverage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute per-camera triangle coverage for a mesh and write a coverage cache.
    Precompute {
        #[arg(long)]
        mesh: PathBuf,
        /// JSON array of cameras.
        #[arg(long)]
        cameras: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a λ-selection policy on a coverage cache.
    Train(TrainArgs),
    /// Plan views with a trained model.
    Plan {
        #[arg(long)]
        coverage: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1.0, value_parser = unit_interval)]
        rcc: f64,
        #[arg(long)]
        out: PathBuf,
        /// Plan even if the model was trained on a different coverage table.
        #[arg(long)]
        allow_digest_mismatch: bool,
    },
    /// Plan views with a fixed λ schedule.
    Baseline {
        #[arg(long)]
        coverage: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Exponent for `fixed-lambda`.
        #[arg(long, required_if_eq("method", "fixed-lambda"), value_parser = non_negative)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 1.0, value_parser = unit_interval)]
        rcc: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic certified instance as a coverage cache.
    Gen {
        /// `grid_trap`, `random_patches`, or a JSON instance spec file.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Collect plan files into a CSV report.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    coverage: PathBuf,
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    #[arg(long, default_value_t = 100_000)]
    episodes: usize,
    #[arg(long, default_value_t = 1.0, value_parser = unit_interval)]
    rcc: f64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(1..))]
    hidden: u32,
    #[arg(long, default_value_t = 0.01, value_parser = positive)]
    lr: f64,
    /// Eligibility trace decay.
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    elig: f64,
    #[arg(long, default_value_t = 0.1, value_parser = unit_interval)]
    epsilon: f64,
    /// Episodes during which exploration is active.
    #[arg(long, default_value_t = 50_000)]
    epsilon_episodes: usize,
    /// Comma-separated λ values.
    #[arg(long, default_value = "0,1", value_delimiter = ',', value_parser = non_negative)]
    lambda_set: Vec<f64>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the per-episode learning curve as CSV.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Evaluate the greedy policy every this many episodes (0 = never).
    #[arg(long, default_value_t = 0)]
    eval_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Greedy,
    AltLambda,
    FixedLambda,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"))
}

fn unit_interval(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be finite and >= 0"))
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return;
    };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                log::debug!("thread pool already configured: {e}");
            }
        }
        _ => log::warn!("ignoring {THREADS_ENV}={v:?}: expected a positive integer"),
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Precompute { mesh, cameras, out } => {
            let mesh = load_mesh(&mesh)?;
            let views = load_cameras(&cameras, &mesh)?;
            let started = Instant::now();
            let table = precompute_coverage(Arc::new(mesh), views)?;
            log::info!(
                "{} views, {:.1}% of the mesh area visible, {:.2}s",
                table.view_count(),
                100.0 * table.achievable().area()
                    / table.mesh().triangle_areas().iter().fold(0.0, |a, b| a + b),
                started.elapsed().as_secs_f64()
            );
            save_coverage_cache(
                &out,
                &CoverageCache {
                    table,
                    certification: None,
                },
            )?;
            Ok(EXIT_OK)
        }
        Command::Train(args) => cmd_train(args),
        Command::Plan {
            coverage,
            model,
            rcc,
            out,
            allow_digest_mismatch,
        } => {
            let table = load_coverage_cache(&coverage)?.table;
            let model = load_model(&model)?;
            let mode = if allow_digest_mismatch {
                DigestCheck::Warn
            } else {
                DigestCheck::Reject
            };
            check_digests(&model, &table, mode)?;
            let started = Instant::now();
            let mut plan = plan_with_model(&model, &table, rcc)?;
            plan.runtime_seconds = Some(started.elapsed().as_secs_f64());
            finish_plan(&out, &plan)
        }
        Command::Baseline {
            coverage,
            method,
            lambda,
            rcc,
            out,
        } => {
            let table = load_coverage_cache(&coverage)?.table;
            let started = Instant::now();
            let mut plan = match method {
                Method::Greedy => run_fixed_lambda(&table, 0.0, rcc, None)?,
                Method::AltLambda => run_alternating(&table, rcc)?,
                Method::FixedLambda => {
                    let lambda =
                        lambda.ok_or_else(|| Error::input("fixed-lambda needs --lambda"))?;
                    let mut p = run_fixed_lambda(&table, lambda, rcc, None)?;
                    p.method = format!("fixed-lambda-{lambda}");
                    p
                }
            };
            plan.runtime_seconds = Some(started.elapsed().as_secs_f64());
            finish_plan(&out, &plan)
        }
        Command::Gen { spec, seed, out } => {
            let mut spec = resolve_spec(&spec)?;
            spec.seed = seed;
            let inst = gen_instance(&spec)?;
            let certification = Certification {
                oracle_count: inst.oracle_count,
                connected_oracle_count: inst.connected_oracle_count,
                greedy_count: inst.greedy_count,
            };
            log::info!(
                "instance {:016x}: {} views, greedy {}, oracle {:?}",
                inst.table.digest(),
                inst.table.view_count(),
                inst.greedy_count,
                inst.oracle_count
            );
            save_coverage_cache(
                &out,
                &CoverageCache {
                    table: inst.table,
                    certification: Some(certification),
                },
            )?;
            Ok(EXIT_OK)
        }
        Command::Report { inputs, csv } => {
            let mut report = RunReport::new();
            for path in &inputs {
                let plan = load_plan(path)?;
                let instance = plan.instance.clone().unwrap_or_else(|| file_stem(path));
                report.push(ReportRow::from_plan(&instance, &plan))?;
            }
            write_report(&csv, &report)?;
            Ok(EXIT_OK)
        }
    }
}

fn cmd_train(args: TrainArgs) -> Result<i32> {
    let table = load_coverage_cache(&args.coverage)?.table;
    let config = TrainConfig {
        lambda_set: args.lambda_set,
        alpha: args.lr,
        mu_e: args.elig,
        max_episodes: args.episodes,
        rcc: args.rcc,
        epsilon: args.epsilon,
        epsilon_episodes: args.epsilon_episodes,
        hidden: args.hidden as usize,
        eval_every: args.eval_every,
        ..TrainConfig::new(args.algo, args.seed)
    };
    let started = Instant::now();
    let model = train(&table, &config)?;
    log::info!(
        "trained {} for {} episodes in {:.2}s",
        config.algorithm,
        model.episode_log.len(),
        started.elapsed().as_secs_f64()
    );
    save_model(&args.out, &model)?;
    if let Some(curve) = &args.curve {
        write_learning_curve(curve, &model.episode_log)?;
    }
    Ok(EXIT_OK)
}

fn finish_plan(out: &Path, plan: &Plan) -> Result<i32> {
    save_plan(out, plan)?;
    if plan.complete {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "warning: coverage stopped at {:.4} of the achievable area",
            plan.final_coverage_fraction
        );
        Ok(EXIT_INCOMPLETE)
    }
}

fn resolve_spec(spec: &str) -> Result<SyntheticSpec> {
    match spec {
        "grid_trap" | "grid-trap" => Ok(SyntheticSpec::grid_trap(0)),
        "random_patches" | "random-patches" => Ok(SyntheticSpec::random_patches(0)),
        path => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let spec: SyntheticSpec = serde_json::from_slice(&bytes)?;
            Ok(spec)
        }
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
