//! The `edgecache` command-line front end.
//!
//! Exit codes: 0 on success, 1 on invalid input or configuration, 2 on
//! runtime failures (I/O, divergence, livelock).

mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{self, CatalogError, Trace, TraceFormat, DEFAULT_BITRATE};
use crate::experiment::{cf_estimate, density_csv, density_sweep, storage_sweep, ExperimentError};
use crate::io_util::write_atomic;
use crate::placement::{greedy_place, CachePlacement, PlacementError, StorageBudget};
use crate::popularity::{fit_zipf, ground_truth_matrix, PopularityError, PopularityMatrix};
use crate::seed::SeedSet;
use crate::simnet::{assign_requests, simulate, Assignment, SimError};

pub use config::{RunConfig, TraceKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Io { .. } => CliError::Runtime(format!("catalog: {e}")),
            _ => CliError::Validation(format!("catalog: {e}")),
        }
    }
}

impl From<PopularityError> for CliError {
    fn from(e: PopularityError) -> Self {
        match e {
            PopularityError::Catalog(inner) => inner.into(),
            PopularityError::Io { .. } | PopularityError::Diverged { .. } => {
                CliError::Runtime(format!("popularity: {e}"))
            }
            _ => CliError::Validation(format!("popularity: {e}")),
        }
    }
}

impl From<PlacementError> for CliError {
    fn from(e: PlacementError) -> Self {
        match e {
            PlacementError::Io { .. } => CliError::Runtime(format!("placement: {e}")),
            _ => CliError::Validation(format!("placement: {e}")),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) | SimError::Mismatch(_) => CliError::Validation(format!("simnet: {e}")),
            _ => CliError::Runtime(format!("simnet: {e}")),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Spec(_) => CliError::Validation(format!("experiment: {e}")),
            ExperimentError::Popularity(inner) => inner.into(),
            ExperimentError::Placement(inner) => inner.into(),
            ExperimentError::Sim(inner) => inner.into(),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "edgecache", version, about = "Proactive edge caching simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a traces-table CSV into catalog.csv and trace.csv.
    Ingest {
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Bitrate for rows without a bitrate column, bytes/s.
        #[arg(long, default_value_t = DEFAULT_BITRATE)]
        bitrate: f64,
    },
    /// Ranked popularity, fitted Zipf exponent and cumulative size curve.
    Characterize {
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Read a normalized trace with this catalog instead of a traces-table.
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BITRATE)]
        bitrate: f64,
    },
    /// Synthesize a Zipf trace from the configuration.
    Synth(RunArgs),
    /// Greedy cache placement at one storage budget.
    Place {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Simulate delivery at one storage budget.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        point: PointArgs,
        /// Also write the per-request CSV.
        #[arg(long)]
        records: bool,
    },
    /// Storage sweep under both estimators plus the training-density study.
    Sweep(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration file (flat keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set seed=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Per-station storage as a percentage of the total catalog size.
    #[arg(long)]
    storage_pct: f64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::GroundTruth)]
    estimator: EstimatorArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    GroundTruth,
    Cf,
}

/// Runs the CLI on the process arguments and returns the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest { trace, out, bitrate } => cmd_ingest(&trace, &out, bitrate),
        Command::Characterize {
            trace,
            out,
            catalog,
            bitrate,
        } => {
            let format = match catalog {
                Some(catalog) => TraceFormat::Normalized { catalog },
                None => TraceFormat::TracesTable {
                    default_bitrate: bitrate,
                },
            };
            cmd_characterize(&trace, &format, &out)
        }
        Command::Synth(run) => {
            let (config, out) = run.resolve()?;
            with_jobs(run.jobs, || cmd_synth(&config, &out))
        }
        Command::Place { run, point } => {
            let (config, out) = run.resolve()?;
            with_jobs(run.jobs, || cmd_place(&config, &point, &out))
        }
        Command::Simulate { run, point, records } => {
            let (config, out) = run.resolve()?;
            with_jobs(run.jobs, || cmd_simulate(&config, &point, records, &out))
        }
        Command::Sweep(run) => {
            let (config, out) = run.resolve()?;
            with_jobs(run.jobs, || cmd_sweep(&config, &out))
        }
    }
}

impl RunArgs {
    fn resolve(&self) -> Result<(RunConfig, PathBuf)> {
        if self.jobs == Some(0) {
            return Err(CliError::Validation("cli: --jobs must be >= 1".into()));
        }
        let config = RunConfig::load(self.config.as_deref(), &self.overrides)?;
        let out = self.out.clone().unwrap_or_else(|| config.out_dir.clone());
        Ok((config, out))
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(format!("cli: cannot start worker pool: {e}")))?
            .install(f),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    write_atomic(path, contents.as_bytes())
        .map_err(|e| CliError::Runtime(format!("cli: cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write(path, &text)
}

pub fn cmd_ingest(trace_path: &Path, out: &Path, bitrate: f64) -> Result<()> {
    let trace = catalog::load_trace(trace_path, &TraceFormat::TracesTable { default_bitrate: bitrate })?;
    trace.save_normalized(out)?;
    println!(
        "ingested {} requests over {} contents into {}",
        trace.len(),
        trace.catalog().len(),
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct Characterization {
    requests: usize,
    contents: usize,
    total_size_bytes: u64,
    duration_s: f64,
    zipf_alpha: f64,
}

pub fn cmd_characterize(trace_path: &Path, format: &TraceFormat, out: &Path) -> Result<()> {
    let trace = catalog::load_trace(trace_path, format)?;
    let ranking = catalog::popularity_ranking(&trace)?;
    let counts: Vec<f64> = ranking.iter().map(|&(_, n)| n as f64).collect();
    let alpha = fit_zipf(&counts)?;

    let mut popularity = String::from("rank,content_id,requests\n");
    for (rank, (id, n)) in ranking.iter().enumerate() {
        popularity.push_str(&format!("{},{},{}\n", rank + 1, id.0, n));
    }
    let mut cumulative = String::from("rank,cumulative_bytes\n");
    for (rank, bytes) in catalog::cumulative_size_curve(&trace)? {
        cumulative.push_str(&format!("{rank},{bytes}\n"));
    }
    write(&out.join("popularity.csv"), &popularity)?;
    write(&out.join("cumulative_size.csv"), &cumulative)?;
    write_json(
        &out.join("characterize.json"),
        &Characterization {
            requests: trace.len(),
            contents: trace.catalog().len(),
            total_size_bytes: trace.catalog().total_size_bytes(),
            duration_s: trace.duration_s(),
            zipf_alpha: alpha,
        },
    )?;
    println!("zipf_alpha = {alpha}");
    Ok(())
}

pub fn cmd_synth(config: &RunConfig, out: &Path) -> Result<()> {
    let trace = config.trace()?;
    trace.save_normalized(out)?;
    println!(
        "synthesized {} requests over {} contents into {}",
        trace.len(),
        trace.catalog().len(),
        out.display()
    );
    Ok(())
}

/// Trace, assignment and the chosen popularity estimate for one run.
fn prepare(config: &RunConfig, estimator: EstimatorArg) -> Result<(Trace, Assignment, PopularityMatrix)> {
    let seeds = config.seeds();
    let trace = config.trace()?;
    let assignment = assign_requests(&trace, config.num_stations, seeds.assignment)?;
    let ground = ground_truth_matrix(&trace, &assignment, config.num_stations)?;
    let popularity = match estimator {
        EstimatorArg::GroundTruth => ground,
        EstimatorArg::Cf => cf_estimate(
            &ground,
            config.cf_density,
            &config.factor(),
            seeds.sampling,
            seeds.factor_init,
        )?,
    };
    Ok((trace, assignment, popularity))
}

fn place_point(config: &RunConfig, point: &PointArgs) -> Result<(Trace, Assignment, CachePlacement)> {
    let (trace, assignment, popularity) = prepare(config, point.estimator)?;
    let budget = StorageBudget::from_percent(point.storage_pct, trace.catalog(), config.num_stations)?;
    let placement = greedy_place(&popularity, trace.catalog(), &budget, config.greedy_mode)?;
    Ok((trace, assignment, placement))
}

fn cmd_place(config: &RunConfig, point: &PointArgs, out: &Path) -> Result<()> {
    let (_, _, placement) = place_point(config, point)?;
    placement.save(out)?;
    println!("cached {} (station, content) pairs", placement.cached_count());
    Ok(())
}

fn cmd_simulate(config: &RunConfig, point: &PointArgs, records: bool, out: &Path) -> Result<()> {
    let (trace, assignment, placement) = place_point(config, point)?;
    let network = config.network();
    let result = simulate(&trace, &assignment, &placement, &network)?;
    result.save(out, &network, Some(config.seed), records)?;
    println!("eta = {}", result.satisfaction_ratio);
    println!("rho = {}", result.backhaul_load);
    if let Some(ok) = result.meets_min_satisfaction {
        println!("meets_min_satisfaction = {ok}");
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seeds: SeedSet,
    config: &'a RunConfig,
    outputs: [&'static str; 3],
}

pub fn cmd_sweep(config: &RunConfig, out: &Path) -> Result<()> {
    let trace = config.trace()?;
    let network = config.network();
    let spec = config.sweep_spec();
    let sweep = storage_sweep(&trace, &network, &spec)?;
    let density = density_sweep(
        &trace,
        &network,
        &config.train_densities_pct,
        &spec,
        config.density_replicates,
    )?;

    write(&out.join("fig5a.csv"), &sweep.satisfaction_csv())?;
    write(&out.join("fig5b.csv"), &sweep.backhaul_csv())?;
    write(&out.join("fig6.csv"), &density_csv(&density))?;
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seeds: config.seeds(),
            config,
            outputs: ["fig5a.csv", "fig5b.csv", "fig6.csv"],
        },
    )?;
    println!("wrote fig5a.csv, fig5b.csv, fig6.csv and manifest.json to {}", out.display());
    Ok(())
}
