//! `dqc` command-line runner: experiment subcommands, config files, presets and spectrum analysis.

pub mod analyze;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod presets;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map};
use toml::Table;

use crate::analyze::AnalyzeArgs;
use crate::config::{ConfigFile, Experiment, Layers, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Check, CheckKind, Output};

#[derive(Debug, Parser)]
#[command(name = "dqc", version, about = "Spectral and trajectory diagnostics of open quantum dynamics")]
pub struct Cli {
    /// Master seed; every realization draws from its own stream of it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to the available cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Runs one experiment from flags, a preset and/or a config file.
    Run(RunArgs),
    /// Computes statistics of a spectrum file.
    Analyze(AnalyzeArgs),
    /// Lists the presets, or prints one as a config file.
    Presets {
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML config with `experiment`, `seed`, `workers`, `out` and one section per experiment.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Overrides one key of the experiment section; the value is read as TOML.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Prints the resolved config and exits.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub experiment: Option<ExperimentCmd>,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCmd {
    /// Stroboscopic spin map: sector spectra, I(s) and eigenvalue flow.
    Ghs(GhsFlags),
    /// Random Lindbladians against the lemon boundary.
    RandomLindblad,
    /// Lemon support and densities.
    Lemon,
    /// Diluted unitaries and their radii.
    Diluted,
    /// Random Hamiltonian circuit with noise.
    Rpqc,
    /// Complex spacing ratios.
    Csr,
    /// Planar nearest-neighbour spacings of an ensemble.
    Spacings,
    /// Spectral form factor.
    Sff,
    /// Dissipative form factor with the trace-of-powers check.
    Dff,
    /// Dissipative spectral form factor.
    Dsff,
    /// Driven Kerr cavity trajectories and Lyapunov maps.
    Kerr(KerrFlags),
    /// Symmetry checks and sector decompositions.
    Symmetry,
}

impl ExperimentCmd {
    fn split(&self) -> (Experiment, CliResult<Table>) {
        fn table<T: Serialize>(t: &T) -> CliResult<Table> {
            Table::try_from(t).map_err(|e| CliError::Usage(e.to_string()))
        }
        match self {
            Self::Ghs(f) => (Experiment::Ghs, table(f)),
            Self::RandomLindblad => (Experiment::RandomLindblad, Ok(Table::new())),
            Self::Lemon => (Experiment::Lemon, Ok(Table::new())),
            Self::Diluted => (Experiment::Diluted, Ok(Table::new())),
            Self::Rpqc => (Experiment::Rpqc, Ok(Table::new())),
            Self::Csr => (Experiment::Csr, Ok(Table::new())),
            Self::Spacings => (Experiment::Spacings, Ok(Table::new())),
            Self::Sff => (Experiment::Sff, Ok(Table::new())),
            Self::Dff => (Experiment::Dff, Ok(Table::new())),
            Self::Dsff => (Experiment::Dsff, Ok(Table::new())),
            Self::Kerr(f) => (Experiment::Kerr, table(f)),
            Self::Symmetry => (Experiment::Symmetry, Ok(Table::new())),
        }
    }
}

/// Spin-map parameters as flags; unset flags leave the config untouched.
#[derive(Debug, Default, Args, Serialize)]
pub struct GhsFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_s: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k0_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k0_steps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// `consistent` or `literal`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jump: Option<String>,
    /// `parity` or `fixed-q`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sectors: Option<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<i64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistics: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow_gamma_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow_gamma_step: Option<f64>,
}

/// Cavity and sweep parameters as flags.
#[derive(Debug, Default, Args, Serialize)]
pub struct KerrFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude_steps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period_steps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_periods: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient_periods: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub click_periods: Option<f64>,
}

fn pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::invalid("workers", e.to_string()))
}

/// Resolves the layers of a `run` invocation.
pub fn resolve_run(cli: &Cli, args: &RunArgs) -> CliResult<RunConfig> {
    let (experiment, flags) = match &args.experiment {
        Some(cmd) => {
            let (e, t) = cmd.split();
            (Some(e), t?)
        }
        None => (None, Table::new()),
    };
    let preset = match &args.preset {
        Some(name) => Some(presets::find(name).ok_or_else(|| {
            let names: Vec<&str> = presets::PRESETS.iter().map(|p| p.name).collect();
            CliError::Usage(format!("unknown preset `{name}`; available: {}", names.join(", ")))
        })?),
        None => None,
    };
    let file = args.config.as_deref().map(ConfigFile::read).transpose()?;
    config::resolve(&Layers {
        experiment,
        preset,
        file,
        set: args.set.clone(),
        flags,
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out.clone(),
    })
}

/// Runs a resolved configuration into its output directory.
pub fn execute(cfg: &RunConfig) -> CliResult<Vec<Check>> {
    let name = cfg.experiment().name();
    let provenance = json!({ "experiment": name, "seed": cfg.seed, "config": cfg.params.to_json() });
    let mut out = Output::new(&cfg.out, provenance)?;
    std::fs::write(cfg.out.join("config.toml"), cfg.to_toml())
        .map_err(|e| CliError::io(format!("writing {}", cfg.out.join("config.toml").display()), e))?;
    log::info!("running {name} with seed {} on {} worker(s) into {}", cfg.seed, cfg.workers, cfg.out.display());
    pool(cfg.workers)?.install(|| experiments::run(cfg, &mut out))?;
    let mut manifest = Map::new();
    manifest.insert("command".into(), json!("run"));
    manifest.insert("experiment".into(), json!(name));
    manifest.insert("seed".into(), json!(cfg.seed));
    manifest.insert("workers".into(), json!(cfg.workers));
    manifest.insert("config".into(), serde_json::to_value(toml::from_str::<Table>(&cfg.to_toml()).expect("own TOML parses")).unwrap_or_default());
    out.finish(manifest)
}

fn report(checks: &[Check], dir: &std::path::Path) {
    for c in checks {
        let kind = match c.kind {
            CheckKind::Invariant => "invariant",
            CheckKind::Expectation => "expectation",
        };
        println!("{} {kind} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {}", dir.display());
}

pub fn dispatch(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Run(args) => {
            let cfg = resolve_run(&cli, args)?;
            if args.dry_run {
                print!("{}", cfg.to_toml());
                return Ok(());
            }
            let checks = execute(&cfg)?;
            report(&checks, &cfg.out);
        }
        Command::Analyze(args) => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("dqc-out").join("analyze"));
            let seed = cli.seed.unwrap_or(config::DEFAULT_SEED);
            let checks = pool(cli.workers.unwrap_or_else(config::default_workers))?.install(|| analyze::analyze(args, &out, seed))?;
            report(&checks, &out);
        }
        Command::Presets { show } => match show {
            Some(name) => {
                let p = presets::find(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
                let cfg = config::resolve(&Layers { preset: Some(p), seed: cli.seed, workers: Some(cli.workers.unwrap_or(1)), out: cli.out.clone(), ..Layers::default() })?;
                print!("{}", cfg.to_toml());
            }
            None => {
                for p in presets::PRESETS {
                    println!("{:<6} {:<8} {:>6}  {}", p.name, p.experiment.name(), p.budget, p.description);
                }
            }
        },
    }
    Ok(())
}

/// Parses arguments, runs, prints errors and maps them to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
