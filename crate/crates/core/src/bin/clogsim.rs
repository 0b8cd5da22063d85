use clap::{Parser, Subcommand};
use clogsim::config::{load_config, ConfigError, RunConfig};
use clogsim::experiments::{classify_clogging, run_simulation, sweep_transition, SweepError};
use clogsim::output::{emit_run, emit_sweep, emit_verify, OutputError, RunSummary};
use clogsim::verification::{run_suite, Suite};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use thiserror::Error;

/// Aquarium filtration simulator. Set `RUST_LOG` for log verbosity.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write time series, heatmaps and a summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the (C_rho, f) sweep and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run numerical verification checks and write verify.csv.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Blowup(String),
    #[error("{0} verification check(s) failed")]
    Verification(usize),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Sweep(_) => 2,
            CliError::Blowup(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Output(_) | CliError::Usage(_) => 1,
        }
    }
}

fn output_dir(cli: Option<PathBuf>, config: &RunConfig) -> Result<PathBuf, CliError> {
    cli.or_else(|| config.output_dir.clone())
        .ok_or_else(|| CliError::Usage("no output directory: pass --out or set [output] dir".into()))
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    Ok(load_config(path)?.config)
}

fn simulate(config_path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let config = load(config_path)?;
    let dir = output_dir(out, &config)?;
    let params = config.params()?;
    let initial = config.initial_state()?;
    let start = Instant::now();
    let record = run_simulation(&params, &config.grid, &config.time, &initial)
        .map_err(|e| CliError::Blowup(e.to_string()))?;
    let summary = RunSummary {
        classification: classify_clogging(&record, config.experiment.threshold),
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: config.experiment.seed,
        config_hash: config.hash(),
    };
    emit_run(&record, &summary, &config.grid, &dir)?;
    log::info!(
        "{}: growth rate {:e}, wrote {}",
        summary.classification,
        record.final_growth_rate,
        dir.display()
    );
    Ok(())
}

fn sweep(config_path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let config = load(config_path)?;
    let dir = output_dir(out, &config)?;
    let e = &config.experiment;
    let result = sweep_transition(
        &config.dimensional_base(),
        &e.c_rho,
        &e.f,
        &config.grid,
        &config.time,
        &config.initial_state()?,
        e.threshold,
    )?;
    let failed = result.cells.iter().filter(|c| c.classification.is_err()).count();
    if failed > 0 {
        log::warn!("{failed} cell(s) failed");
    }
    let path = emit_sweep(&result, &dir)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn verify(suite: &str, seed: u64, out: &Path) -> Result<(), CliError> {
    let suite: Suite = suite
        .parse()
        .map_err(|e: clogsim::verification::VerifyError| CliError::Usage(e.to_string()))?;
    let reports = run_suite(suite, seed);
    for r in &reports {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        println!("{mark} {} measured={:e} ({})", r.name, r.measured, r.details);
    }
    emit_verify(&reports, out)?;
    match reports.iter().filter(|r| !r.passed).count() {
        0 => Ok(()),
        n => Err(CliError::Verification(n)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out } => simulate(&config, out),
        Command::Sweep { config, out } => sweep(&config, out),
        Command::Verify { suite, seed, out } => verify(&suite, seed, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
