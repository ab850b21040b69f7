use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use log::{error, LevelFilter};

mod commands;
mod config;

use commands::Command;
use config::RunConfig;

/// Stability-audited time stepping for coupled parabolic systems.
#[derive(Parser)]
#[command(name = "splitstep", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV output.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Suppress summaries and informational logging.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Integrate once and record per-step norms and estimate slacks.
    Run,
    /// Observed temporal order against the modal reference.
    Converge,
    /// Estimate slacks over a grid of schemes, sigmas and time steps.
    Stability,
    /// Difference between the weighted and factorized schemes.
    Compare,
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn init_logging(quiet: bool, verbosity: Option<&str>) {
    let level = if quiet {
        LevelFilter::Error
    } else {
        verbosity.and_then(|v| v.parse().ok()).unwrap_or(LevelFilter::Info)
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();
}

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var("SPLITSTEP_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .map_err(|_| anyhow::anyhow!("SPLITSTEP_THREADS must be a positive integer, got {value:?}"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    #[cfg(not(feature = "parallel"))]
    log::warn!("SPLITSTEP_THREADS={n} ignored: built without the parallel feature");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::Run => Command::Run,
        Cmd::Converge => Command::Converge,
        Cmd::Stability => Command::Stability,
        Cmd::Compare => Command::Compare,
    };

    let prepared = cli
        .config
        .as_deref()
        .ok_or_else(|| anyhow::anyhow!("--config <path> is required"))
        .and_then(RunConfig::load)
        .and_then(|cfg| {
            init_logging(cli.quiet, cfg.verbosity());
            init_threads()?;
            let job = commands::prepare(cmd, &cfg)?;
            Ok((cfg, job))
        });
    let (cfg, job) = match prepared {
        Ok(p) => p,
        Err(e) => {
            init_logging(cli.quiet, None);
            error!("configuration error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    match commands::execute(cmd, job, &cfg, &cli.out, cli.quiet) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            error!("{e:#}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
