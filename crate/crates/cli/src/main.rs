//! `vgrad`: batch driver for vorticity-gradient growth experiments.
//!
//! Exit statuses: 0 all checks pass, 1 a check failed (or a report found no
//! checks), 2 usage or configuration error, 3 numerical blow-up.

mod config;
mod error;
mod manifest;
mod model;
mod report;
mod simulate;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vgrad::diagnostics::{CheckReport, ReportStatus};

use config::Config;
use error::{CliError, EXIT_BLOW_UP, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};
use manifest::{Outputs, RunManifest, MANIFEST_NAME};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "VGRAD_OUT";
const DEFAULT_OUT: &str = "vgrad-out";

#[derive(Debug, Parser)]
#[command(name = "vgrad", version, about = "Vorticity-gradient growth experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (default: [output] dir, then $VGRAD_OUT, then ./vgrad-out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for the data-parallel loops.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Seed for randomized test-point sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build initial data and run the Euler solver.
    Simulate {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Integrate the model ODE and its variational equations.
    Model {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Run a parameter family and fit across it.
    Sweep {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Aggregate the checks of one or more runs.
    Report {
        #[arg(required = true, value_name = "MANIFEST")]
        manifests: Vec<PathBuf>,
    },
}

pub struct Context {
    pub config: Config,
    pub config_text: String,
    pub seed: u64,
    pub threads: usize,
}

fn out_dir(flag: Option<&Path>, config: Option<&Config>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.and_then(|c| c.output.dir.clone()))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn set_threads(n: Option<usize>) -> Result<(), CliError> {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        eprintln!("vgrad: built without the `parallel` feature; running on one thread");
    }
    Ok(())
}

type Runner = fn(&Context, &mut Outputs) -> Result<(RunManifest, CheckReport), CliError>;

fn run_command(cli: &Cli, config: &Path, runner: Runner) -> Result<CheckReport, CliError> {
    let (cfg, text) = Config::load(config)?;
    let dir = out_dir(cli.out.as_deref(), Some(&cfg));
    let ctx = Context {
        config: cfg,
        config_text: text,
        seed: cli.seed,
        threads: vgrad::par::threads(),
    };
    let mut out = Outputs::create(&dir)?;
    let (mut manifest, checks) = runner(&ctx, &mut out)?;
    manifest.files = out.files().to_vec();
    out.write_text(MANIFEST_NAME, &manifest.render())?;
    Ok(checks)
}

fn exit_for(checks: &CheckReport) -> i32 {
    match checks.status() {
        ReportStatus::Pass => EXIT_PASS,
        ReportStatus::Fail { .. } | ReportStatus::Empty => EXIT_CHECK_FAILED,
    }
}

fn real_main(cli: Cli) -> Result<i32, CliError> {
    set_threads(cli.threads)?;
    let checks = match &cli.command {
        Command::Simulate { config } => run_command(&cli, config, simulate::cmd_simulate)?,
        Command::Model { config } => run_command(&cli, config, model::cmd_model)?,
        Command::Sweep { config } => run_command(&cli, config, sweep::cmd_sweep)?,
        Command::Report { manifests } => {
            let checks = report::collect(manifests)?;
            print!("{}", checks.render());
            let dir = out_dir(cli.out.as_deref(), None);
            let mut out = Outputs::create(&dir)?;
            out.write_text("report.txt", &checks.render())?;
            checks.write_csv(&out.file("report.csv"))?;
            match checks.status() {
                ReportStatus::Pass => println!("report: {} checks, all pass", checks.rows.len()),
                ReportStatus::Fail { failed } => {
                    println!("report: {failed} of {} checks fail", checks.rows.len())
                }
                ReportStatus::Empty => println!("report: no checks found"),
            }
            return Ok(exit_for(&checks));
        }
    };
    for row in checks.failing() {
        eprintln!("vgrad: check failed: {row}");
    }
    Ok(exit_for(&checks))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_PASS as u8 });
        }
    };
    let code = match real_main(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("vgrad: {e}");
            e.exit_code()
        }
    };
    debug_assert!([EXIT_PASS, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_BLOW_UP].contains(&code));
    ExitCode::from(code as u8)
}
