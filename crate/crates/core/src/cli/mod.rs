//! The `cjt` command line: argument parsing, dispatch and file output.

pub mod commands;
pub mod config;
pub mod format;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use config::{check_precision, Format, RunConfig};
use format::Table;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;
pub const EXIT_SWEEP_FAILED: i32 = 6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Units {
    /// Energies divided by g (when g > 0).
    #[default]
    G,
    Absolute,
}

#[derive(Debug, Parser)]
#[command(name = "cjt", version, about = "Mean-field phases, collective modes and exact diagonalization of the cooperative E(x)e Jahn-Teller lattice")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Saddle point: phase, g_c, angles, condensate, energy per site.
    Meanfield(CommonArgs),
    /// Three collective branches for every k.
    Dispersion(CommonArgs),
    /// Amplitude gaps, Ω and the Goldstone velocity.
    Gaps(CommonArgs),
    /// Dispersion at Δ/g = 1, t/g = 0.5, ω_z/g = 1 plus a scalar sidecar.
    Fig1(Fig1Args),
    /// Exact diagonalization checks against mean field and the U(1) symmetry.
    EdCheck(CommonArgs),
    /// Evaluate a command over a parameter grid.
    Sweep(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Units::G)]
    pub units: Units,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Digits after the decimal point, 6 to 17.
    #[arg(long)]
    pub precision: Option<usize>,
    /// Sweep worker threads.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of sites; overrides model.N of the config.
    #[arg(long)]
    pub sites: Option<usize>,
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::InvalidInput(_) => EXIT_CONFIG,
        Error::NonConvergence { .. } | Error::EigenNonConvergence { .. } => EXIT_NONCONVERGENCE,
        Error::DimensionBudget { .. } => EXIT_BUDGET,
        Error::UnstableBosonSector { .. }
        | Error::NonUniformLattice
        | Error::OutOfDomain(_)
        | Error::UnstableFluctuationSpectrum { .. }
        | Error::NonInvertible { .. }
        | Error::NotPositiveDefinite { .. } => EXIT_DOMAIN,
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { code: exit_code(&e), message: e.to_string() }
    }
}

struct Settings {
    format: Format,
    precision: usize,
    out: Option<PathBuf>,
}

fn settings(args: &CommonArgs, config: Option<&RunConfig>) -> Result<Settings, Failure> {
    let output = config.map(|c| c.output.clone()).unwrap_or_default();
    let precision = args.precision.unwrap_or(output.precision);
    check_precision(precision)?;
    Ok(Settings {
        format: args.format.unwrap_or(output.format),
        precision,
        out: args.out.clone().or(output.path),
    })
}

fn load(args: &CommonArgs) -> Result<RunConfig, Failure> {
    let path = args.config.as_ref().ok_or_else(|| Failure { code: EXIT_CONFIG, message: "--config is required".into() })?;
    Ok(RunConfig::load(path)?)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure { code: EXIT_IO, message: format!("cannot write {}: {e}", path.display()) })
}

/// Writes to the configured file, or stdout without one. Records are also
/// echoed to stdout when written to a file.
fn emit(table: &Table, settings: &Settings, record: bool) -> Result<(), Failure> {
    let text = table.render(settings.format, settings.precision, record);
    match &settings.out {
        Some(path) => {
            write_text(path, &text)?;
            if record {
                print!("{text}");
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// `<dir>/<stem>.scalars.json` next to the main output.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "fig1".into());
    out.with_file_name(format!("{stem}.scalars.json"))
}

fn dispatch(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Command::Meanfield(args) | Command::Dispersion(args) | Command::Gaps(args) | Command::EdCheck(args) => {
            let config = load(args)?;
            let settings = settings(args, Some(&config))?;
            let (table, record) = match &cli.command {
                Command::Meanfield(_) => (commands::cmd_meanfield(&config, args.units)?, true),
                Command::Dispersion(_) => (commands::cmd_dispersion(&config, args.units)?, false),
                Command::Gaps(_) => (commands::cmd_gaps(&config, args.units)?, true),
                _ => (commands::cmd_ed_check(&config, args.units)?, true),
            };
            emit(&table, &settings, record)?;
            Ok(EXIT_OK)
        }
        Command::Sweep(args) => {
            let config = load(args)?;
            let settings = settings(args, Some(&config))?;
            let workers = args.workers.or(config.workers);
            if workers == Some(0) {
                return Err(Error::InvalidInput("workers must be at least 1".into()).into());
            }
            let (table, succeeded) = commands::run_sweep(&config, args.units, workers)?;
            emit(&table, &settings, false)?;
            if succeeded == 0 {
                eprintln!("cjt: every sweep point failed");
                return Ok(EXIT_SWEEP_FAILED);
            }
            Ok(EXIT_OK)
        }
        Command::Fig1(fig) => {
            let config = match &fig.common.config {
                Some(_) => Some(load(&fig.common)?),
                None => None,
            };
            let mut settings = settings(&fig.common, config.as_ref())?;
            let sites = fig.sites.or(config.as_ref().and_then(|c| c.model.n)).unwrap_or(commands::FIG1_SITES);
            let (table, scalars) = commands::cmd_fig1(sites)?;
            let out = settings.out.take().unwrap_or_else(|| {
                PathBuf::from(match settings.format {
                    Format::Csv => "fig1.csv",
                    Format::Json => "fig1.json",
                })
            });
            write_text(&out, &table.render(settings.format, settings.precision, false))?;
            write_text(&sidecar_path(&out), &scalars.to_json_record(settings.precision))?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("cjt: {}", f.message);
            f.code
        }
    }
}
