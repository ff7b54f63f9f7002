//! `zpol`: spectra, sweeps, fits and Dicke comparisons for Zeeman polaritons.
//!
//! Exit codes: 0 success, 2 config error, 3 data error, 4 non-convergence, 5 IO.

/// `println!` that tolerates a closed stdout.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

mod commands;
mod config;
mod dataset;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "zpol", version, about = "Zeeman polariton simulation and fitting")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true, env = "ZPOL_OUT_DIR")]
    out: Option<PathBuf>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transmission, reflection and χ of the slab at one field and temperature.
    Spectrum,
    /// Transmittance map and splitting summary along one axis.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
    },
    /// Fit g0 to a measured splitting-versus-temperature table.
    Fit {
        #[arg(long)]
        data: PathBuf,
    },
    /// Dicke-model splitting against the Hopfield branches for several N.
    DickeCompare,
    /// Fabry–Pérot mode frequencies and linewidths of the bare slab.
    Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Field,
    Temperature,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let source = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let config = RunConfig::from_toml(&source)
        .map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;

    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }

    let out_dir = cli.out.or_else(|| config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let sink = output::Sink::new(out_dir)?;

    match cli.command {
        Command::Spectrum => commands::spectrum(&config, &sink),
        Command::Sweep { axis } => commands::sweep(&config, &sink, axis),
        Command::Fit { data } => commands::fit(&config, &sink, &data),
        Command::DickeCompare => commands::dicke_compare(&config, &sink),
        Command::Diagnostics => commands::diagnostics(&config, &sink),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zpol: {e}");
            e.exit_code()
        }
    }
}
