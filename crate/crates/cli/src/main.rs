//! `atomdiode <command> --config <path> [--out <path>] [--format csv|json] [--seed N] [--threads N]`
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use config::{Command, Format, Overrides, RawConfig, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure in {module}: {detail}")]
    Numerical { module: &'static str, detail: String },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

impl From<atomdiode::Error> for CliError {
    fn from(e: atomdiode::Error) -> Self {
        use atomdiode::Error as E;
        if !e.is_numerical() {
            return CliError::Config(e.to_string());
        }
        let module = match &e {
            E::Instability { module, .. } => module,
            E::EmptyNullspace => "liouville",
            E::ZeroFlux => "correlations",
            E::UndefinedEfficiency => "diode",
            E::InsufficientData(_) => "flapper",
            _ => "qmat",
        };
        CliError::Numerical { module, detail: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "atomdiode", version, about = "Batch runs of the two-atom waveguide diode model")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output if absent and the config sets none.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Master seed for Monte Carlo runs.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot start {n} threads: {e}")))?;
    }
    let raw = RawConfig::read(&cli.config)?;
    let ov = Overrides { out: cli.out.clone(), format: cli.format, seed: cli.seed };
    let cfg = RunConfig::resolve(&raw, cli.command, &ov)?;
    let report = commands::run(&cfg)?;

    let write = |w: &mut dyn Write| -> io::Result<()> {
        match cfg.format {
            Format::Csv => report.table.write_csv(&mut *w),
            Format::Json => {
                let doc = json!({
                    "tool": "atomdiode",
                    "version": env!("CARGO_PKG_VERSION"),
                    "command": cfg.command.name(),
                    "regime": report.regime,
                    "config": cfg.to_json(),
                    "result": report.result,
                });
                serde_json::to_writer_pretty(&mut *w, &doc)?;
                writeln!(w)
            }
        }
    };
    match &cfg.output_path {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::config(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w).and_then(|_| w.flush())
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w).and_then(|_| w.flush())
        }
    }
    .map_err(|e| CliError::config(format!("cannot write output: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("atomdiode: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
