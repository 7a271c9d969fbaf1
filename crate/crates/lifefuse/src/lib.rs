//! File formats, reports and the command-line driver around
//! [`lifefuse_core`].

pub mod checkpoint;
pub mod config;
pub mod echo;
mod error;
pub mod fsutil;
pub mod manifest;
pub mod report;
pub mod run;
pub mod streams;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use config::RunConfig;
pub use error::{Error, Result};
pub use run::Command;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CliCommand {
    Simulate,
    TrainUwb,
    TrainFusion,
    Eval,
    Sweep,
    Report,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::Simulate => Command::Simulate,
            CliCommand::TrainUwb => Command::TrainUwb,
            CliCommand::TrainFusion => Command::TrainFusion,
            CliCommand::Eval => Command::Eval,
            CliCommand::Sweep => Command::Sweep,
            CliCommand::Report => Command::Report,
        }
    }
}

/// Multi-sensor life detection: simulate, train, evaluate and report.
#[derive(Debug, Parser)]
#[command(name = "lifefuse", version)]
struct Cli {
    #[arg(value_enum)]
    command: CliCommand,
    /// JSON configuration merged over the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fusion preset: default, paper-exp or desk.
    #[arg(long)]
    preset: Option<String>,
    /// Suppress per-epoch progress on stderr.
    #[arg(long, short)]
    quiet: bool,
    /// Dotted-path overrides such as `fusion.epochs=5`.
    overrides: Vec<String>,
}

/// Runs the command line in `args` and returns the process exit code.
pub fn cli<I, T>(args: I, seed_env: Option<&str>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(args) {
        Ok(p) => p,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match RunConfig::resolve(
        parsed.preset.as_deref(),
        parsed.config.as_deref(),
        &parsed.overrides,
        seed_env,
    ) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let quiet = parsed.quiet;
    let mut log = |line: &str| {
        if !quiet {
            eprintln!("{line}");
        }
    };
    match run::run(parsed.command.into(), &cfg, &mut log) {
        Ok(manifest) => {
            if !quiet {
                eprintln!(
                    "{}: wrote {} artifacts to {}",
                    manifest.command,
                    manifest.artifacts.len(),
                    cfg.paths.output.display()
                );
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
