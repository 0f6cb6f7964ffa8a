//! Command-line surface: one subcommand per experiment kind.

use crate::config::{Experiment, RunConfig};
use crate::error::{HarnessError, Result};
use crate::experiments::run_experiment;
use crate::report::ExperimentReport;
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "fdwave", version, about = "Spectral simulator and verification lab for a fractionally damped wave equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration; its experiment kind must match the subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory (default: runs/<subcommand>).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Overrides initial.seed of the configuration.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Suppress the PASS/FAIL summary.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    Simulate,
    Dissipative,
    Regularity,
    Twin,
    Smoothing,
    FracopsVerify,
    CommutatorStudy,
    Gronwall,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Dissipative => "dissipative",
            Command::Regularity => "regularity",
            Command::Twin => "twin",
            Command::Smoothing => "smoothing",
            Command::FracopsVerify => "fracops-verify",
            Command::CommutatorStudy => "commutator-study",
            Command::Gronwall => "gronwall",
            Command::Sweep => "sweep",
        }
    }
}

/// The configuration a parsed command line asks for.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let name = cli.command.name();
    let mut config = match &cli.config {
        Some(path) => {
            let config = RunConfig::load(path)?;
            if config.experiment.name() != name {
                return Err(HarnessError::config(format!(
                    "{} describes a {} experiment, not {name}",
                    path.display(),
                    config.experiment.name()
                )));
            }
            config
        }
        None => {
            let experiment: Experiment = Experiment::default_for(name)
                .ok_or_else(|| HarnessError::config(format!("{name} needs --config (no default parameters)")))?;
            RunConfig::with_experiment(experiment)
        }
    };
    if let Some(seed) = cli.seed {
        config.initial.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn execute(cli: &Cli) -> Result<ExperimentReport> {
    let config = resolve_config(cli)?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(cli.command.name()));
    run_experiment(&config, &out)
}

/// Parses `args`, runs the experiment and returns the process exit code:
/// 0 pass, 1 criterion failure, 2 configuration error, 3 diverged run.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            if !cli.quiet {
                for line in report.summary_lines() {
                    println!("{line}");
                }
                for note in &report.notes {
                    println!("note: {note}");
                }
            }
            if report.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
