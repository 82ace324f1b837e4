use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use poro_cli::checks::check_outcome;
use poro_cli::config::{apply_entries, parse_entries, parse_override, ConfigError, Experiment, RunConfig};
use poro_cli::experiments::{run_experiment, write_outputs, RunError};

/// Four-field poroelasticity experiments.
#[derive(Parser)]
#[command(name = "poro", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Final-time errors over a ladder of time steps.
    ConvergeTime(Common),
    /// Final-time errors over a ladder of mesh sizes.
    ConvergeSpace(Common),
    /// Decoupled iteration history against the monolithic solution.
    Iterate(Common),
    /// Barry–Mercer point-source runs and cross-sections.
    BarryMercer(Common),
    /// A single run with per-step diagnostics and field output.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines, `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a key, for example `--set n=32`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; same as `--set output_dir=...`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Evaluate pass/fail checks and exit with status 3 on failure.
    #[arg(long)]
    check: bool,
}

fn load(experiment: Experiment, common: &Common) -> Result<RunConfig, ConfigError> {
    let mut entries = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
            parse_entries(&text)?
        }
        None => Vec::new(),
    };
    for s in &common.overrides {
        entries.push(parse_override(s)?);
    }
    let mut cfg = apply_entries(RunConfig::preset(experiment), &entries)?;
    if cfg.experiment != experiment {
        return Err(ConfigError::field(
            "experiment",
            format!("configuration selects '{}' but the subcommand runs '{experiment}'", cfg.experiment),
        ));
    }
    if let Some(dir) = &common.output {
        cfg.output_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match &cli.command {
        Command::ConvergeTime(c) => (Experiment::ConvergeTime, c),
        Command::ConvergeSpace(c) => (Experiment::ConvergeSpace, c),
        Command::Iterate(c) => (Experiment::Iterate, c),
        Command::BarryMercer(c) => (Experiment::BarryMercer, c),
        Command::Run(c) => (Experiment::SingleRun, c),
    };
    let cfg = match load(experiment, common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = run_experiment(&cfg).and_then(|outcome| {
        let written = write_outputs(&cfg, &outcome)?;
        Ok((outcome, written))
    });
    let (outcome, written) = match result {
        Ok(r) => r,
        Err(e @ RunError::Config(_)) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    for path in &written {
        println!("wrote {}", path.display());
    }
    if common.check {
        let checks = match check_outcome(&cfg, &outcome) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
        };
        for c in &checks {
            println!("{c}");
        }
        if checks.iter().any(|c| !c.pass) {
            return ExitCode::from(3);
        }
    }
    ExitCode::SUCCESS
}
