//! Command-line front end: parses a JSON run configuration, invokes the
//! matching solver, and emits a human summary, JSON report, or CSV sweep.
//!
//! Exit status contract: 0 on success, 2 on configuration errors (the
//! message names the offending field), 3 on numerical/solver errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use deliberate::config::{parse_config, run, OutputFormat, RunConfig, RunOptions, TaskKind};
use deliberate::Error;

#[derive(Parser)]
#[command(
    name = "deliberate",
    version,
    about = "Deliberation scheduling: ideal stopping times and planning/execution splits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ideal execution time before acting, for a fixed value profile.
    SolveStopping(CommonArgs),
    /// Ideal split between solution planning and execution.
    SolvePartition(CommonArgs),
    /// Planning time minimizing total time to a target quality.
    SolveGoal(CommonArgs),
    /// Lifetime value of a planning capability across an environment.
    EvalEnvironment(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output destination; `-` means standard output.
    #[arg(long)]
    output: Option<String>,
    /// Output format; single solves default to text, sweeps to CSV.
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Include first-order residuals and side-by-side closed forms.
    #[arg(long)]
    verbose: bool,
    /// Monte Carlo seed override (forces the Monte Carlo path).
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample-count override (forces the Monte Carlo path).
    #[arg(long)]
    samples: Option<usize>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(format!("unknown format `{other}`; expected csv or json")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (expected, args) = match &cli.command {
        Command::SolveStopping(a) => (TaskKind::Stopping, a),
        Command::SolvePartition(a) => (TaskKind::Partition, a),
        Command::SolveGoal(a) => (TaskKind::Goal, a),
        Command::EvalEnvironment(a) => (TaskKind::Environment, a),
    };
    match execute(expected, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn execute(expected: TaskKind, args: &CommonArgs) -> Result<(), Error> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Error::config("config", format!("{}: {e}", args.config.display())))?;
    let config: RunConfig = parse_config(&text)?;
    if config.task.kind() != expected {
        return Err(Error::config(
            "task.type",
            format!(
                "configuration task does not match the `{}` subcommand",
                subcommand_name(expected)
            ),
        ));
    }

    let options = RunOptions {
        verbose: args.verbose,
        seed: args.seed,
        samples: args.samples,
    };
    let output = run(&config, &options)?;

    let format = args
        .format
        .or_else(|| config.output.as_ref().and_then(|o| o.format));
    let rendered = deliberate::config::render_output(&output, format)?;

    let destination = args
        .output
        .clone()
        .or_else(|| config.output.as_ref().and_then(|o| o.path.clone()));
    match destination.as_deref() {
        None | Some("-") => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.as_bytes())
                .map_err(|e| Error::config("output", e.to_string()))?;
        }
        Some(path) => {
            fs::write(path, rendered)
                .map_err(|e| Error::config("output.path", format!("{path}: {e}")))?;
        }
    }
    Ok(())
}

fn subcommand_name(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::Stopping => "solve-stopping",
        TaskKind::Partition => "solve-partition",
        TaskKind::Goal => "solve-goal",
        TaskKind::Environment => "eval-environment",
    }
}
