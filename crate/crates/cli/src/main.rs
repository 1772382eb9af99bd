use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use jmarkov_cli::commands::{generator_json, generator_text, kernels_json, CommandError};
use jmarkov_cli::scenario::{parse_positive, Overrides};
use jmarkov_cli::{demos, emit, json, parse_scenario, run_checks, InputError, Model, Scenario};

#[derive(Parser)]
#[command(name = "jmarkov", version, about = "Verify Jordan-algebraic Markov scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct RunOpts {
    /// Equality and positivity tolerance.
    #[arg(long, value_parser = parse_positive)]
    tol: Option<f64>,
    /// Seed for sampled checks.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in a scenario file.
    Check {
        file: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Built-in scenarios.
    Demo {
        #[command(subcommand)]
        action: DemoAction,
    },
    /// Write every kernel V_{s,t} of the scenario's process as JSON.
    Kernels {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generator log(V_Δ)/Δ of a stationary process, with its classification.
    Generator {
        file: PathBuf,
        #[arg(long, value_parser = parse_positive)]
        delta: f64,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Subcommand)]
enum DemoAction {
    List,
    Run {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Print the scenario JSON.
    Show { name: String },
}

fn overrides(opts: Option<&RunOpts>) -> Result<Overrides, InputError> {
    let mut o = Overrides::from_env()?;
    if let Some(opts) = opts {
        o.tol = opts.tol;
        o.seed = opts.seed;
    }
    Ok(o)
}

fn model(s: Scenario, opts: Option<&RunOpts>) -> Result<Model, CommandError> {
    Ok(Model::new(s, &overrides(opts)?)?)
}

fn check(s: Scenario, opts: &RunOpts) -> Result<(String, bool), CommandError> {
    let m = model(s, Some(opts))?;
    let report = run_checks(&m);
    let text = match opts.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    Ok((text, report.passed()))
}

fn run(cli: Cli) -> Result<(String, bool), CommandError> {
    match cli.command {
        Command::Check { file, opts } => check(parse_scenario(&file)?, &opts),
        Command::Demo { action } => match action {
            DemoAction::List => {
                let lines: Vec<String> = demos::NAMES.iter().map(|n| format!("{n:<24} {}", demos::describe(n))).collect();
                Ok((lines.join("\n") + "\n", true))
            }
            DemoAction::Run { name, opts } => check(demos::demo(&name)?, &opts),
            DemoAction::Show { name } => Ok((emit(&demos::demo(&name)?), true)),
        },
        Command::Kernels { file, out } => {
            let m = model(parse_scenario(&file)?, None)?;
            let text = kernels_json(&m)?;
            std::fs::write(&out, text).map_err(|e| InputError::at(out.display().to_string(), e))?;
            Ok((format!("wrote {}\n", out.display()), true))
        }
        Command::Generator { file, delta, opts } => {
            let m = model(parse_scenario(&file)?, Some(&opts))?;
            let v = generator_json(&m, delta)?;
            let text = match opts.format {
                Format::Text => generator_text(&v),
                Format::Json => json::canonical(&v),
            };
            Ok((text, true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, passed)) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            ExitCode::from(if passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("jmarkov: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
