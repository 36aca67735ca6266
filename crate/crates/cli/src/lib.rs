//! The `exforge` command line: subcommands for each pipeline stage plus
//! `pipeline`, which runs them end to end.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{Context, Counts};
use crate::config::{load_config, Backend, Overrides};
use crate::error::{CliError, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "exforge", version, about = "Generate CLI usage examples from telemetry and mined snippets")]
pub struct Cli {
    /// TOML configuration file; relative paths inside it resolve against its directory.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Templates kept per command.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Type predictions below this confidence leave a placeholder.
    #[arg(long, global = true)]
    pub min_confidence: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<Backend>,
    /// Output directory.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Aggregate telemetry into ranked parameter-set templates.
    Templates,
    /// Mine invocations from the corpus and build the value lookup.
    Mine,
    /// Train the parameter-type classifier.
    TrainTyper {
        /// Also write a cross-validation report.
        #[arg(long)]
        cv: bool,
    },
    /// Fill templates with concrete values.
    Fill,
    /// Build the masked pretraining and fine-tuning datasets.
    Datasets,
    /// Render help text, reference docs and doc patches.
    Render,
    /// Coverage, help-success and ROUGE reports.
    Evaluate,
    /// templates, mine, train-typer, fill and render, plus a run manifest.
    Pipeline,
}

fn summary(out: &mut impl Write, stage: &str, counts: &Counts) {
    let parts: Vec<String> = counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(out, "{stage}: {}", parts.join(" "));
}

fn execute(cli: &Cli, env: Vec<(String, String)>) -> Result<(), CliError> {
    let overrides = Overrides {
        k: cli.k,
        seed: cli.seed,
        min_confidence: cli.min_confidence,
        backend: cli.backend,
        output: cli.output.clone(),
    };
    let (cfg, base) = load_config(cli.config.as_deref(), env, &overrides)?;
    let mut ctx = Context::new(cfg, base);
    let stdout = &mut std::io::stdout().lock();
    let (name, counts) = match &cli.command {
        Command::Templates => ("templates", commands::templates(&mut ctx)?),
        Command::Mine => ("mine", commands::mine(&mut ctx)?),
        Command::TrainTyper { cv } => ("train-typer", commands::train_typer(&mut ctx, *cv)?),
        Command::Fill => ("fill", commands::fill(&mut ctx)?),
        Command::Datasets => ("datasets", commands::datasets(&mut ctx)?),
        Command::Render => ("render", commands::render(&mut ctx)?),
        Command::Evaluate => ("evaluate", commands::evaluate(&mut ctx)?),
        Command::Pipeline => {
            for (stage, c) in commands::pipeline(&mut ctx)? {
                summary(stdout, &stage, &c);
            }
            return Ok(());
        }
    };
    summary(stdout, name, &counts);
    Ok(())
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit status.
pub fn run<I, T>(args: I, env: impl IntoIterator<Item = (String, String)>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli, env.into_iter().collect()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("exforge: {}", e.one_line());
            e.exit_code()
        }
    }
}
