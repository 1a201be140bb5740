use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::{FileConfig, PipelineConfig};

#[derive(Parser)]
#[command(name = "scorewave", version, about = "Score-to-performance data pipeline and evaluation")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "SCOREWAVE_JOBS")]
    jobs: Option<usize>,
    /// Exit with status 1 if any input fails.
    #[arg(long, global = true)]
    strict: bool,
    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cut MIDI files into windows and write token streams plus an index.
    Tokenize(commands::tokenize::Args),
    /// Write speed- or mistake-augmented MIDI with a report.
    Augment(commands::augment::Args),
    /// Render text prompts.
    Prompt(commands::prompt::Args),
    /// Build curriculum manifests from a dataset registry.
    Manifest(commands::manifest::Args),
    /// Show how a set of manifests would be scheduled.
    SchedulePreview(commands::schedule::Args),
    /// Compute metrics over output/reference pairs.
    Evaluate(commands::evaluate::Args),
    /// Render MIDI or a click track to WAV.
    Synth(commands::synth::Args),
}

/// Failure classes mapped to exit statuses.
pub enum Failure {
    /// Bad flags, config or missing inputs: exit 2.
    Config(anyhow::Error),
    /// A run that could not complete, or a strict-mode item failure: exit 1.
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

pub type CmdResult = Result<(), Failure>;

pub fn config_error(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = setup(&cli).and_then(|cfg| match cli.command {
        Command::Tokenize(a) => commands::tokenize::run(a, &cfg),
        Command::Augment(a) => commands::augment::run(a, &cfg),
        Command::Prompt(a) => commands::prompt::run(a, &cfg),
        Command::Manifest(a) => commands::manifest::run(a, &cfg),
        Command::SchedulePreview(a) => commands::schedule::run(a, &cfg),
        Command::Evaluate(a) => commands::evaluate::run(a, &cfg),
        Command::Synth(a) => commands::synth::run(a, &cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn setup(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p).map_err(config_error)?,
        None => FileConfig::default(),
    };
    let cfg = PipelineConfig::resolve(file, cli.seed, cli.jobs, cli.strict).map_err(config_error)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build_global()
        .map_err(|e| config_error(anyhow::anyhow!("thread pool: {e}")))?;
    Ok(cfg)
}
