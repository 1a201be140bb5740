use scorewave::prompt::{ratio_to_keyword, render_prompt_with, PromptSpec, Sonification, DEFAULT_DROPOUT};
use scorewave::seed::derive_seed;

use crate::config::PipelineConfig;
use crate::{config_error, CmdResult};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=4))]
    stage: u8,
    /// Describe the target as a performance rather than a synthesis.
    #[arg(long)]
    performance: bool,
    /// Duration ratio used to pick a speed keyword.
    #[arg(long, conflicts_with = "keyword")]
    speed_ratio: Option<f64>,
    #[arg(long)]
    keyword: Option<String>,
    #[arg(long)]
    title: Option<String>,
    #[arg(long)]
    composer: Option<String>,
    #[arg(long)]
    instrumentation: Option<String>,
    #[arg(long)]
    mistake: bool,
    #[arg(long)]
    performer: Option<String>,
    #[arg(long)]
    expression: Option<String>,
    #[arg(long)]
    dropout: Option<f64>,
    /// Number of prompts to draw.
    #[arg(long, default_value_t = 1)]
    count: usize,
}

pub fn run(args: Args, cfg: &PipelineConfig) -> CmdResult {
    let sonification = if args.performance || args.stage >= 2 {
        Sonification::Performance
    } else {
        Sonification::Synthesis
    };
    let mut spec = PromptSpec::new(args.stage, sonification);
    spec.speed_keyword = match (args.speed_ratio, args.keyword) {
        (Some(r), _) => Some(ratio_to_keyword(r, derive_seed(cfg.seed, "prompt:keyword")).map_err(config_error)?.into()),
        (None, k) => k,
    };
    spec.title = args.title;
    spec.composer = args.composer;
    spec.instrumentation = args.instrumentation;
    spec.mistake = args.mistake.then_some(true);
    spec.performer = args.performer;
    spec.expression_label = args.expression;
    spec.validate().map_err(config_error)?;

    let dropout = args.dropout.or(cfg.file.dropout).unwrap_or(DEFAULT_DROPOUT);
    let templates = cfg.file.templates.clone().unwrap_or_default();
    for i in 0..args.count {
        let seed = derive_seed(cfg.seed, &format!("prompt:{i}"));
        println!("{}", render_prompt_with(&spec, dropout, seed, &templates).map_err(config_error)?);
    }
    Ok(())
}
