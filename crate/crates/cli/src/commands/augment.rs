use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use rayon::prelude::*;
use scorewave::augment::{corrupt, sample_speed_augmentation, MistakeReport, SpeedTier};
use scorewave::note::parse_midi_file;
use scorewave::seed::derive_seed;
use scorewave::write_midi;
use serde::Serialize;

use super::{create_dir, finish, unique_stems};
use crate::config::PipelineConfig;
use crate::output::{write_atomic, write_run_record};
use crate::{config_error, CmdResult};

const OUTPUT_PPQ: u16 = 480;

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Speed,
    Mistakes,
}

#[derive(clap::Args)]
pub struct Args {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    out: PathBuf,
    /// Speed tier(s) to sample; every tier when omitted.
    #[arg(long)]
    tier: Vec<SpeedTier>,
}

#[derive(Serialize)]
struct ReportLine {
    source: String,
    output: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    tier: Option<SpeedTier>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    keyword: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mistakes: Option<MistakeReport>,
}

pub fn run(args: Args, cfg: &PipelineConfig) -> CmdResult {
    let mistakes = cfg.file.mistakes.clone().unwrap_or_default();
    mistakes.validate().map_err(config_error)?;
    let tiers = if args.tier.is_empty() { SpeedTier::ALL.to_vec() } else { args.tier.clone() };
    create_dir(&args.out)?;
    let stems = unique_stems(&args.inputs);

    let results: Vec<anyhow::Result<Vec<ReportLine>>> = args
        .inputs
        .par_iter()
        .zip(&stems)
        .map(|(input, stem)| {
            let seq = parse_midi_file(input)?;
            let source = input.display().to_string();
            let mut lines = Vec::new();
            match args.mode {
                Mode::Speed => {
                    for &tier in &tiers {
                        let item_seed = derive_seed(cfg.seed, &format!("{source}:{tier}"));
                        let aug = sample_speed_augmentation(&seq, tier, item_seed);
                        let name = format!("{stem}.{tier}.mid");
                        write_seq(&args.out.join(&name), &aug.sequence)?;
                        lines.push(ReportLine {
                            source: source.clone(),
                            output: name,
                            tier: Some(tier),
                            ratio: Some(aug.ratio),
                            keyword: Some(aug.keyword),
                            mistakes: None,
                        });
                    }
                }
                Mode::Mistakes => {
                    let mut item_cfg = mistakes.clone();
                    item_cfg.seed = derive_seed(cfg.seed, &format!("{source}:mistakes"));
                    let (corrupted, report) = corrupt(&seq, &item_cfg)?;
                    let name = format!("{stem}.mistakes.mid");
                    write_seq(&args.out.join(&name), &corrupted)?;
                    lines.push(ReportLine {
                        source,
                        output: name,
                        tier: None,
                        ratio: None,
                        keyword: None,
                        mistakes: Some(report),
                    });
                }
            }
            Ok(lines)
        })
        .collect();

    let mut report = String::new();
    let mut failures = 0;
    for (input, result) in args.inputs.iter().zip(results) {
        match result {
            Ok(lines) => {
                for l in lines {
                    report.push_str(&serde_json::to_string(&l).map_err(anyhow::Error::from)?);
                    report.push('\n');
                }
            }
            Err(e) => {
                failures += 1;
                log::error!("{}: {e:#}", input.display());
            }
        }
    }
    write_atomic(&args.out.join("report.jsonl"), report.as_bytes())?;
    write_run_record(&args.out, "augment", cfg)?;
    finish(failures, args.inputs.len(), cfg.strict)
}

fn write_seq(path: &Path, seq: &scorewave::NoteSequence) -> anyhow::Result<()> {
    let bytes = write_midi(seq, OUTPUT_PPQ).with_context(|| format!("encoding {}", path.display()))?;
    write_atomic(path, &bytes)
}
