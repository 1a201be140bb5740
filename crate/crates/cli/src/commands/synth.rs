use std::path::PathBuf;

use anyhow::Context;
use scorewave::audio::{write_wav, SAMPLE_RATE};
use scorewave::augment::stretch;
use scorewave::note::parse_midi_file;
use scorewave::synth::{render, render_clicks, SynthConfig};

use crate::config::PipelineConfig;
use crate::{config_error, CmdResult};

#[derive(clap::Args)]
pub struct Args {
    /// MIDI file to render.
    #[arg(required_unless_present = "clicks", conflicts_with = "clicks")]
    input: Option<PathBuf>,
    /// Render a click track at this tempo instead.
    #[arg(long, requires = "duration")]
    clicks: Option<f64>,
    /// Click track length in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Stretch timing by this duration ratio before rendering.
    #[arg(long, default_value_t = 1.0)]
    ratio: f64,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args, _cfg: &PipelineConfig) -> CmdResult {
    let audio = match (args.clicks, args.input) {
        (Some(bpm), _) => render_clicks(bpm, args.duration.unwrap_or_default(), SAMPLE_RATE).map_err(config_error)?,
        (None, Some(input)) => {
            let seq = parse_midi_file(&input).with_context(|| format!("reading {}", input.display()))?;
            let seq = if args.ratio == 1.0 { seq } else { stretch(&seq, args.ratio).map_err(config_error)? };
            render(&seq, &SynthConfig::default()).map_err(anyhow::Error::from)?
        }
        (None, None) => unreachable!("clap requires an input or --clicks"),
    };
    write_wav(&args.out, &audio, SAMPLE_RATE).map_err(anyhow::Error::from)?;
    println!("{}: {:.2} s", args.out.display(), audio.len() as f64 / f64::from(SAMPLE_RATE));
    Ok(())
}
