use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use scorewave::note::{parse_midi_file, DEFAULT_WINDOW_SECONDS};
use scorewave::tokenizer::{encode, Vocabulary};
use scorewave::segment;
use serde::Serialize;

use super::{create_dir, finish, unique_stems};
use crate::config::PipelineConfig;
use crate::output::{write_atomic, write_csv_atomic, write_run_record};
use crate::{config_error, CmdResult};

#[derive(clap::Args)]
pub struct Args {
    /// MIDI files to tokenize.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Window length in seconds.
    #[arg(long)]
    window: Option<f64>,
    /// Hop between window starts in seconds (defaults to the window length).
    #[arg(long)]
    hop: Option<f64>,
    /// Also write a human-readable `.txt` next to each token file.
    #[arg(long)]
    text: bool,
}

#[derive(Debug, Serialize)]
struct IndexRow {
    source: String,
    window: usize,
    offset: f64,
    token_file: String,
    tokens: usize,
}

pub fn run(args: Args, cfg: &PipelineConfig) -> CmdResult {
    let window = args.window.or(cfg.file.window).unwrap_or(DEFAULT_WINDOW_SECONDS);
    let hop = args.hop.or(cfg.file.hop).unwrap_or(window);
    if !(window.is_finite() && window > 0.0 && hop.is_finite() && hop > 0.0) {
        return Err(config_error(anyhow::anyhow!("window ({window}) and hop ({hop}) must be positive")));
    }
    create_dir(&args.out)?;
    let vocab = Vocabulary::standard();
    let stems = unique_stems(&args.inputs);

    let results: Vec<anyhow::Result<Vec<IndexRow>>> = args
        .inputs
        .par_iter()
        .zip(&stems)
        .map(|(input, stem)| tokenize_file(input, stem, &args.out, window, hop, args.text, &vocab))
        .collect();

    let mut rows = Vec::new();
    let mut failures = 0;
    for (input, result) in args.inputs.iter().zip(results) {
        match result {
            Ok(file_rows) => {
                let tokens: usize = file_rows.iter().map(|r| r.tokens).sum();
                println!("{}: {} windows, {} tokens", input.display(), file_rows.len(), tokens);
                rows.extend(file_rows);
            }
            Err(e) => {
                failures += 1;
                log::error!("{}: {e:#}", input.display());
            }
        }
    }
    write_csv_atomic(&args.out.join("index.csv"), &rows)?;
    write_run_record(&args.out, "tokenize", cfg)?;
    finish(failures, args.inputs.len(), cfg.strict)
}

fn tokenize_file(
    input: &Path,
    stem: &str,
    out: &Path,
    window: f64,
    hop: f64,
    text: bool,
    vocab: &Vocabulary,
) -> anyhow::Result<Vec<IndexRow>> {
    let seq = parse_midi_file(input)?;
    let mut rows = Vec::new();
    for (k, win) in segment(&seq, window, hop).iter().enumerate() {
        let stream = encode(win, vocab).with_context(|| format!("window {k}"))?;
        let name = format!("{stem}.w{k:04}.mtok");
        write_atomic(&out.join(&name), &stream.to_bytes(vocab))?;
        if text {
            write_atomic(&out.join(format!("{stem}.w{k:04}.txt")), stream.to_text(vocab).as_bytes())?;
        }
        rows.push(IndexRow {
            source: input.display().to_string(),
            window: k,
            offset: win.offset,
            token_file: name,
            tokens: stream.len(),
        });
    }
    Ok(rows)
}
