use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use rayon::prelude::*;
use scorewave::audio::read_wav;
use scorewave::metrics::{
    chroma_similarity, deviation_from_estimate, frechet_distance, tempo_estimate, EmbeddingSet, MetricRow,
    MetricsError, DEFAULT_LAMBDA,
};
use scorewave::note::parse_midi_file;
use serde::Deserialize;

use crate::config::PipelineConfig;
use crate::output::{write_csv_atomic, write_run_record};
use crate::{config_error, CmdResult};

/// Pair id used for set-level metrics.
const SET_ID: &str = "*";

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Chroma,
    Tempo,
}

#[derive(clap::Args)]
pub struct Args {
    /// CSV with columns pair_id, output, reference and optionally score,
    /// prompt_ratio and estimated_bpm. Relative paths resolve against the
    /// CSV's directory.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Result CSV (pair_id, metric, value).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Metric::Chroma, Metric::Tempo])]
    metrics: Vec<Metric>,
    /// Weight of the DTW path-length penalty in the chroma score.
    #[arg(long)]
    lambda: Option<f64>,
    /// Embedding file for generated audio.
    #[arg(long, requires = "fad_reference")]
    fad_output: Option<PathBuf>,
    /// Embedding file for reference audio.
    #[arg(long, requires = "fad_output")]
    fad_reference: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct PairRow {
    pair_id: String,
    output: PathBuf,
    reference: PathBuf,
    #[serde(default)]
    score: Option<PathBuf>,
    #[serde(default)]
    prompt_ratio: Option<f64>,
    /// BPM from an external estimator; replaces the built-in estimate.
    #[serde(default)]
    estimated_bpm: Option<f64>,
}

pub fn run(args: Args, cfg: &PipelineConfig) -> CmdResult {
    let lambda = args.lambda.or(cfg.file.lambda).unwrap_or(DEFAULT_LAMBDA);
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(config_error(anyhow::anyhow!("lambda must be non-negative, got {lambda}")));
    }
    if args.pairs.is_none() && args.fad_output.is_none() {
        return Err(config_error(anyhow::anyhow!("nothing to evaluate: give --pairs and/or --fad-output/--fad-reference")));
    }

    let mut rows = Vec::new();
    let mut failures = 0;
    let mut total = 0;
    if let Some(pairs_path) = &args.pairs {
        let pairs = read_pairs(pairs_path).map_err(config_error)?;
        total += pairs.len();
        let results: Vec<anyhow::Result<Vec<MetricRow>>> =
            pairs.par_iter().map(|p| evaluate_pair(p, &args.metrics, lambda)).collect();
        for (pair, result) in pairs.iter().zip(results) {
            match result {
                Ok(r) => rows.extend(r),
                Err(e) => {
                    failures += 1;
                    log::error!("pair {}: {e:#}", pair.pair_id);
                }
            }
        }
    }
    if let (Some(a), Some(b)) = (&args.fad_output, &args.fad_reference) {
        total += 1;
        match fad(a, b) {
            Ok(value) => rows.push(MetricRow {
                pair_id: SET_ID.into(),
                metric: "fad".into(),
                value,
            }),
            Err(e) => {
                failures += 1;
                log::error!("fad: {e:#}");
            }
        }
    }
    for r in &rows {
        println!("{}\t{}\t{:.6}", r.pair_id, r.metric, r.value);
    }
    write_csv_atomic(&args.out, &rows)?;
    let dir = args.out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    write_run_record(dir, "evaluate", cfg)?;
    super::finish(failures, total, cfg.strict)
}

fn read_pairs(path: &Path) -> anyhow::Result<Vec<PairRow>> {
    let base = path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut pairs = Vec::new();
    for row in reader.deserialize() {
        let mut p: PairRow = row.with_context(|| format!("parsing {}", path.display()))?;
        p.output = base.join(&p.output);
        p.reference = base.join(&p.reference);
        p.score = p.score.map(|s| base.join(s));
        pairs.push(p);
    }
    Ok(pairs)
}

fn evaluate_pair(p: &PairRow, metrics: &[Metric], lambda: f64) -> anyhow::Result<Vec<MetricRow>> {
    let row = |metric: &str, value: f64| MetricRow {
        pair_id: p.pair_id.clone(),
        metric: metric.into(),
        value,
    };
    let mut rows = Vec::new();
    let needs_output = metrics.contains(&Metric::Chroma) || p.estimated_bpm.is_none();
    let out_audio = if needs_output {
        read_wav(&p.output).with_context(|| format!("reading {}", p.output.display()))?
    } else {
        Vec::new()
    };
    if metrics.contains(&Metric::Chroma) {
        let ref_audio = read_wav(&p.reference).with_context(|| format!("reading {}", p.reference.display()))?;
        let c = chroma_similarity(&out_audio, &ref_audio, lambda)?;
        rows.push(row("chroma_score", c.score));
        rows.push(row("chroma_mean_cosine", c.mean_cosine));
        rows.push(row("dtw_cost", c.dtw_cost));
    }
    if metrics.contains(&Metric::Tempo) {
        let Some(score_path) = &p.score else {
            log::warn!("pair {}: no score given, skipping tempo", p.pair_id);
            return Ok(rows);
        };
        let score = parse_midi_file(score_path).with_context(|| format!("reading {}", score_path.display()))?;
        let reference = score.reference_bpm().ok_or(MetricsError::MissingScoreTempo)?;
        let estimated = match p.estimated_bpm {
            Some(bpm) => bpm,
            None => tempo_estimate(&out_audio)?,
        };
        rows.push(row("tempo_bpm", estimated));
        let ratio = p.prompt_ratio.unwrap_or(1.0);
        rows.push(row("tempo_deviation", deviation_from_estimate(estimated, reference, ratio)?));
    }
    Ok(rows)
}

fn fad(output: &Path, reference: &Path) -> Result<f64, MetricsError> {
    frechet_distance(&EmbeddingSet::read(output)?, &EmbeddingSet::read(reference)?)
}
