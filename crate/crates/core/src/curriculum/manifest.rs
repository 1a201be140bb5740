use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::registry::{read_json, Alignment, DatasetEntry, PairRecord, PieceMetadata, Registry};
use super::{stage_budget, CurriculumError, NO_CURRICULUM_BUDGET};
use crate::augment::{corrupt, sample_speed_augmentation, MistakeConfig, SpeedTier};
use crate::note::{parse_midi_file, segment, write_midi, NoteSequence, Window, DEFAULT_WINDOW_SECONDS};
use crate::prompt::{ratio_to_keyword, render_prompt_with, PromptSpec, PromptTemplates, Sonification, DEFAULT_DROPOUT};
use crate::seed;
use crate::tokenizer::{encode, Vocabulary};

/// One training example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    /// `<dataset>/<midi path>#<window index>`.
    pub window_ref: String,
    pub token_file: String,
    pub prompt: String,
    pub target_audio_ref: String,
    /// Target audio interval in seconds.
    pub perf_start: f64,
    pub perf_end: f64,
    pub stage: u8,
    pub seed: u64,
    /// Duration ratio applied to the score (stage 1) or measured from the
    /// alignment (performance stages).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_ratio: Option<f64>,
    /// Mistake-corrupted MIDI the target should be rendered from (stage 3).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_midi: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageManifest {
    /// `None` for the merged no-curriculum manifest.
    pub stage: Option<u8>,
    pub step_budget: u64,
    pub records: Vec<ManifestRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestMeta {
    stage: Option<u8>,
    step_budget: u64,
    records: usize,
}

impl StageManifest {
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<(), CurriculumError> {
        for r in &self.records {
            let line = serde_json::to_string(r).expect("records serialize");
            writeln!(w, "{line}").map_err(|e| CurriculumError::io(Path::new("<manifest>"), e))?;
        }
        Ok(())
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Vec<ManifestRecord>, CurriculumError> {
        let mut records = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| CurriculumError::io(Path::new("<manifest>"), e))?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line).map_err(|e| CurriculumError::Sidecar {
                path: format!("<manifest> line {}", i + 1),
                reason: e.to_string(),
            })?);
        }
        Ok(records)
    }

    /// Path of the small JSON file holding stage and budget next to `path`.
    pub fn meta_path(path: &Path) -> PathBuf {
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(".meta.json");
        path.with_file_name(name)
    }

    /// Writes the JSON-lines manifest and its meta file, each via a temporary
    /// file and rename so readers never see a partial index.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CurriculumError> {
        let path = path.as_ref();
        let mut body = Vec::new();
        self.write_jsonl(&mut body)?;
        write_atomic(path, &body)?;
        let meta = ManifestMeta {
            stage: self.stage,
            step_budget: self.step_budget,
            records: self.records.len(),
        };
        let meta = serde_json::to_vec_pretty(&meta).expect("meta serializes");
        write_atomic(&Self::meta_path(path), &meta)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CurriculumError> {
        let path = path.as_ref();
        let meta: ManifestMeta = read_json(&Self::meta_path(path))?;
        let file = std::fs::File::open(path).map_err(|e| CurriculumError::io(path, e))?;
        let records = Self::read_jsonl(std::io::BufReader::new(file))?;
        if records.len() != meta.records {
            return Err(CurriculumError::Sidecar {
                path: path.display().to_string(),
                reason: format!("meta declares {} records, found {}", meta.records, records.len()),
            });
        }
        Ok(Self {
            stage: meta.stage,
            step_budget: meta.step_budget,
            records,
        })
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CurriculumError> {
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| CurriculumError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CurriculumError::io(path, e))
}

#[derive(Debug, Clone)]
pub struct ManifestOptions {
    /// Token streams (and stage-3 corrupted MIDI) are written below this directory.
    pub token_dir: PathBuf,
    pub window_seconds: f64,
    pub dropout: f64,
    pub templates: PromptTemplates,
    /// Mistake settings for stage 3; the seed is replaced per piece.
    pub mistakes: MistakeConfig,
}

impl ManifestOptions {
    pub fn new(token_dir: impl Into<PathBuf>) -> Self {
        Self {
            token_dir: token_dir.into(),
            window_seconds: DEFAULT_WINDOW_SECONDS,
            dropout: DEFAULT_DROPOUT,
            templates: PromptTemplates::default(),
            mistakes: MistakeConfig::default(),
        }
    }
}

fn sanitize(rel: &str) -> String {
    rel.chars()
        .map(|c| if c == '/' || c == '\\' || c == ':' { '_' } else { c })
        .collect()
}

struct PieceContext<'a> {
    entry: &'a DatasetEntry,
    pair: &'a PairRecord,
    stage: u8,
    base_seed: u64,
    opts: &'a ManifestOptions,
    meta: PieceMetadata,
}

impl PieceContext<'_> {
    fn key(&self) -> String {
        format!("{}/{}", self.entry.name, self.pair.rel_midi)
    }

    fn spec(&self, sonification: Sonification) -> PromptSpec {
        let mut spec = PromptSpec::new(self.stage, sonification);
        if self.stage == 0 {
            return spec;
        }
        spec.title = self.meta.title.clone();
        spec.composer = self.meta.composer.clone();
        spec.instrumentation = self.meta.instrumentation.clone().or_else(|| Some(self.entry.instrumentation.clone()));
        if self.stage == 3 {
            spec.mistake = Some(true);
        }
        if self.stage == 4 {
            spec.performer = self.meta.performer.clone();
            spec.expression_label = self.meta.expression_label.clone();
        }
        spec
    }

    fn render(&self, spec: &PromptSpec, record_seed: u64) -> Result<String, CurriculumError> {
        Ok(render_prompt_with(spec, self.opts.dropout, record_seed, &self.opts.templates)?)
    }

    fn write_tokens(&self, k: usize, win: &Window, vocab: &Vocabulary) -> Result<String, CurriculumError> {
        let dir = self.opts.token_dir.join(&self.entry.name);
        std::fs::create_dir_all(&dir).map_err(|e| CurriculumError::io(&dir, e))?;
        let path = dir.join(format!("{}.w{k:04}.mtok", sanitize(&self.pair.rel_midi)));
        let stream = encode(win, vocab).map_err(|e| CurriculumError::Piece {
            piece: self.key(),
            reason: e.to_string(),
        })?;
        std::fs::write(&path, stream.to_bytes(vocab)).map_err(|e| CurriculumError::io(&path, e))?;
        Ok(path.display().to_string())
    }
}

fn piece_records(
    entry: &DatasetEntry,
    pair: &PairRecord,
    stage: u8,
    base_seed: u64,
    opts: &ManifestOptions,
) -> Result<Vec<ManifestRecord>, CurriculumError> {
    let vocab = Vocabulary::standard();
    let meta = match &pair.metadata {
        Some(p) => read_json(p)?,
        None => PieceMetadata::default(),
    };
    let ctx = PieceContext {
        entry,
        pair,
        stage,
        base_seed,
        opts,
        meta,
    };
    let alignment: Option<Alignment> = if stage >= 2 {
        match &pair.alignment {
            Some(p) => Some(read_json(p)?),
            None => {
                log::warn!("{}: no alignment for performance stage {stage}, skipping", ctx.key());
                return Ok(Vec::new());
            }
        }
    } else {
        None
    };

    let seq = parse_midi_file(&pair.midi).map_err(|e| CurriculumError::Piece {
        piece: ctx.key(),
        reason: e.to_string(),
    })?;
    let len = opts.window_seconds;
    let windows = segment(&seq, len, len);
    let audio = pair.audio.display().to_string();
    let target_midi = if stage == 3 { Some(write_corrupted(&ctx, &seq)?) } else { None };

    let mut out = Vec::new();
    for (k, win) in windows.iter().enumerate() {
        let window_ref = format!("{}#{k}", ctx.key());
        let token_file = ctx.write_tokens(k, win, &vocab)?;
        match stage {
            0 => {
                let record_seed = seed::derive_seed(ctx.base_seed, &format!("0:{window_ref}"));
                out.push(ManifestRecord {
                    prompt: ctx.render(&ctx.spec(Sonification::Synthesis), record_seed)?,
                    window_ref,
                    token_file,
                    target_audio_ref: audio.clone(),
                    perf_start: win.offset,
                    perf_end: win.offset + win.length,
                    stage,
                    seed: record_seed,
                    speed_ratio: None,
                    target_midi: None,
                });
            }
            1 => {
                for tier in SpeedTier::ALL {
                    let aug = speed_for(&ctx, &seq, tier);
                    let record_seed = seed::derive_seed(ctx.base_seed, &format!("1:{}:{window_ref}", tier.name()));
                    let mut spec = ctx.spec(Sonification::Synthesis);
                    spec.speed_keyword = Some(aug.1.to_string());
                    out.push(ManifestRecord {
                        prompt: ctx.render(&spec, record_seed)?,
                        window_ref: window_ref.clone(),
                        token_file: token_file.clone(),
                        target_audio_ref: audio.clone(),
                        perf_start: win.offset * aug.0,
                        perf_end: (win.offset + win.length) * aug.0,
                        stage,
                        seed: record_seed,
                        speed_ratio: Some(aug.0),
                        target_midi: None,
                    });
                }
            }
            _ => {
                let Some(aligned) = alignment.as_ref().and_then(|a| a.lookup(win.offset)) else {
                    log::warn!("{window_ref}: window has no aligned interval, skipping");
                    continue;
                };
                let ratio = (aligned.perf_end - aligned.perf_start) / win.length;
                let record_seed = seed::derive_seed(ctx.base_seed, &format!("{stage}:{window_ref}"));
                let mut spec = ctx.spec(Sonification::Performance);
                spec.speed_keyword = Some(ratio_to_keyword(ratio, record_seed)?.to_string());
                out.push(ManifestRecord {
                    prompt: ctx.render(&spec, record_seed)?,
                    window_ref,
                    token_file,
                    target_audio_ref: audio.clone(),
                    perf_start: aligned.perf_start,
                    perf_end: aligned.perf_end,
                    stage,
                    seed: record_seed,
                    speed_ratio: Some(ratio),
                    target_midi: target_midi.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// One ratio and keyword per piece and tier.
fn speed_for(ctx: &PieceContext, seq: &NoteSequence, tier: SpeedTier) -> (f64, &'static str) {
    let s = seed::derive_seed(ctx.base_seed, &format!("speed:{}:{}", tier.name(), ctx.key()));
    let aug = sample_speed_augmentation(seq, tier, s);
    (aug.ratio, aug.keyword)
}

fn write_corrupted(ctx: &PieceContext, seq: &NoteSequence) -> Result<String, CurriculumError> {
    let cfg = MistakeConfig {
        seed: seed::derive_seed(ctx.base_seed, &format!("mistakes:{}", ctx.key())),
        ..ctx.opts.mistakes.clone()
    };
    let (corrupted, report) = corrupt(seq, &cfg)?;
    let piece_err = |reason: String| CurriculumError::Piece {
        piece: ctx.key(),
        reason,
    };
    let bytes = write_midi(&corrupted, 480).map_err(|e| piece_err(e.to_string()))?;
    let dir = ctx.opts.token_dir.join(&ctx.entry.name);
    std::fs::create_dir_all(&dir).map_err(|e| CurriculumError::io(&dir, e))?;
    let path = dir.join(format!("{}.mistakes.mid", sanitize(&ctx.pair.rel_midi)));
    std::fs::write(&path, bytes).map_err(|e| CurriculumError::io(&path, e))?;
    let report_path = path.with_extension("json");
    std::fs::write(&report_path, report.to_record()).map_err(|e| CurriculumError::io(&report_path, e))?;
    Ok(path.display().to_string())
}

/// Repeats or subsamples a dataset's records to `round(n * weight)` entries.
fn apply_weight(mut records: Vec<ManifestRecord>, weight: f64, seed_value: u64) -> Vec<ManifestRecord> {
    if weight == 1.0 || records.is_empty() {
        return records;
    }
    let n = records.len();
    let target = (n as f64 * weight).round() as usize;
    let mut rng = seed::rng(seed_value);
    records.shuffle(&mut rng);
    records.iter().cycle().take(target).cloned().collect()
}

/// Builds the manifest for one curriculum stage.
///
/// Pairs are processed in parallel; the result depends only on the registry
/// contents and `seed`. Performance-stage pairs without an alignment sidecar
/// are skipped with a warning.
pub fn build_manifest(
    registry: &Registry,
    stage: u8,
    seed_value: u64,
    opts: &ManifestOptions,
) -> Result<StageManifest, CurriculumError> {
    let budget = stage_budget(stage).ok_or(CurriculumError::BadStage(stage))?;
    let entries: Vec<&DatasetEntry> = registry.for_stage(stage).collect();
    if entries.is_empty() {
        return Err(CurriculumError::NoDatasets(stage));
    }
    let mut records = Vec::new();
    for entry in entries {
        let pairs = entry.pairs()?;
        let per_pair: Vec<Vec<ManifestRecord>> = pairs
            .par_iter()
            .map(|pair| piece_records(entry, pair, stage, seed_value, opts))
            .collect::<Result<_, _>>()?;
        let flat: Vec<ManifestRecord> = per_pair.into_iter().flatten().collect();
        let weight_seed = seed::derive_seed(seed_value, &format!("weight:{}", entry.name));
        records.extend(apply_weight(flat, entry.weight, weight_seed));
    }
    if records.is_empty() {
        return Err(CurriculumError::EmptyManifest(stage));
    }
    records.shuffle(&mut seed::rng(seed::derive_seed(seed_value, &format!("shuffle:{stage}"))));
    Ok(StageManifest {
        stage: Some(stage),
        step_budget: budget,
        records,
    })
}

/// Pools every stage into one manifest for training without a curriculum.
pub fn mix_manifests(manifests: &[StageManifest], seed_value: u64) -> StageManifest {
    let mut records: Vec<ManifestRecord> = manifests.iter().flat_map(|m| m.records.iter().cloned()).collect();
    records.shuffle(&mut seed::rng(seed::derive_seed(seed_value, "shuffle:mixed")));
    StageManifest {
        stage: None,
        step_budget: NO_CURRICULUM_BUDGET,
        records,
    }
}
