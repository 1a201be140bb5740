use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;

use crate::config::PipelineConfig;

#[derive(Serialize)]
struct RunRecord<'a> {
    command: &'a str,
    args: Vec<String>,
    version: &'static str,
    seed: u64,
    config: &'a PipelineConfig,
    unix_time: u64,
}

/// Writes `run.json` describing how the outputs in `dir` were produced.
pub fn write_run_record(dir: &Path, command: &str, cfg: &PipelineConfig) -> anyhow::Result<()> {
    let record = RunRecord {
        command,
        args: std::env::args().collect(),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: cfg,
        unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    let bytes = serde_json::to_vec_pretty(&record)?;
    write_atomic(&dir.join("run.json"), &bytes)
}

/// Writes through a temporary sibling and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    scorewave::curriculum::write_atomic(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// CSV rows serialized to memory, then written atomically.
pub fn write_csv_atomic<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    write_atomic(path, &bytes)
}

pub fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned())
}
