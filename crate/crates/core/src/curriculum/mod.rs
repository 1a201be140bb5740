//! Five-stage curriculum: dataset registry, per-stage manifests and the
//! step schedule that feeds them to a trainer.

use std::path::Path;

mod manifest;
mod registry;
mod schedule;

pub use manifest::{build_manifest, mix_manifests, write_atomic, ManifestOptions, ManifestRecord, StageManifest};
pub use registry::{
    AlignedWindow, Alignment, DatasetEntry, InputKind, PairRecord, PieceMetadata, Registry, TargetKind,
};
pub use schedule::{schedule, Schedule};

/// Training steps per stage, stages 0 through 4.
pub const STAGE_BUDGETS: [u64; 5] = [20_000, 10_000, 15_000, 4_000, 10_000];
/// Steps for the pooled run without a curriculum.
pub const NO_CURRICULUM_BUDGET: u64 = 60_000;

pub fn stage_budget(stage: u8) -> Option<u64> {
    STAGE_BUDGETS.get(usize::from(stage)).copied()
}

#[derive(Debug, thiserror::Error)]
pub enum CurriculumError {
    #[error("invalid registry: {0}")]
    Registry(String),
    #[error("stage {0} is not in 0..=4")]
    BadStage(u8),
    #[error("registry has no dataset for stage {0}")]
    NoDatasets(u8),
    #[error("manifest for stage {0} has no records")]
    EmptyManifest(u8),
    #[error("manifests must be in increasing stage order, and a pooled manifest must run alone")]
    Unordered,
    #[error("dataset {dataset}: missing file {path}")]
    MissingFile { dataset: String, path: String },
    #[error("{path}: {reason}")]
    Sidecar { path: String, reason: String },
    #[error("{piece}: {reason}")]
    Piece { piece: String, reason: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Prompt(#[from] crate::prompt::PromptError),
    #[error(transparent)]
    Augment(#[from] crate::augment::AugmentError),
}

impl CurriculumError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, e: csv::Error) -> Self {
        Self::Sidecar {
            path: path.display().to_string(),
            reason: e.to_string(),
        }
    }
}
