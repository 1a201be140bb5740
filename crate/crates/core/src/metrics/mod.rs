//! Objective evaluation: DTW-aligned chroma similarity, tempo deviation and
//! Fréchet distance over externally computed embeddings.

use std::path::Path;

use serde::{Deserialize, Serialize};

mod chroma;
mod dtw;
mod frechet;
mod stft;
mod tempo;

pub use chroma::{
    chroma_similarity, chroma_similarity_banded, chromagram, frame_cosine, ChromaMatrix, ChromaSimilarityResult,
    CHROMA_HOP, CHROMA_WINDOW, DEFAULT_LAMBDA, PITCH_CLASSES,
};
pub use dtw::{dtw, dtw_align, dtw_align_banded, Alignment};
pub use frechet::{frechet_distance, EmbeddingSet, EMBEDDING_MAGIC};
pub use tempo::{
    deviation_from_estimate, onset_envelope, tempo_deviation, tempo_estimate, MAX_BPM, MIN_BPM, MIN_SECONDS,
    PREFERRED_BPM,
};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("audio buffer is empty")]
    EmptyAudio,
    #[error("similarity is undefined for all-silent audio")]
    Silent,
    #[error("tempo estimation needs at least 5 s of audio, got {0:.2} s")]
    TooShort(f64),
    #[error("no detectable periodicity in the onset envelope")]
    NoPeriodicity,
    #[error("prompt ratio {0} outside [0.4, 2.2]")]
    BadRatio(f64),
    #[error("score has no tempo map to derive a reference tempo from")]
    MissingScoreTempo,
    #[error("embedding dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("need at least 2 embeddings to fit a covariance, got {0}")]
    TooFewEmbeddings(usize),
    #[error("matrix square root hit eigenvalue {0:e}")]
    Numerical(f64),
    #[error("malformed embedding file: {0}")]
    BadEmbeddingFile(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl MetricsError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// One row of a batch evaluation CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub pair_id: String,
    pub metric: String,
    pub value: f64,
}

pub fn write_metric_csv(w: impl std::io::Write, rows: &[MetricRow]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
