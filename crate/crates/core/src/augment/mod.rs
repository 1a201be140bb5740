//! Speed and mistake augmentation of note sequences.

mod mistakes;
mod speed;

pub use mistakes::{corrupt, MistakeConfig, MistakeReport, RemovedBlock};
pub use speed::{sample_speed_augmentation, stretch, SpeedAugmentation, SpeedTier, MAX_RATIO, MIN_RATIO};

use crate::note::NoteError;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AugmentError {
    #[error("stretch ratio must be positive and finite, got {0}")]
    BadRatio(f64),
    #[error("invalid mistake configuration: {0}")]
    BadConfig(String),
    #[error("unknown speed tier {0:?}")]
    UnknownTier(String),
    #[error(transparent)]
    Note(#[from] NoteError),
}
