//! Data engineering and evaluation toolkit for text-and-score controlled
//! performance rendering.
//!
//! The crate covers everything around a score-conditioned audio model that
//! does not need the network itself: MIDI parsing and windowing, MIDI-like
//! tokenization, speed and mistake augmentation, prompt construction,
//! curriculum manifests, reference diffusion math, a test synthesizer and
//! the objective metrics (DTW chroma similarity, tempo deviation, Fréchet
//! distance over embeddings).

pub mod audio;
pub mod augment;
pub mod curriculum;
pub mod diffusion;
pub mod metrics;
pub mod note;
pub mod prompt;
pub mod seed;
pub mod synth;
pub mod tokenizer;

pub use note::{parse_midi, segment, write_midi, Note, NoteSequence, Window};
