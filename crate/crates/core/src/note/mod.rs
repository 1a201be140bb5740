//! Note-level representation shared by every stage of the pipeline.
//!
//! A [`NoteSequence`] is the universal intermediate: MIDI files parse into
//! it, augmentations transform it, windows are cut from it and the
//! synthesizer renders it.

mod segment;
mod smf;
mod tempo;

pub use segment::{reassemble, segment, Window, DEFAULT_WINDOW_SECONDS};
pub use smf::{parse_midi, parse_midi_file, write_midi, MidiError};
pub use tempo::{TempoMap, TempoMark, Timebase};

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// MIDI channel index (0-based) reserved for percussion.
pub const DRUM_CHANNEL: u8 = 9;

/// One timed, pitched note event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Note {
    pub pitch: u8,
    pub velocity: u8,
    /// Onset in seconds.
    pub start: f64,
    /// Offset in seconds, never before `start`.
    pub end: f64,
    pub program: u8,
    pub is_drum: bool,
}

impl Note {
    pub fn new(pitch: u8, velocity: u8, start: f64, end: f64, program: u8) -> Self {
        Self {
            pitch,
            velocity,
            start,
            end,
            program,
            is_drum: false,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn validate(&self) -> Result<(), NoteError> {
        if self.pitch > 127 || self.velocity > 127 || self.program > 127 {
            return Err(NoteError::OutOfRange(*self));
        }
        if !self.start.is_finite() || !self.end.is_finite() || self.end < self.start {
            return Err(NoteError::BadTiming(*self));
        }
        Ok(())
    }

    /// Canonical order: onset, then pitch; remaining fields only break exact ties.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.start
            .total_cmp(&other.start)
            .then(self.pitch.cmp(&other.pitch))
            .then(self.program.cmp(&other.program))
            .then(self.is_drum.cmp(&other.is_drum))
            .then(self.end.total_cmp(&other.end))
            .then(self.velocity.cmp(&other.velocity))
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NoteError {
    #[error("note field out of MIDI range: {0:?}")]
    OutOfRange(Note),
    #[error("note has invalid timing (end before start or non-finite): {0:?}")]
    BadTiming(Note),
    #[error("note starts before time zero: {0:?}")]
    NegativeStart(Note),
    #[error("invalid total duration {0}")]
    BadDuration(f64),
}

/// Ordered notes plus the piece duration and tempo marks of the source file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteSequence {
    notes: Vec<Note>,
    total_duration: f64,
    source_id: String,
    tempo: Vec<TempoMark>,
}

impl NoteSequence {
    /// Sorts the notes canonically and raises `total_duration` to cover the last offset.
    pub fn new(
        mut notes: Vec<Note>,
        total_duration: f64,
        source_id: impl Into<String>,
    ) -> Result<Self, NoteError> {
        if !total_duration.is_finite() || total_duration < 0.0 {
            return Err(NoteError::BadDuration(total_duration));
        }
        for n in &notes {
            n.validate()?;
            if n.start < 0.0 {
                return Err(NoteError::NegativeStart(*n));
            }
        }
        notes.sort_by(Note::canonical_cmp);
        let last_end = notes.iter().map(|n| n.end).fold(0.0, f64::max);
        Ok(Self {
            notes,
            total_duration: total_duration.max(last_end),
            source_id: source_id.into(),
            tempo: Vec::new(),
        })
    }

    pub fn empty(source_id: impl Into<String>) -> Self {
        Self {
            notes: Vec::new(),
            total_duration: 0.0,
            source_id: source_id.into(),
            tempo: Vec::new(),
        }
    }

    /// Attaches tempo marks (seconds, BPM) taken from the source file's tempo map.
    pub fn with_tempo(mut self, mut tempo: Vec<TempoMark>) -> Self {
        tempo.sort_by(|a, b| a.time.total_cmp(&b.time));
        self.tempo = tempo;
        self
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    pub fn notes(&self) -> &[Note] {
        &self.notes
    }

    pub fn total_duration(&self) -> f64 {
        self.total_duration
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn tempo_marks(&self) -> &[TempoMark] {
        &self.tempo
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    /// Duration-weighted mean tempo over the piece.
    ///
    /// `None` when the source carried no tempo marks; callers decide whether
    /// to fall back to the SMF default of 120 BPM.
    pub fn reference_bpm(&self) -> Option<f64> {
        let first = self.tempo.first()?;
        let horizon = self.total_duration;
        if self.tempo.len() == 1 || horizon <= first.time {
            return Some(first.bpm);
        }
        let mut weighted = 0.0;
        let mut span = 0.0;
        for (i, mark) in self.tempo.iter().enumerate() {
            let from = if i == 0 { 0.0 } else { mark.time };
            let to = self.tempo.get(i + 1).map_or(horizon, |m| m.time).min(horizon);
            if to > from {
                weighted += mark.bpm * (to - from);
                span += to - from;
            }
        }
        if span > 0.0 {
            Some(weighted / span)
        } else {
            Some(self.tempo.last()?.bpm)
        }
    }

    pub fn into_parts(self) -> (Vec<Note>, f64, String, Vec<TempoMark>) {
        (self.notes, self.total_duration, self.source_id, self.tempo)
    }
}
