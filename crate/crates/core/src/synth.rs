//! Harmonic additive renderer used as a spectrally predictable test oracle.

use rand::Rng;

use crate::note::{Note, NoteSequence};
use crate::seed;

/// Shortest note that is rendered; shorter notes are lengthened to this.
pub const MIN_NOTE_SECONDS: f64 = 0.001;
/// Peak level after normalization when the mix would clip.
pub const NORMALIZED_PEAK: f32 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub sample_rate: u32,
    /// Harmonics per note; harmonic `k` has amplitude `1/k`.
    pub partials: u32,
    pub attack: f64,
    pub release: f64,
    pub gain: f32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            sample_rate: crate::audio::SAMPLE_RATE,
            partials: 4,
            attack: 0.01,
            release: 0.05,
            gain: 0.3,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SynthError {
    #[error("tempo {0} BPM outside [30, 300]")]
    BpmOutOfRange(f64),
    #[error("invalid synth configuration: {0}")]
    BadConfig(&'static str),
}

impl SynthConfig {
    fn validate(&self) -> Result<(), SynthError> {
        if self.sample_rate == 0 {
            return Err(SynthError::BadConfig("sample rate must be positive"));
        }
        if self.partials == 0 {
            return Err(SynthError::BadConfig("at least one partial is required"));
        }
        if !(self.attack >= 0.0 && self.release >= 0.0) {
            return Err(SynthError::BadConfig("attack and release must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.gain) {
            return Err(SynthError::BadConfig("gain must lie in [0, 1]"));
        }
        Ok(())
    }
}

pub fn midi_to_hz(pitch: f64) -> f64 {
    440.0 * 2f64.powf((pitch - 69.0) / 12.0)
}

/// Sample count covering the piece plus the final release tail.
pub fn render_length(seq: &NoteSequence, cfg: &SynthConfig) -> usize {
    let last = seq
        .notes()
        .iter()
        .map(|n| n.start + n.duration().max(MIN_NOTE_SECONDS) + cfg.release)
        .fold(seq.total_duration(), f64::max);
    (last * f64::from(cfg.sample_rate)).round() as usize
}

/// Adds one note into `out` at its onset sample.
pub fn render_note_into(out: &mut [f32], note: &Note, cfg: &SynthConfig) {
    let sr = f64::from(cfg.sample_rate);
    let start_idx = (note.start * sr).round() as usize;
    let held = note.duration().max(MIN_NOTE_SECONDS);
    let attack = cfg.attack.min(held);
    let total = held + cfg.release;
    let n = (total * sr).round() as usize;
    let f0 = midi_to_hz(f64::from(note.pitch));
    let nyquist = sr / 2.0;
    let partials: Vec<(f64, f64)> = (1..=cfg.partials)
        .map(f64::from)
        .filter(|k| k * f0 < nyquist)
        .map(|k| (std::f64::consts::TAU * k * f0 / sr, 1.0 / k))
        .collect();
    let norm: f64 = (1..=cfg.partials).map(|k| 1.0 / f64::from(k)).sum();
    let amp = f64::from(cfg.gain) * f64::from(note.velocity) / 127.0 / norm;
    for i in 0..n {
        let Some(slot) = out.get_mut(start_idx + i) else {
            break;
        };
        let t = i as f64 / sr;
        let env = if t < attack {
            t / attack
        } else if t < held {
            1.0
        } else if cfg.release > 0.0 {
            (1.0 - (t - held) / cfg.release).max(0.0)
        } else {
            0.0
        };
        if env == 0.0 {
            continue;
        }
        let s: f64 = partials.iter().map(|(w, a)| a * (w * i as f64).sin()).sum();
        *slot += (amp * env * s) as f32;
    }
}

/// Sum of all notes without peak normalization.
pub fn render_unnormalized(seq: &NoteSequence, cfg: &SynthConfig) -> Vec<f32> {
    let mut out = vec![0.0f32; render_length(seq, cfg)];
    for note in seq.notes() {
        render_note_into(&mut out, note, cfg);
    }
    out
}

/// Renders a sequence to mono audio; rescales to a 0.9 peak if any sample
/// would exceed full scale.
pub fn render(seq: &NoteSequence, cfg: &SynthConfig) -> Result<Vec<f32>, SynthError> {
    cfg.validate()?;
    let mut out = render_unnormalized(seq, cfg);
    let peak = out.iter().fold(0.0f32, |m, v| m.max(v.abs()));
    if peak > 1.0 {
        let scale = NORMALIZED_PEAK / peak;
        out.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(out)
}

/// Beat times `i * 60 / bpm` strictly before `duration`.
pub fn click_times(bpm: f64, duration: f64) -> Vec<f64> {
    let period = 60.0 / bpm;
    (0..)
        .map(|i| i as f64 * period)
        .take_while(|&t| t < duration)
        .collect()
}

/// Short decaying noise bursts on every beat.
pub fn render_clicks(bpm: f64, duration: f64, sample_rate: u32) -> Result<Vec<f32>, SynthError> {
    if !(30.0..=300.0).contains(&bpm) {
        return Err(SynthError::BpmOutOfRange(bpm));
    }
    let sr = f64::from(sample_rate);
    let mut out = vec![0.0f32; (duration.max(0.0) * sr).round() as usize];
    let burst_len = (0.01 * sr).round() as usize;
    let mut rng = seed::rng(0x5eed_c11c);
    let burst: Vec<f32> = (0..burst_len)
        .map(|i| {
            let decay = (-(i as f64) / (0.002 * sr)).exp() as f32;
            rng.random_range(-1.0f32..1.0) * decay * 0.8
        })
        .collect();
    for t in click_times(bpm, duration) {
        let start = (t * sr).round() as usize;
        for (slot, b) in out.iter_mut().skip(start).zip(&burst) {
            *slot += b;
        }
    }
    Ok(out)
}
