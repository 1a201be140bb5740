//! Piece-level mistake simulation.
//!
//! Every note is visited once, in canonical order, and may independently
//! receive a mistouch neighbour, an onset shift, a pitch substitution and
//! ghost removal (checked in that order). Afterwards one short time block
//! per block period is cut out, removing every note whose onset falls inside
//! it. All draws come from one seeded stream.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::note::{Note, NoteSequence};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MistakeConfig {
    pub p_mistouch: f64,
    pub p_async: f64,
    pub p_subst: f64,
    pub p_ghost: f64,
    pub async_shift: (f64, f64),
    pub mistouch_onset_delay: (f64, f64),
    pub mistouch_duration: (f64, f64),
    pub mistouch_velocity_scale: f64,
    pub block_period: f64,
    pub block_length: (f64, f64),
    pub seed: u64,
}

impl Default for MistakeConfig {
    fn default() -> Self {
        Self {
            p_mistouch: 0.05,
            p_async: 0.2,
            p_subst: 0.05,
            p_ghost: 0.05,
            async_shift: (-0.7, 0.7),
            mistouch_onset_delay: (0.02, 0.1),
            mistouch_duration: (0.1, 0.3),
            mistouch_velocity_scale: 0.8,
            block_period: 5.0,
            block_length: (0.2, 0.5),
            seed: 0,
        }
    }
}

impl MistakeConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        for (name, p) in [
            ("p_mistouch", self.p_mistouch),
            ("p_async", self.p_async),
            ("p_subst", self.p_subst),
            ("p_ghost", self.p_ghost),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(AugmentError::BadConfig(format!("{name} = {p} is not a probability")));
            }
        }
        for (name, (lo, hi)) in [
            ("async_shift", self.async_shift),
            ("mistouch_onset_delay", self.mistouch_onset_delay),
            ("mistouch_duration", self.mistouch_duration),
            ("block_length", self.block_length),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(AugmentError::BadConfig(format!("{name} = ({lo}, {hi}) needs lower < upper")));
            }
        }
        if !(self.block_period.is_finite() && self.block_period > 0.0) {
            return Err(AugmentError::BadConfig(format!(
                "block_period = {} must be positive",
                self.block_period
            )));
        }
        if !(self.mistouch_velocity_scale.is_finite() && self.mistouch_velocity_scale >= 0.0) {
            return Err(AugmentError::BadConfig("mistouch_velocity_scale must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemovedBlock {
    pub start: f64,
    pub end: f64,
    pub removed_notes: usize,
}

/// What [`corrupt`] did. Counts refer to the input notes that were hit by
/// each check; `range_flips` counts neighbour pitches that had to go the
/// other way to stay inside 0..=127.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MistakeReport {
    pub input_notes: usize,
    pub output_notes: usize,
    pub mistouch: usize,
    pub asynchrony: usize,
    pub substitution: usize,
    pub ghost: usize,
    pub range_flips: usize,
    pub blocks: Vec<RemovedBlock>,
}

impl MistakeReport {
    pub fn block_removed(&self) -> usize {
        self.blocks.iter().map(|b| b.removed_notes).sum()
    }

    /// Single-line JSON record for pipeline manifests.
    pub fn to_record(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn uniform(rng: &mut seed::SeededRng, (lo, hi): (f64, f64)) -> f64 {
    rng.random_range(lo..hi)
}

/// Pitch one semitone away in direction `up`; reverses at the MIDI range edge.
fn neighbour(pitch: u8, up: bool, flips: &mut usize) -> u8 {
    match (up, pitch) {
        (true, 127) => {
            *flips += 1;
            126
        }
        (false, 0) => {
            *flips += 1;
            1
        }
        (true, p) => p + 1,
        (false, p) => p - 1,
    }
}

pub fn corrupt(seq: &NoteSequence, cfg: &MistakeConfig) -> Result<(NoteSequence, MistakeReport), AugmentError> {
    cfg.validate()?;
    let mut rng = seed::rng(cfg.seed);
    let mut report = MistakeReport {
        input_notes: seq.len(),
        ..MistakeReport::default()
    };
    let mut kept: Vec<Note> = Vec::with_capacity(seq.len());
    let mut inserted: Vec<Note> = Vec::new();

    for original in seq.notes() {
        let mut n = *original;

        if rng.random::<f64>() < cfg.p_mistouch {
            report.mistouch += 1;
            let up = rng.random_bool(0.5);
            let pitch = neighbour(n.pitch, up, &mut report.range_flips);
            let velocity = (cfg.mistouch_velocity_scale * f64::from(n.velocity))
                .round()
                .clamp(1.0, 127.0) as u8;
            let start = n.start + uniform(&mut rng, cfg.mistouch_onset_delay);
            let end = start + uniform(&mut rng, cfg.mistouch_duration);
            inserted.push(Note {
                pitch,
                velocity,
                start,
                end,
                ..n
            });
        }

        if rng.random::<f64>() < cfg.p_async {
            report.asynchrony += 1;
            let shift = uniform(&mut rng, cfg.async_shift);
            n.start = (n.start + shift).max(0.0);
            n.end = (n.end + shift).max(n.start);
        }

        if rng.random::<f64>() < cfg.p_subst {
            report.substitution += 1;
            let up = rng.random_bool(0.5);
            n.pitch = neighbour(n.pitch, up, &mut report.range_flips);
        }

        if rng.random::<f64>() < cfg.p_ghost {
            report.ghost += 1;
            continue;
        }
        kept.push(n);
    }
    kept.extend(inserted);

    let total = seq.total_duration();
    let blocks = (total / cfg.block_period).floor() as u64;
    for k in 0..=blocks {
        let start = cfg.block_period * k as f64 + rng.random_range(0.0..cfg.block_period);
        let end = start + uniform(&mut rng, cfg.block_length);
        let before = kept.len();
        kept.retain(|n| !(start <= n.start && n.start < end));
        report.blocks.push(RemovedBlock {
            start,
            end,
            removed_notes: before - kept.len(),
        });
    }

    report.output_notes = kept.len();
    let out = NoteSequence::new(kept, total, seq.source_id())?.with_tempo(seq.tempo_marks().to_vec());
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn notes(n: usize, spacing: f64) -> NoteSequence {
        let v = (0..n)
            .map(|i| Note::new(40 + (i % 48) as u8, 90, i as f64 * spacing, i as f64 * spacing + 0.4, (i % 4) as u8))
            .collect();
        NoteSequence::new(v, 0.0, "fixture").unwrap()
    }

    fn zero_probs(seed: u64) -> MistakeConfig {
        MistakeConfig {
            p_mistouch: 0.0,
            p_async: 0.0,
            p_subst: 0.0,
            p_ghost: 0.0,
            seed,
            ..MistakeConfig::default()
        }
    }

    #[test]
    fn only_block_removal_without_note_mistakes() {
        let seq = notes(400, 0.05); // 20.35 s
        let (out, report) = corrupt(&seq, &zero_probs(3)).unwrap();
        let expected_blocks = (seq.total_duration() / 5.0).floor() as usize + 1;
        assert_eq!(report.blocks.len(), expected_blocks);
        for (k, b) in report.blocks.iter().enumerate() {
            let len = b.end - b.start;
            assert!((0.2..0.5).contains(&len));
            assert!(b.start >= 5.0 * k as f64 && b.start < 5.0 * (k + 1) as f64);
        }
        assert_eq!(out.len(), seq.len() - report.block_removed());
        for n in out.notes() {
            assert!(seq.notes().contains(n));
            assert!(report.blocks.iter().all(|b| !(b.start <= n.start && n.start < b.end)));
        }
    }

    #[test]
    fn certain_ghost_removes_everything() {
        let seq = notes(1, 1.0);
        let cfg = MistakeConfig {
            p_ghost: 1.0,
            ..zero_probs(1)
        };
        let (out, report) = corrupt(&seq, &cfg).unwrap();
        assert!(out.is_empty());
        assert_eq!(report.ghost, 1);
    }

    #[test]
    fn sounding_notes_survive_blocks() {
        // one long note starting before every possible block
        let seq = NoteSequence::new(vec![Note::new(60, 80, 0.0, 30.0, 0)], 30.0, "s").unwrap();
        for seed in 0..50 {
            let (out, report) = corrupt(&seq, &zero_probs(seed)).unwrap();
            if report.blocks[0].start > 0.0 {
                assert_eq!(out.len(), 1);
            }
        }
    }

    #[test]
    fn mistouch_note_properties() {
        let seq = NoteSequence::new(vec![Note::new(127, 101, 1.0, 2.0, 33)], 2.0, "s").unwrap();
        let cfg = MistakeConfig {
            p_mistouch: 1.0,
            block_length: (1e-9, 2e-9),
            ..zero_probs(5)
        };
        let (out, report) = corrupt(&seq, &cfg).unwrap();
        assert_eq!(report.mistouch, 1);
        assert!(report.range_flips <= 1);
        let extra = out.notes().iter().find(|n| n.velocity != 101).expect("inserted");
        assert_eq!(extra.velocity, 81);
        assert_eq!(extra.program, 33);
        assert_eq!(extra.pitch, 126);
        let delay = extra.start - 1.0;
        assert!((0.02..0.1).contains(&delay));
        assert!((0.1..0.3).contains(&(extra.end - extra.start)));
    }

    #[test]
    fn asynchrony_clamps_at_zero() {
        let seq = notes(200, 0.01);
        let cfg = MistakeConfig {
            p_async: 1.0,
            ..zero_probs(11)
        };
        let (out, _) = corrupt(&seq, &cfg).unwrap();
        assert!(out.notes().iter().all(|n| n.start >= 0.0 && n.end >= n.start));
    }

    #[test]
    fn deterministic_under_seed() {
        let seq = notes(500, 0.1);
        let a = corrupt(&seq, &MistakeConfig::with_seed(42)).unwrap();
        let b = corrupt(&seq, &MistakeConfig::with_seed(42)).unwrap();
        assert_eq!(a, b);
        let c = corrupt(&seq, &MistakeConfig::with_seed(43)).unwrap();
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn rejects_bad_config() {
        let seq = notes(3, 1.0);
        let bad = MistakeConfig {
            p_async: 1.5,
            ..MistakeConfig::default()
        };
        assert!(corrupt(&seq, &bad).is_err());
        let bad = MistakeConfig {
            block_length: (0.5, 0.2),
            ..MistakeConfig::default()
        };
        assert!(corrupt(&seq, &bad).is_err());
    }

    #[test]
    fn report_record_is_json() {
        let (_, report) = corrupt(&notes(50, 0.2), &MistakeConfig::with_seed(1)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&report.to_record()).unwrap();
        assert_eq!(v["input_notes"], 50);
        assert!(v["blocks"].is_array());
    }
}
