use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::note::{Note, NoteSequence, TempoMark};
use crate::seed;

/// Lower and upper limits of the duration ratios covered by the tiers.
pub const MIN_RATIO: f64 = 0.4;
pub const MAX_RATIO: f64 = 2.2;

/// Global speed change described by a duration ratio (> 1 is slower).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpeedTier {
    VerySlow,
    Slow,
    SlightlySlow,
    Neutral,
    SlightlyFast,
    Fast,
}

impl SpeedTier {
    pub const ALL: [SpeedTier; 6] = [
        SpeedTier::VerySlow,
        SpeedTier::Slow,
        SpeedTier::SlightlySlow,
        SpeedTier::Neutral,
        SpeedTier::SlightlyFast,
        SpeedTier::Fast,
    ];

    /// Open interval of duration ratios.
    pub fn ratio_range(self) -> (f64, f64) {
        match self {
            SpeedTier::VerySlow => (1.8, 2.2),
            SpeedTier::Slow => (1.5, 1.8),
            SpeedTier::SlightlySlow => (1.2, 1.5),
            SpeedTier::Neutral => (0.8, 1.2),
            SpeedTier::SlightlyFast => (0.6, 0.8),
            SpeedTier::Fast => (0.4, 0.6),
        }
    }

    pub fn keywords(self) -> &'static [&'static str] {
        match self {
            SpeedTier::VerySlow => &["Twice as slow as", "Significantly slower", "About half the speed of"],
            SpeedTier::Slow => &["Considerably slower", "Moving slower"],
            SpeedTier::SlightlySlow => &[
                "A bit slower than score",
                "Just under the score\u{2019}s pace",
                "Slightly behind the intended pace",
            ],
            SpeedTier::Neutral => &["At the original speed", "In line with the score\u{2019}s tempo"],
            SpeedTier::SlightlyFast => &[
                "A bit faster",
                "Just above the score\u{2019}s speed",
                "Slightly faster than score",
            ],
            SpeedTier::Fast => &["Notably faster", "Well beyond the original tempo"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpeedTier::VerySlow => "very-slow",
            SpeedTier::Slow => "slow",
            SpeedTier::SlightlySlow => "slightly-slow",
            SpeedTier::Neutral => "neutral",
            SpeedTier::SlightlyFast => "slightly-fast",
            SpeedTier::Fast => "fast",
        }
    }

    /// Tier containing `ratio`. A boundary value belongs to the slower tier,
    /// so each tier covers `[lower, upper)` and 2.2 itself is `VerySlow`.
    /// Ratios outside `[0.4, 2.2]` return `None`.
    pub fn for_ratio(ratio: f64) -> Option<SpeedTier> {
        if !(MIN_RATIO..=MAX_RATIO).contains(&ratio) {
            return None;
        }
        if ratio == MAX_RATIO {
            return Some(SpeedTier::VerySlow);
        }
        Self::ALL.into_iter().find(|t| {
            let (lo, hi) = t.ratio_range();
            ratio >= lo && ratio < hi
        })
    }
}

impl fmt::Display for SpeedTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpeedTier {
    type Err = AugmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['_', ' '], "-");
        Self::ALL
            .into_iter()
            .find(|t| t.name() == key || t.name().replace('-', "") == key)
            .ok_or_else(|| AugmentError::UnknownTier(s.to_string()))
    }
}

/// Scales every time in the sequence by `ratio`; tempo marks slow down accordingly.
pub fn stretch(seq: &NoteSequence, ratio: f64) -> Result<NoteSequence, AugmentError> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(AugmentError::BadRatio(ratio));
    }
    let notes: Vec<Note> = seq
        .notes()
        .iter()
        .map(|n| Note {
            start: n.start * ratio,
            end: n.end * ratio,
            ..*n
        })
        .collect();
    let tempo = seq
        .tempo_marks()
        .iter()
        .map(|m| TempoMark {
            time: m.time * ratio,
            bpm: m.bpm / ratio,
        })
        .collect();
    Ok(NoteSequence::new(notes, seq.total_duration() * ratio, seq.source_id())?.with_tempo(tempo))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedAugmentation {
    pub sequence: NoteSequence,
    pub tier: SpeedTier,
    pub ratio: f64,
    pub keyword: &'static str,
}

/// Draws a ratio uniformly from the open tier range and a keyword uniformly
/// from the tier's list, then stretches the sequence.
pub fn sample_speed_augmentation(seq: &NoteSequence, tier: SpeedTier, rng_seed: u64) -> SpeedAugmentation {
    let mut rng = seed::rng(rng_seed);
    let (lo, hi) = tier.ratio_range();
    let ratio = loop {
        let r = rng.random_range(lo..hi);
        if r > lo {
            break r;
        }
    };
    let keyword = *tier.keywords().choose(&mut rng).expect("tiers have keywords");
    let sequence = stretch(seq, ratio).expect("tier ratios are positive");
    SpeedAugmentation {
        sequence,
        tier,
        ratio,
        keyword,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq() -> NoteSequence {
        NoteSequence::new(
            vec![Note::new(60, 80, 1.0, 2.0, 0), Note::new(64, 70, 4.0, 10.0, 3)],
            10.0,
            "s",
        )
        .unwrap()
        .with_tempo(vec![TempoMark { time: 0.0, bpm: 120.0 }])
    }

    #[test]
    fn tiers_partition_the_ratio_envelope() {
        let mut ranges: Vec<(f64, f64)> = SpeedTier::ALL.iter().map(|t| t.ratio_range()).collect();
        ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(ranges.first().unwrap().0, MIN_RATIO);
        assert_eq!(ranges.last().unwrap().1, MAX_RATIO);
        for pair in ranges.windows(2) {
            assert_eq!(pair[0].1, pair[1].0);
        }
    }

    #[test]
    fn boundaries_go_to_slower_tier() {
        assert_eq!(SpeedTier::for_ratio(1.8), Some(SpeedTier::VerySlow));
        assert_eq!(SpeedTier::for_ratio(1.5), Some(SpeedTier::Slow));
        assert_eq!(SpeedTier::for_ratio(0.8), Some(SpeedTier::Neutral));
        assert_eq!(SpeedTier::for_ratio(0.4), Some(SpeedTier::Fast));
        assert_eq!(SpeedTier::for_ratio(2.2), Some(SpeedTier::VerySlow));
        assert_eq!(SpeedTier::for_ratio(1.7), Some(SpeedTier::Slow));
        assert_eq!(SpeedTier::for_ratio(2.3), None);
        assert_eq!(SpeedTier::for_ratio(0.39), None);
    }

    #[test]
    fn stretch_identity_and_linearity() {
        let s = seq();
        assert_eq!(stretch(&s, 1.0).unwrap(), s);
        let d = stretch(&s, 2.0).unwrap();
        assert_eq!((d.notes()[0].start, d.notes()[0].end), (2.0, 4.0));
        assert_eq!(d.notes()[0].pitch, 60);
        assert_eq!(d.tempo_marks()[0].bpm, 60.0);
        assert!(stretch(&s, 0.0).is_err());
        assert!(stretch(&s, -1.0).is_err());
    }

    #[test]
    fn ten_seconds_at_one_point_seven() {
        let d = stretch(&seq(), 1.7).unwrap();
        assert!((d.total_duration() - 17.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_ratio_in_tier() {
        for seed in 0..200 {
            let a = sample_speed_augmentation(&seq(), SpeedTier::VerySlow, seed);
            assert!(a.ratio > 1.8 && a.ratio < 2.2);
            assert!(SpeedTier::VerySlow.keywords().contains(&a.keyword));
            let n = sample_speed_augmentation(&seq(), SpeedTier::Neutral, seed);
            assert!(n.ratio > 0.8 && n.ratio < 1.2);
        }
        let a = sample_speed_augmentation(&seq(), SpeedTier::Fast, 99);
        let b = sample_speed_augmentation(&seq(), SpeedTier::Fast, 99);
        assert_eq!((a.ratio, a.keyword), (b.ratio, b.keyword));
    }

    #[test]
    fn parse_tier_names() {
        assert_eq!("very-slow".parse::<SpeedTier>().unwrap(), SpeedTier::VerySlow);
        assert_eq!("SlightlyFast".parse::<SpeedTier>().unwrap(), SpeedTier::SlightlyFast);
        assert!("glacial".parse::<SpeedTier>().is_err());
    }
}
