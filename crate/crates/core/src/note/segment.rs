use serde::{Deserialize, Serialize};

use super::{Note, NoteSequence};

/// Conditioning window length used throughout the pipeline.
pub const DEFAULT_WINDOW_SECONDS: f64 = 10.0;

/// A fixed-length slice of a sequence with times relative to `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub offset: f64,
    pub length: f64,
    /// Notes starting inside the window; offsets are clipped to `length`.
    pub notes: Vec<Note>,
    /// Notes already sounding at the window start (`start < 0 < end`).
    /// Their offsets are kept unclipped.
    pub sustained: Vec<Note>,
}

impl Window {
    pub fn empty(length: f64) -> Self {
        Self {
            offset: 0.0,
            length,
            notes: Vec::new(),
            sustained: Vec::new(),
        }
    }
}

/// Cuts `seq` into windows starting every `hop` seconds until the end of the piece.
///
/// Returns no windows for a sequence without notes. Panics if `window_length`
/// or `hop` is not strictly positive.
pub fn segment(seq: &NoteSequence, window_length: f64, hop: f64) -> Vec<Window> {
    assert!(window_length > 0.0 && hop > 0.0, "window length and hop must be positive");
    if seq.is_empty() {
        return Vec::new();
    }
    let total = seq.total_duration();
    let count = (total / hop).ceil().max(1.0) as usize;
    (0..count)
        .map(|k| {
            let offset = k as f64 * hop;
            let stop = offset + window_length;
            let mut notes = Vec::new();
            let mut sustained = Vec::new();
            for n in seq.notes() {
                if n.start >= offset && n.start < stop {
                    notes.push(Note {
                        start: n.start - offset,
                        end: n.end.min(stop) - offset,
                        ..*n
                    });
                } else if n.start < offset && n.end > offset {
                    sustained.push(Note {
                        start: n.start - offset,
                        end: n.end - offset,
                        ..*n
                    });
                }
            }
            Window {
                offset,
                length: window_length,
                notes,
                sustained,
            }
        })
        .collect()
}

/// Inverse of [`segment`] for non-overlapping windows (`hop == window_length`).
///
/// Each note is restored to absolute time; notes clipped at a window
/// boundary take their true offset from the next window's sustained list.
pub fn reassemble(windows: &[Window]) -> Vec<Note> {
    let mut out = Vec::new();
    for (k, w) in windows.iter().enumerate() {
        for n in &w.notes {
            let start = n.start + w.offset;
            let mut end = n.end + w.offset;
            if n.end >= w.length {
                if let Some(next) = windows.get(k + 1) {
                    if let Some(tied) = next.sustained.iter().find(|s| {
                        s.pitch == n.pitch
                            && s.program == n.program
                            && s.is_drum == n.is_drum
                            && s.start + next.offset == start
                    }) {
                        end = tied.end + next.offset;
                    }
                }
            }
            out.push(Note { start, end, ..*n });
        }
    }
    out.sort_by(Note::canonical_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(notes: Vec<Note>, total: f64) -> NoteSequence {
        NoteSequence::new(notes, total, "t").unwrap()
    }

    #[test]
    fn boundary_note_is_tied() {
        let s = seq(vec![Note::new(60, 80, 9.5, 10.5, 0)], 12.0);
        let w = segment(&s, 10.0, 10.0);
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].notes.len(), 1);
        assert_eq!(w[0].notes[0].end, 10.0);
        assert!(w[1].notes.is_empty());
        assert_eq!(w[1].sustained.len(), 1);
        let tied = w[1].sustained[0];
        assert!(tied.start < 0.0 && tied.end > 0.0);
    }

    #[test]
    fn window_count_is_ceiling() {
        let s = seq(vec![Note::new(60, 80, 0.0, 1.0, 0)], 25.0);
        let offsets: Vec<f64> = segment(&s, 10.0, 10.0).iter().map(|w| w.offset).collect();
        assert_eq!(offsets, vec![0.0, 10.0, 20.0]);
    }

    #[test]
    fn empty_sequence_gives_no_windows() {
        assert!(segment(&NoteSequence::empty("e"), 10.0, 10.0).is_empty());
    }

    #[test]
    fn onset_on_boundary_belongs_to_later_window() {
        let s = seq(vec![Note::new(60, 80, 10.0, 11.0, 0)], 20.0);
        let w = segment(&s, 10.0, 10.0);
        assert!(w[0].notes.is_empty() && w[0].sustained.is_empty());
        assert_eq!(w[1].notes[0].start, 0.0);
    }

    #[test]
    fn window_invariants_hold_with_overlap() {
        let notes = (0..40)
            .map(|i| Note::new(40 + (i % 30) as u8, 70, i as f64 * 0.7, i as f64 * 0.7 + 2.3, 0))
            .collect();
        let s = seq(notes, 0.0);
        for w in segment(&s, 10.0, 4.0) {
            assert!(w.notes.iter().all(|n| n.start >= 0.0 && n.start < w.length && n.end <= w.length));
            assert!(w.sustained.iter().all(|n| n.start < 0.0 && n.end > 0.0));
        }
    }

    /// Fifty notes on a 1/64 s grid so rebasing is exact in binary floating point.
    #[test]
    fn dense_fixture_reassembles_exactly() {
        let notes: Vec<Note> = (0..50u32)
            .map(|i| {
                let start = f64::from((i * 37) % 1600) / 64.0;
                let len = f64::from(8 + (i * 53) % 400) / 64.0;
                Note::new(30 + (i * 7 % 60) as u8, 40 + (i % 80) as u8, start, start + len, (i % 3) as u8)
            })
            .collect();
        let s = seq(notes, 0.0);
        let windows = segment(&s, 10.0, 10.0);
        let back = reassemble(&windows);
        assert_eq!(back, s.notes());
    }
}
