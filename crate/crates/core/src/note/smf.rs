//! Standard MIDI File reading and writing (formats 0 and 1).

use std::collections::HashMap;
use std::path::Path;

use super::tempo::{TempoMap, Timebase, DEFAULT_US_PER_QUARTER};
use super::{Note, NoteError, NoteSequence, DRUM_CHANNEL};

#[derive(Debug, thiserror::Error)]
pub enum MidiError {
    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: &'static str },
    #[error("unsupported SMF format {0} (only formats 0 and 1 are supported)")]
    UnsupportedFormat(u16),
    #[error("truncated track {track} at byte {offset}")]
    TruncatedTrack { track: usize, offset: usize },
    #[error("malformed event in track {track} at byte {offset}: {reason}")]
    MalformedEvent {
        track: usize,
        offset: usize,
        reason: &'static str,
    },
    #[error("cannot encode sequence as SMF: {0}")]
    Unencodable(String),
    #[error(transparent)]
    Note(#[from] NoteError),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy)]
enum EventKind {
    NoteOn { channel: u8, key: u8, velocity: u8 },
    NoteOff { channel: u8, key: u8 },
    Program { channel: u8, program: u8 },
}

impl EventKind {
    /// Same-tick processing order: program changes, then releases, then onsets.
    fn rank(&self) -> u8 {
        match self {
            EventKind::Program { .. } => 0,
            EventKind::NoteOff { .. } => 1,
            EventKind::NoteOn { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct TimedEvent {
    tick: u64,
    track: usize,
    seq: usize,
    kind: EventKind,
}

struct TrackScan {
    events: Vec<TimedEvent>,
    tempos: Vec<(u64, u32)>,
    end_tick: u64,
}

fn be_u16(b: &[u8]) -> u16 {
    u16::from_be_bytes([b[0], b[1]])
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

/// Parses an SMF byte buffer into a [`NoteSequence`].
///
/// Tempo events from every track form one global tempo map. A note-on for a
/// pitch already sounding on the same track and channel closes the earlier
/// note at the new onset. Notes never released end at the last event of the
/// file. Controller messages (including sustain pedal) are ignored.
pub fn parse_midi(bytes: &[u8]) -> Result<NoteSequence, MidiError> {
    if bytes.len() < 14 {
        return Err(MidiError::MalformedHeader {
            offset: bytes.len(),
            reason: "file shorter than a header chunk",
        });
    }
    if &bytes[0..4] != b"MThd" {
        return Err(MidiError::MalformedHeader {
            offset: 0,
            reason: "missing MThd chunk id",
        });
    }
    let header_len = be_u32(&bytes[4..8]) as usize;
    if header_len < 6 || 8 + header_len > bytes.len() {
        return Err(MidiError::MalformedHeader {
            offset: 4,
            reason: "invalid header chunk length",
        });
    }
    let format = be_u16(&bytes[8..10]);
    match format {
        0 | 1 => {}
        2 => return Err(MidiError::UnsupportedFormat(2)),
        _ => {
            return Err(MidiError::MalformedHeader {
                offset: 8,
                reason: "unknown SMF format",
            })
        }
    }
    let ntracks = be_u16(&bytes[10..12]) as usize;
    let division = be_u16(&bytes[12..14]);
    let timebase = if division & 0x8000 != 0 {
        let fps = (-((division >> 8) as u8 as i8)) as u8;
        let ticks_per_frame = (division & 0xff) as u8;
        if !matches!(fps, 24 | 25 | 29 | 30) || ticks_per_frame == 0 {
            return Err(MidiError::MalformedHeader {
                offset: 12,
                reason: "invalid SMPTE division",
            });
        }
        Timebase::Timecode {
            fps,
            ticks_per_frame,
        }
    } else {
        if division == 0 {
            return Err(MidiError::MalformedHeader {
                offset: 12,
                reason: "zero ticks per quarter note",
            });
        }
        Timebase::Metrical(division)
    };
    if format == 0 && ntracks > 1 {
        return Err(MidiError::MalformedHeader {
            offset: 10,
            reason: "format 0 file declares more than one track",
        });
    }

    let mut pos = 8 + header_len;
    let mut events = Vec::new();
    let mut tempos = Vec::new();
    let mut end_tick = 0u64;
    let mut track = 0usize;
    while track < ntracks {
        if pos + 8 > bytes.len() {
            return Err(MidiError::TruncatedTrack { track, offset: pos });
        }
        let id = &bytes[pos..pos + 4];
        let len = be_u32(&bytes[pos + 4..pos + 8]) as usize;
        let body = pos + 8;
        if body + len > bytes.len() {
            return Err(MidiError::TruncatedTrack {
                track,
                offset: bytes.len(),
            });
        }
        if id == b"MTrk" {
            let scan = scan_track(bytes, body, body + len, track)?;
            events.extend(scan.events);
            tempos.extend(scan.tempos);
            end_tick = end_tick.max(scan.end_tick);
            track += 1;
        }
        pos = body + len;
    }

    let has_tempo = !tempos.is_empty();
    let map = TempoMap::new(timebase, tempos);
    let notes = pair_notes(events, &map, end_tick)?;
    let total = map.tick_to_seconds(end_tick);
    let seq = NoteSequence::new(notes, total, "")?;
    Ok(if has_tempo {
        seq.with_tempo(map.marks())
    } else {
        seq
    })
}

/// Reads and parses a MIDI file; the path becomes the sequence's source id.
pub fn parse_midi_file(path: impl AsRef<Path>) -> Result<NoteSequence, MidiError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| MidiError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_midi(&bytes)?.with_source_id(path.display().to_string()))
}

fn read_vlq(bytes: &[u8], pos: &mut usize, end: usize, track: usize) -> Result<u64, MidiError> {
    let start = *pos;
    let mut value = 0u64;
    for i in 0..4 {
        if *pos >= end {
            return Err(MidiError::TruncatedTrack { track, offset: *pos });
        }
        let b = bytes[*pos];
        *pos += 1;
        value = (value << 7) | u64::from(b & 0x7f);
        if b & 0x80 == 0 {
            return Ok(value);
        }
        if i == 3 {
            break;
        }
    }
    Err(MidiError::MalformedEvent {
        track,
        offset: start,
        reason: "variable-length quantity longer than 4 bytes",
    })
}

fn scan_track(bytes: &[u8], start: usize, end: usize, track: usize) -> Result<TrackScan, MidiError> {
    let mut pos = start;
    let mut tick = 0u64;
    let mut running: Option<u8> = None;
    let mut scan = TrackScan {
        events: Vec::new(),
        tempos: Vec::new(),
        end_tick: 0,
    };
    let need = |pos: usize, n: usize| -> Result<(), MidiError> {
        if pos + n > end {
            Err(MidiError::TruncatedTrack { track, offset: end })
        } else {
            Ok(())
        }
    };
    while pos < end {
        tick += read_vlq(bytes, &mut pos, end, track)?;
        need(pos, 1)?;
        let event_offset = pos;
        let status = if bytes[pos] & 0x80 != 0 {
            pos += 1;
            bytes[pos - 1]
        } else {
            running.ok_or(MidiError::MalformedEvent {
                track,
                offset: event_offset,
                reason: "data byte without running status",
            })?
        };
        match status {
            0xff => {
                running = None;
                need(pos, 1)?;
                let meta = bytes[pos];
                pos += 1;
                let len = read_vlq(bytes, &mut pos, end, track)? as usize;
                need(pos, len)?;
                let data = &bytes[pos..pos + len];
                pos += len;
                match meta {
                    0x51 => {
                        if len != 3 {
                            return Err(MidiError::MalformedEvent {
                                track,
                                offset: event_offset,
                                reason: "set-tempo event must carry 3 bytes",
                            });
                        }
                        let us = u32::from_be_bytes([0, data[0], data[1], data[2]]);
                        scan.tempos.push((tick, us));
                    }
                    0x2f => {
                        scan.end_tick = tick;
                        break;
                    }
                    _ => {}
                }
            }
            0xf0 | 0xf7 => {
                running = None;
                let len = read_vlq(bytes, &mut pos, end, track)? as usize;
                need(pos, len)?;
                pos += len;
            }
            0xf1..=0xfe => {
                return Err(MidiError::MalformedEvent {
                    track,
                    offset: event_offset,
                    reason: "system message not allowed in a track chunk",
                });
            }
            _ => {
                running = Some(status);
                let channel = status & 0x0f;
                let n = if matches!(status & 0xf0, 0xc0 | 0xd0) { 1 } else { 2 };
                need(pos, n)?;
                let data = &bytes[pos..pos + n];
                if data.iter().any(|b| b & 0x80 != 0) {
                    return Err(MidiError::MalformedEvent {
                        track,
                        offset: pos,
                        reason: "status byte where a data byte was expected",
                    });
                }
                pos += n;
                let kind = match status & 0xf0 {
                    0x80 => Some(EventKind::NoteOff {
                        channel,
                        key: data[0],
                    }),
                    0x90 if data[1] == 0 => Some(EventKind::NoteOff {
                        channel,
                        key: data[0],
                    }),
                    0x90 => Some(EventKind::NoteOn {
                        channel,
                        key: data[0],
                        velocity: data[1],
                    }),
                    0xc0 => Some(EventKind::Program {
                        channel,
                        program: data[0],
                    }),
                    _ => None,
                };
                if let Some(kind) = kind {
                    let seq = scan.events.len();
                    scan.events.push(TimedEvent {
                        tick,
                        track,
                        seq,
                        kind,
                    });
                }
            }
        }
        scan.end_tick = tick;
    }
    Ok(scan)
}

fn pair_notes(
    mut events: Vec<TimedEvent>,
    map: &TempoMap,
    end_tick: u64,
) -> Result<Vec<Note>, MidiError> {
    events.sort_by_key(|e| (e.tick, e.kind.rank(), e.track, e.seq));
    let mut programs = [0u8; 16];
    // (track, channel, key) -> (onset tick, velocity, program)
    let mut active: HashMap<(usize, u8, u8), (u64, u8, u8)> = HashMap::new();
    let mut notes = Vec::new();
    let close = |on: u64, off: u64, channel: u8, key: u8, velocity: u8, program: u8| Note {
        pitch: key,
        velocity,
        start: map.tick_to_seconds(on),
        end: map.tick_to_seconds(off),
        program,
        is_drum: channel == DRUM_CHANNEL,
    };
    for e in events {
        match e.kind {
            EventKind::Program { channel, program } => programs[channel as usize] = program,
            EventKind::NoteOff { channel, key } => {
                if let Some((on, vel, prog)) = active.remove(&(e.track, channel, key)) {
                    notes.push(close(on, e.tick, channel, key, vel, prog));
                }
            }
            EventKind::NoteOn {
                channel,
                key,
                velocity,
            } => {
                let program = programs[channel as usize];
                if let Some((on, vel, prog)) =
                    active.insert((e.track, channel, key), (e.tick, velocity, program))
                {
                    // Re-struck at the same tick: the earlier note has no duration.
                    if on < e.tick {
                        notes.push(close(on, e.tick, channel, key, vel, prog));
                    }
                }
            }
        }
    }
    let mut dangling: Vec<_> = active.into_iter().collect();
    dangling.sort_by_key(|(k, v)| (v.0, *k));
    for ((_, channel, key), (on, vel, prog)) in dangling {
        notes.push(close(on, end_tick.max(on), channel, key, vel, prog));
    }
    Ok(notes)
}

fn push_vlq(out: &mut Vec<u8>, mut value: u64) {
    let mut buf = [0u8; 10];
    let mut i = buf.len() - 1;
    buf[i] = (value & 0x7f) as u8;
    value >>= 7;
    while value > 0 {
        i -= 1;
        buf[i] = (value & 0x7f) as u8 | 0x80;
        value >>= 7;
    }
    out.extend_from_slice(&buf[i..]);
}

/// Serializes a sequence as a format-0 SMF with `ppq` ticks per quarter.
///
/// The sequence's tempo marks (or 120 BPM when it has none) become the
/// file's tempo map. Non-drum programs are assigned channels in ascending
/// program order, skipping the drum channel; more than 15 distinct programs
/// cannot be represented. Notes shorter than one tick are lengthened to one
/// tick so that they survive a re-parse.
pub fn write_midi(seq: &NoteSequence, ppq: u16) -> Result<Vec<u8>, MidiError> {
    if ppq == 0 || ppq & 0x8000 != 0 {
        return Err(MidiError::Unencodable(format!("invalid ticks per quarter {ppq}")));
    }
    let timebase = Timebase::Metrical(ppq);
    let mut changes: Vec<(u64, u32)> = Vec::new();
    let mut map = TempoMap::new(timebase, vec![]);
    for mark in seq.tempo_marks() {
        if !(mark.bpm.is_finite() && mark.bpm > 0.0) {
            return Err(MidiError::Unencodable(format!("invalid tempo {} BPM", mark.bpm)));
        }
        let tick = map.seconds_to_tick(mark.time);
        let us = (60e6 / mark.bpm).round().clamp(1.0, 16_777_215.0) as u32;
        changes.push((tick, us));
        map = TempoMap::new(timebase, changes.clone());
    }
    if changes.is_empty() {
        changes.push((0, DEFAULT_US_PER_QUARTER));
    }

    let mut programs: Vec<u8> = seq
        .notes()
        .iter()
        .filter(|n| !n.is_drum)
        .map(|n| n.program)
        .collect();
    programs.sort_unstable();
    programs.dedup();
    let free_channels: Vec<u8> = (0u8..16).filter(|&c| c != DRUM_CHANNEL).collect();
    if programs.len() > free_channels.len() {
        return Err(MidiError::Unencodable(format!(
            "{} distinct programs exceed the 15 melodic channels",
            programs.len()
        )));
    }
    let channel_of: HashMap<u8, u8> = programs
        .iter()
        .zip(&free_channels)
        .map(|(&p, &c)| (p, c))
        .collect();
    let drum_program = seq.notes().iter().find(|n| n.is_drum).map(|n| n.program);

    // (tick, rank, channel, key, bytes)
    let mut events: Vec<(u64, u8, u8, u8, Vec<u8>)> = Vec::new();
    for &(tick, us) in &changes {
        let b = us.to_be_bytes();
        events.push((tick, 0, 0, 0, vec![0xff, 0x51, 0x03, b[1], b[2], b[3]]));
    }
    for (&program, &channel) in &channel_of {
        events.push((0, 1, channel, 0, vec![0xc0 | channel, program]));
    }
    if let Some(program) = drum_program {
        events.push((0, 1, DRUM_CHANNEL, 0, vec![0xc0 | DRUM_CHANNEL, program]));
    }
    let mut last_tick = map.seconds_to_tick(seq.total_duration());
    for n in seq.notes() {
        let channel = if n.is_drum {
            DRUM_CHANNEL
        } else {
            channel_of[&n.program]
        };
        let on = map.seconds_to_tick(n.start);
        let off = map.seconds_to_tick(n.end).max(on + 1);
        last_tick = last_tick.max(off);
        events.push((on, 3, channel, n.pitch, vec![0x90 | channel, n.pitch, n.velocity.max(1)]));
        events.push((off, 2, channel, n.pitch, vec![0x80 | channel, n.pitch, 0]));
    }
    events.sort_by_key(|e| (e.0, e.1, e.2, e.3));

    let mut track = Vec::new();
    let mut now = 0u64;
    for (tick, _, _, _, data) in &events {
        push_vlq(&mut track, tick - now);
        now = *tick;
        track.extend_from_slice(data);
    }
    push_vlq(&mut track, last_tick.saturating_sub(now));
    track.extend_from_slice(&[0xff, 0x2f, 0x00]);

    let mut out = Vec::with_capacity(22 + track.len());
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&ppq.to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend_from_slice(&track);
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Builds an SMF from raw track bodies (without the MTrk headers).
    pub(crate) fn smf(format: u16, ppq: u16, tracks: &[Vec<u8>]) -> Vec<u8> {
        let mut out = b"MThd".to_vec();
        out.extend_from_slice(&6u32.to_be_bytes());
        out.extend_from_slice(&format.to_be_bytes());
        out.extend_from_slice(&(tracks.len() as u16).to_be_bytes());
        out.extend_from_slice(&ppq.to_be_bytes());
        for t in tracks {
            out.extend_from_slice(b"MTrk");
            out.extend_from_slice(&(t.len() as u32).to_be_bytes());
            out.extend_from_slice(t);
        }
        out
    }

    const END: [u8; 4] = [0x00, 0xff, 0x2f, 0x00];

    #[test]
    fn single_note() {
        let mut t = vec![0x00, 0xff, 0x51, 0x03, 0x07, 0xa1, 0x20]; // 500000 us
        t.extend_from_slice(&[0x00, 0x90, 60, 100]);
        t.extend_from_slice(&[0x83, 0x60, 0x80, 60, 0]); // delta 480
        t.extend_from_slice(&END);
        let seq = parse_midi(&smf(0, 480, &[t])).unwrap();
        assert_eq!(seq.len(), 1);
        let n = seq.notes()[0];
        assert_eq!((n.pitch, n.velocity, n.start, n.end), (60, 100, 0.0, 0.5));
        assert_eq!(seq.reference_bpm(), Some(120.0));
    }

    #[test]
    fn empty_track() {
        let seq = parse_midi(&smf(0, 480, &[END.to_vec()])).unwrap();
        assert!(seq.is_empty());
        assert_eq!(seq.total_duration(), 0.0);
    }

    /// Three notes across a tempo change, checked against a hand-built table.
    ///
    /// ppq 96. Tempo 600000 us/quarter at tick 0, 400000 at tick 192.
    /// tick -> seconds: 0 -> 0, 96 -> 0.6, 192 -> 1.2, 240 -> 1.4,
    /// 288 -> 1.6, 384 -> 2.0.
    #[test]
    fn tempo_change_piecewise() {
        let t0 = vec![
            0x00, 0xff, 0x51, 0x03, 0x09, 0x27, 0xc0, // 600000
            0x81, 0x40, 0xff, 0x51, 0x03, 0x06, 0x1a, 0x80, // +192: 400000
            0x00, 0xff, 0x2f, 0x00,
        ];
        let t1 = vec![
            0x00, 0x90, 60, 90, // on 60 @0
            0x60, 0x80, 60, 0, // off 60 @96
            0x00, 0x90, 64, 90, // on 64 @96
            0x81, 0x00, 0x90, 67, 90, // on 67 @224
            0x10, 0x80, 64, 0, // off 64 @240
            0x81, 0x10, 0x80, 67, 0, // off 67 @384
            0x00, 0xff, 0x2f, 0x00,
        ];
        let seq = parse_midi(&smf(1, 96, &[t0, t1])).unwrap();
        let got: Vec<(u8, f64, f64)> = seq.notes().iter().map(|n| (n.pitch, n.start, n.end)).collect();
        // 224 ticks: 1.2 + 32 * 0.4 / 96
        let t224 = 1.2 + 32.0 * 0.4 / 96.0;
        let expect = [(60, 0.0, 0.6), (64, 0.6, 1.4), (67, t224, 2.0)];
        assert_eq!(got.len(), 3);
        for (g, e) in got.iter().zip(expect) {
            assert_eq!(g.0, e.0);
            assert!((g.1 - e.1).abs() < 1e-12, "{g:?} vs {e:?}");
            assert!((g.2 - e.2).abs() < 1e-12, "{g:?} vs {e:?}");
        }
        assert!((seq.total_duration() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_same_pitch_truncates() {
        let t = vec![
            0x00, 0x90, 60, 80, 0x60, 0x90, 60, 70, // re-strike at 96 while sounding
            0x60, 0x80, 60, 0, 0x60, 0x80, 60, 0, 0x00, 0xff, 0x2f, 0x00,
        ];
        let seq = parse_midi(&smf(0, 96, &[t])).unwrap();
        let got: Vec<(f64, f64, u8)> = seq.notes().iter().map(|n| (n.start, n.end, n.velocity)).collect();
        assert_eq!(got, vec![(0.0, 0.5, 80), (0.5, 1.0, 70)]);
    }

    #[test]
    fn running_status_and_velocity_zero() {
        let t = vec![
            0x00, 0x90, 60, 80, 0x00, 64, 80, // running status
            0x60, 60, 0, 0x00, 64, 0, // note-on vel 0 as note-off
            0x00, 0xff, 0x2f, 0x00,
        ];
        let seq = parse_midi(&smf(0, 96, &[t])).unwrap();
        assert_eq!(seq.len(), 2);
        assert!(seq.notes().iter().all(|n| n.end == 0.5));
    }

    #[test]
    fn program_and_drums() {
        let t = vec![
            0x00, 0xc1, 40, 0x00, 0x91, 70, 80, 0x00, 0x99, 36, 100, 0x60, 0x81, 70, 0, 0x00, 0x89,
            36, 0, 0x00, 0xff, 0x2f, 0x00,
        ];
        let seq = parse_midi(&smf(0, 96, &[t])).unwrap();
        let drum = seq.notes().iter().find(|n| n.pitch == 36).unwrap();
        let violin = seq.notes().iter().find(|n| n.pitch == 70).unwrap();
        assert!(drum.is_drum);
        assert_eq!(violin.program, 40);
        assert!(!violin.is_drum);
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            parse_midi(b"MThx\0\0\0\x06\0\0\0\x01\x01\xe0"),
            Err(MidiError::MalformedHeader { offset: 0, .. })
        ));
        assert!(matches!(
            parse_midi(&smf(2, 96, &[END.to_vec()])),
            Err(MidiError::UnsupportedFormat(2))
        ));
        let mut bytes = smf(0, 96, &[vec![0x00, 0x90, 60, 80, 0x60, 0x80, 60, 0, 0x00, 0xff, 0x2f, 0x00]]);
        bytes.truncate(bytes.len() - 5);
        assert!(matches!(parse_midi(&bytes), Err(MidiError::TruncatedTrack { track: 0, .. })));
        // event cut short inside a correctly sized chunk
        let bytes = smf(0, 96, &[vec![0x00, 0x90, 60]]);
        assert!(matches!(parse_midi(&bytes), Err(MidiError::TruncatedTrack { .. })));
        // declared tracks missing
        let mut bytes = smf(1, 96, &[END.to_vec()]);
        bytes[11] = 2;
        assert!(matches!(parse_midi(&bytes), Err(MidiError::TruncatedTrack { track: 1, .. })));
        assert!(matches!(
            parse_midi(&smf(0, 96, &[vec![0x00, 60, 80]])),
            Err(MidiError::MalformedEvent { .. })
        ));
    }

    #[test]
    fn unknown_chunks_are_skipped() {
        let mut bytes = smf(0, 96, &[]);
        bytes[11] = 1;
        bytes.extend_from_slice(b"XFIH\0\0\0\x02ab");
        bytes.extend_from_slice(b"MTrk\0\0\0\x04");
        bytes.extend_from_slice(&END);
        assert!(parse_midi(&bytes).unwrap().is_empty());
    }

    #[test]
    fn write_then_parse() {
        let seq = NoteSequence::new(
            vec![
                Note::new(60, 90, 0.0, 0.5, 0),
                Note::new(64, 70, 0.25, 1.0, 40),
                Note {
                    is_drum: true,
                    ..Note::new(36, 110, 0.5, 0.6, 0)
                },
            ],
            1.5,
            "x",
        )
        .unwrap();
        let back = parse_midi(&write_midi(&seq, 480).unwrap()).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in seq.notes().iter().zip(back.notes()) {
            assert_eq!((a.pitch, a.velocity, a.program, a.is_drum), (b.pitch, b.velocity, b.program, b.is_drum));
            assert!((a.start - b.start).abs() < 1e-9 && (a.end - b.end).abs() < 1e-9);
        }
        assert!((back.total_duration() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn too_many_programs() {
        let notes = (0..16).map(|p| Note::new(60, 80, 0.0, 1.0, p)).collect();
        let seq = NoteSequence::new(notes, 1.0, "x").unwrap();
        assert!(matches!(write_midi(&seq, 480), Err(MidiError::Unencodable(_))));
    }
}
