//! MIDI-like event tokenization of fixed-length windows.
//!
//! A stream has two parts. The tie section lists `Instrument`/`Note` pairs
//! for notes already sounding when the window opens and is closed by
//! `EndTieSection`. The body lists events grouped under absolute `Time`
//! tokens; `Instrument` and `On`/`Off` are emitted only when they change.
//! State resets at `EndTieSection`. Velocity is not represented.

mod io;
mod vocab;

pub use io::{StreamFormatError, STREAM_MAGIC, STREAM_VERSION};
pub use vocab::{Token, Vocabulary, INSTRUMENT_VALUES, NOTE_VALUES, ONOFF_VALUES, TIME_VALUES};

use std::collections::HashMap;

use crate::note::{Note, Window};

/// Velocity assigned to decoded notes.
pub const DECODED_VELOCITY: u8 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct TokenStream {
    pub tokens: Vec<u16>,
    pub window_length: f64,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn decoded(&self, vocab: &Vocabulary) -> Vec<Option<Token>> {
        self.tokens.iter().map(|&id| vocab.token(id)).collect()
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TokenizeError {
    #[error("window length must be positive and finite, got {0}")]
    BadWindowLength(f64),
    #[error("note outside window [0, {length}): {note:?}")]
    NoteOutsideWindow { note: Note, length: f64 },
    #[error("sustained note does not cross the window start: {0:?}")]
    BadSustained(Note),
    #[error("token id {id} at position {pos} is outside the vocabulary")]
    UnknownId { pos: usize, id: u16 },
    #[error("unexpected {token} at position {pos}: {reason}")]
    Unexpected {
        pos: usize,
        token: Token,
        reason: &'static str,
    },
    #[error("time goes backwards at position {pos}")]
    TimeDecreases { pos: usize },
    #[error("stream does not end with EOS")]
    MissingEos,
    #[error("Off for pitch {pitch} (program {program}) at position {pos} with no sounding note")]
    UnmatchedOff { pos: usize, program: u8, pitch: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeMode {
    #[default]
    Strict,
    /// Unmatched `Off` events are skipped and counted in the report.
    Lenient,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecodeReport {
    pub ignored_offs: usize,
}

fn quantize(t: f64, res: f64) -> i64 {
    (t / res).round() as i64
}

/// Encodes a window into a token stream.
///
/// Onsets quantize to the nearest step (clamped to the last step). Offsets
/// are at least one step after their onset; an offset that falls on or past
/// the window end is not emitted and decodes as the window end.
pub fn encode(win: &Window, vocab: &Vocabulary) -> Result<TokenStream, TokenizeError> {
    let length = win.length;
    if !(length.is_finite() && length > 0.0) {
        return Err(TokenizeError::BadWindowLength(length));
    }
    let res = vocab.time_resolution(length);
    let last_step = i64::from(vocab.time_steps()) - 1;

    // (step, 0 = off / 1 = on, program, pitch)
    let mut events: Vec<(i64, u8, u8, u8)> = Vec::with_capacity(2 * win.notes.len());
    let mut tied: Vec<(u8, u8)> = Vec::with_capacity(win.sustained.len());
    for n in &win.sustained {
        if !(n.start < 0.0 && n.end > 0.0) {
            return Err(TokenizeError::BadSustained(*n));
        }
        tied.push((n.program, n.pitch));
        let off = quantize(n.end, res).max(1);
        if off <= last_step {
            events.push((off, 0, n.program, n.pitch));
        }
    }
    for n in &win.notes {
        if !(n.start >= 0.0 && n.start < length) || n.end < n.start {
            return Err(TokenizeError::NoteOutsideWindow { note: *n, length });
        }
        let on = quantize(n.start, res).min(last_step);
        events.push((on, 1, n.program, n.pitch));
        let off = quantize(n.end, res).max(on + 1);
        if off <= last_step {
            events.push((off, 0, n.program, n.pitch));
        }
    }
    tied.sort_unstable();
    events.sort_unstable();

    let mut tokens = Vec::with_capacity(tied.len() * 2 + events.len() * 3 + 2);
    let mut program: Option<u8> = None;
    for (p, k) in tied {
        if program != Some(p) {
            tokens.push(vocab.id(Token::Instrument(p)));
            program = Some(p);
        }
        tokens.push(vocab.id(Token::Note(k)));
    }
    tokens.push(vocab.id(Token::EndTie));

    let mut program: Option<u8> = None;
    let mut onoff: Option<u8> = None;
    let mut time: Option<i64> = None;
    for (step, kind, p, k) in events {
        if time != Some(step) {
            tokens.push(vocab.id(Token::Time(step as u16)));
            time = Some(step);
        }
        if program != Some(p) {
            tokens.push(vocab.id(Token::Instrument(p)));
            program = Some(p);
        }
        if onoff != Some(kind) {
            tokens.push(vocab.id(if kind == 1 { Token::On } else { Token::Off }));
            onoff = Some(kind);
        }
        tokens.push(vocab.id(Token::Note(k)));
    }
    tokens.push(vocab.id(Token::Eos));
    Ok(TokenStream {
        tokens,
        window_length: length,
    })
}

/// Strict decode; see [`decode_with`].
pub fn decode(stream: &TokenStream, vocab: &Vocabulary) -> Result<Window, TokenizeError> {
    decode_with(stream, vocab, DecodeMode::Strict).map(|(w, _)| w)
}

/// Decodes a stream back into a window at offset 0.
///
/// Notes get velocity [`DECODED_VELOCITY`] and are never drums. Tied notes
/// get a start of minus one time step, since their onset is unknown. Notes
/// still sounding at EOS end at the window end.
pub fn decode_with(
    stream: &TokenStream,
    vocab: &Vocabulary,
    mode: DecodeMode,
) -> Result<(Window, DecodeReport), TokenizeError> {
    let length = stream.window_length;
    if !(length.is_finite() && length > 0.0) {
        return Err(TokenizeError::BadWindowLength(length));
    }
    let res = vocab.time_resolution(length);
    let mut report = DecodeReport::default();
    let mut tokens = stream.tokens.iter().enumerate().map(|(pos, &id)| {
        vocab
            .token(id)
            .map(|t| (pos, t))
            .ok_or(TokenizeError::UnknownId { pos, id })
    });

    let make = |program: u8, pitch: u8, start: f64, end: f64| Note {
        pitch,
        velocity: DECODED_VELOCITY,
        start,
        end,
        program,
        is_drum: false,
    };

    // Tie section.
    let mut tied: HashMap<(u8, u8), Option<f64>> = HashMap::new();
    let mut tied_order: Vec<(u8, u8)> = Vec::new();
    let mut program: Option<u8> = None;
    loop {
        let Some(next) = tokens.next() else {
            return Err(TokenizeError::MissingEos);
        };
        let (pos, token) = next?;
        match token {
            Token::Instrument(p) => program = Some(p),
            Token::Note(k) => {
                let p = program.ok_or(TokenizeError::Unexpected {
                    pos,
                    token,
                    reason: "tie note before any instrument",
                })?;
                if tied.insert((p, k), None).is_none() {
                    tied_order.push((p, k));
                }
            }
            Token::EndTie => break,
            _ => {
                return Err(TokenizeError::Unexpected {
                    pos,
                    token,
                    reason: "only instrument and note tokens may appear in the tie section",
                })
            }
        }
    }

    let mut program: Option<u8> = None;
    let mut on: Option<bool> = None;
    let mut time: Option<u16> = None;
    let mut active: HashMap<(u8, u8), f64> = HashMap::new();
    let mut notes = Vec::new();
    let mut saw_eos = false;
    for next in tokens.by_ref() {
        let (pos, token) = next?;
        match token {
            Token::Time(t) => {
                if time.is_some_and(|prev| t < prev) {
                    return Err(TokenizeError::TimeDecreases { pos });
                }
                time = Some(t);
            }
            Token::Instrument(p) => program = Some(p),
            Token::On => on = Some(true),
            Token::Off => on = Some(false),
            Token::Note(k) => {
                let (Some(t), Some(p), Some(is_on)) = (time, program, on) else {
                    return Err(TokenizeError::Unexpected {
                        pos,
                        token,
                        reason: "note before time, instrument and on/off state are set",
                    });
                };
                let now = f64::from(t) * res;
                if is_on {
                    if let Some(start) = active.insert((p, k), now) {
                        notes.push(make(p, k, start, now));
                    }
                } else if let Some(start) = active.remove(&(p, k)) {
                    notes.push(make(p, k, start, now));
                } else if let Some(slot @ None) = tied.get_mut(&(p, k)) {
                    *slot = Some(now);
                } else if mode == DecodeMode::Strict {
                    return Err(TokenizeError::UnmatchedOff {
                        pos,
                        program: p,
                        pitch: k,
                    });
                } else {
                    report.ignored_offs += 1;
                }
            }
            Token::Eos => {
                saw_eos = true;
                break;
            }
            Token::EndTie => {
                return Err(TokenizeError::Unexpected {
                    pos,
                    token,
                    reason: "second end-of-tie marker",
                })
            }
        }
    }
    if !saw_eos {
        return Err(TokenizeError::MissingEos);
    }
    if let Some(extra) = tokens.next() {
        let (pos, token) = extra?;
        return Err(TokenizeError::Unexpected {
            pos,
            token,
            reason: "tokens after EOS",
        });
    }
    for ((p, k), start) in active {
        notes.push(make(p, k, start, length));
    }
    notes.sort_by(Note::canonical_cmp);
    tied_order.sort_unstable();
    let sustained = tied_order
        .into_iter()
        .map(|(p, k)| make(p, k, -res, tied[&(p, k)].unwrap_or(length)))
        .collect();
    Ok((
        Window {
            offset: 0.0,
            length,
            notes,
            sustained,
        },
        report,
    ))
}

/// What `decode(encode(win))` returns for a window whose times lie on the
/// quantization grid: offset 0, velocities fixed, drum flags dropped, offsets
/// clipped to the window, tied onsets replaced by minus one step.
pub fn tokenizable_view(win: &Window, vocab: &Vocabulary) -> Window {
    let res = vocab.time_resolution(win.length);
    let normalize = |n: &Note| Note {
        velocity: DECODED_VELOCITY,
        is_drum: false,
        end: n.end.min(win.length),
        ..*n
    };
    let mut notes: Vec<Note> = win.notes.iter().map(normalize).collect();
    notes.sort_by(Note::canonical_cmp);
    let mut sustained: Vec<Note> = win
        .sustained
        .iter()
        .map(|n| Note {
            start: -res,
            ..normalize(n)
        })
        .collect();
    sustained.sort_by_key(|n| (n.program, n.pitch));
    sustained.dedup_by_key(|n| (n.program, n.pitch));
    Window {
        offset: 0.0,
        length: win.length,
        notes,
        sustained,
    }
}
