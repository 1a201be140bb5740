use std::fmt;

pub const INSTRUMENT_VALUES: u16 = 128;
pub const NOTE_VALUES: u16 = 128;
pub const ONOFF_VALUES: u16 = 2;
pub const TIME_VALUES: u16 = 512;

/// Decoded form of a token ID.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Instrument(u8),
    Note(u8),
    On,
    Off,
    Time(u16),
    EndTie,
    Eos,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Instrument(p) => write!(f, "Instrument({p})"),
            Token::Note(k) => write!(f, "Note({k})"),
            Token::On => f.write_str("On"),
            Token::Off => f.write_str("Off"),
            Token::Time(t) => write!(f, "Time({t})"),
            Token::EndTie => f.write_str("EndTieSection"),
            Token::Eos => f.write_str("EOS"),
        }
    }
}

/// Token-ID layout: Instrument, Note, On/Off, Time, End Tie Section, EOS,
/// as contiguous disjoint ranges in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vocabulary {
    pub instrument_offset: u16,
    pub note_offset: u16,
    pub onoff_offset: u16,
    pub time_offset: u16,
    pub end_tie_id: u16,
    pub eos_id: u16,
    pub total_size: u16,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::standard()
    }
}

impl Vocabulary {
    pub const fn standard() -> Self {
        let instrument_offset = 0;
        let note_offset = instrument_offset + INSTRUMENT_VALUES;
        let onoff_offset = note_offset + NOTE_VALUES;
        let time_offset = onoff_offset + ONOFF_VALUES;
        let end_tie_id = time_offset + TIME_VALUES;
        let eos_id = end_tie_id + 1;
        Self {
            instrument_offset,
            note_offset,
            onoff_offset,
            time_offset,
            end_tie_id,
            eos_id,
            total_size: eos_id + 1,
        }
    }

    pub const fn time_steps(&self) -> u16 {
        TIME_VALUES
    }

    /// Seconds per Time step for a window of the given length.
    pub fn time_resolution(&self, window_length: f64) -> f64 {
        window_length / f64::from(self.time_steps())
    }

    pub fn id(&self, token: Token) -> u16 {
        match token {
            Token::Instrument(p) => self.instrument_offset + u16::from(p.min(127)),
            Token::Note(k) => self.note_offset + u16::from(k.min(127)),
            Token::Off => self.onoff_offset,
            Token::On => self.onoff_offset + 1,
            Token::Time(t) => self.time_offset + t.min(TIME_VALUES - 1),
            Token::EndTie => self.end_tie_id,
            Token::Eos => self.eos_id,
        }
    }

    pub fn token(&self, id: u16) -> Option<Token> {
        let t = if id < self.note_offset {
            Token::Instrument((id - self.instrument_offset) as u8)
        } else if id < self.onoff_offset {
            Token::Note((id - self.note_offset) as u8)
        } else if id < self.time_offset {
            if id == self.onoff_offset {
                Token::Off
            } else {
                Token::On
            }
        } else if id < self.end_tie_id {
            Token::Time(id - self.time_offset)
        } else if id == self.end_tie_id {
            Token::EndTie
        } else if id == self.eos_id {
            Token::Eos
        } else {
            return None;
        };
        Some(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_sizes() {
        let v = Vocabulary::standard();
        assert_eq!(v.total_size, 772);
        assert_eq!(v.note_offset, 128);
        assert_eq!(v.onoff_offset, 256);
        assert_eq!(v.time_offset, 258);
        assert_eq!(v.end_tie_id, 770);
        assert_eq!(v.eos_id, 771);
    }

    #[test]
    fn every_id_maps_back() {
        let v = Vocabulary::standard();
        for id in 0..v.total_size {
            let t = v.token(id).unwrap();
            assert_eq!(v.id(t), id);
        }
        assert!(v.token(v.total_size).is_none());
    }
}
