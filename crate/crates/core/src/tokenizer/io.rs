//! Binary and text serialization of token streams.
//!
//! Binary layout, little-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 0..4  | magic `MTOK` |
//! | 4..6  | format version (u16) |
//! | 6..8  | vocabulary size (u16) |
//! | 8..12 | window length in milliseconds (u32) |
//! | 12..16 | token count (u32) |
//! | 16..  | token IDs (u16 each) |

use std::fmt::Write as _;

use super::{Token, TokenStream, Vocabulary};

pub const STREAM_MAGIC: [u8; 4] = *b"MTOK";
pub const STREAM_VERSION: u16 = 1;
const HEADER_LEN: usize = 16;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StreamFormatError {
    #[error("token file shorter than its {HEADER_LEN}-byte header")]
    ShortHeader,
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported token file version {0}")]
    Version(u16),
    #[error("vocabulary size mismatch: file has {file}, expected {expected}")]
    VocabMismatch { file: u16, expected: u16 },
    #[error("header declares {declared} tokens but body holds {actual}")]
    Length { declared: usize, actual: usize },
    #[error("token id {0} out of vocabulary range")]
    IdOutOfRange(u16),
    #[error("cannot parse token {0:?}")]
    BadText(String),
}

impl TokenStream {
    pub fn to_bytes(&self, vocab: &Vocabulary) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 2 * self.tokens.len());
        out.extend_from_slice(&STREAM_MAGIC);
        out.extend_from_slice(&STREAM_VERSION.to_le_bytes());
        out.extend_from_slice(&vocab.total_size.to_le_bytes());
        let ms = (self.window_length * 1000.0).round() as u32;
        out.extend_from_slice(&ms.to_le_bytes());
        out.extend_from_slice(&(self.tokens.len() as u32).to_le_bytes());
        for t in &self.tokens {
            out.extend_from_slice(&t.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], vocab: &Vocabulary) -> Result<Self, StreamFormatError> {
        if bytes.len() < HEADER_LEN {
            return Err(StreamFormatError::ShortHeader);
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != STREAM_MAGIC {
            return Err(StreamFormatError::BadMagic(magic));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != STREAM_VERSION {
            return Err(StreamFormatError::Version(version));
        }
        let size = u16::from_le_bytes([bytes[6], bytes[7]]);
        if size != vocab.total_size {
            return Err(StreamFormatError::VocabMismatch {
                file: size,
                expected: vocab.total_size,
            });
        }
        let ms = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        let count = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let body = &bytes[HEADER_LEN..];
        if body.len() != 2 * count {
            return Err(StreamFormatError::Length {
                declared: count,
                actual: body.len() / 2,
            });
        }
        let tokens = body
            .chunks_exact(2)
            .map(|c| {
                let id = u16::from_le_bytes([c[0], c[1]]);
                if id < vocab.total_size {
                    Ok(id)
                } else {
                    Err(StreamFormatError::IdOutOfRange(id))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            tokens,
            window_length: f64::from(ms) / 1000.0,
        })
    }

    /// Debug dump: a header comment, then one line per time group.
    pub fn to_text(&self, vocab: &Vocabulary) -> String {
        let mut out = format!("# window_length={}\n", self.window_length);
        let mut line = String::new();
        for &id in &self.tokens {
            let token = vocab.token(id);
            if matches!(token, Some(Token::Time(_)) | Some(Token::Eos)) && !line.is_empty() {
                out.push_str(line.trim_end());
                out.push('\n');
                line.clear();
            }
            match token {
                Some(t) => write!(line, "{t} ").unwrap(),
                None => write!(line, "?{id} ").unwrap(),
            }
            if token == Some(Token::EndTie) {
                out.push_str(line.trim_end());
                out.push('\n');
                line.clear();
            }
        }
        if !line.is_empty() {
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, vocab: &Vocabulary) -> Result<Self, StreamFormatError> {
        let mut window_length = 10.0;
        let mut tokens = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.trim().strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("window_length=") {
                    window_length = v
                        .parse()
                        .map_err(|_| StreamFormatError::BadText(line.to_string()))?;
                }
                continue;
            }
            for word in line.split_whitespace() {
                tokens.push(vocab.id(parse_token(word)?));
            }
        }
        Ok(Self {
            tokens,
            window_length,
        })
    }
}

fn parse_token(word: &str) -> Result<Token, StreamFormatError> {
    let bad = || StreamFormatError::BadText(word.to_string());
    let arg = |prefix: &str| -> Option<&str> { word.strip_prefix(prefix)?.strip_suffix(')') };
    Ok(match word {
        "On" => Token::On,
        "Off" => Token::Off,
        "EndTieSection" => Token::EndTie,
        "EOS" => Token::Eos,
        _ => {
            if let Some(a) = arg("Instrument(") {
                Token::Instrument(a.parse::<u8>().ok().filter(|v| *v < 128).ok_or_else(bad)?)
            } else if let Some(a) = arg("Note(") {
                Token::Note(a.parse::<u8>().ok().filter(|v| *v < 128).ok_or_else(bad)?)
            } else if let Some(a) = arg("Time(") {
                Token::Time(a.parse::<u16>().ok().filter(|v| *v < super::TIME_VALUES).ok_or_else(bad)?)
            } else {
                return Err(bad());
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::note::{Note, Window};
    use crate::tokenizer::encode;

    fn sample() -> TokenStream {
        let w = Window {
            offset: 0.0,
            length: 10.0,
            notes: vec![Note::new(60, 90, 0.0, 1.0, 0), Note::new(67, 90, 0.5, 3.0, 41)],
            sustained: vec![Note::new(55, 90, -1.0, 2.0, 0)],
        };
        encode(&w, &Vocabulary::standard()).unwrap()
    }

    #[test]
    fn binary_header_layout() {
        let v = Vocabulary::standard();
        let s = sample();
        let bytes = s.to_bytes(&v);
        assert_eq!(&bytes[0..4], b"MTOK");
        assert_eq!(u16::from_le_bytes([bytes[6], bytes[7]]), 772);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 10_000);
        assert_eq!(bytes.len(), 16 + 2 * s.len());
        assert_eq!(TokenStream::from_bytes(&bytes, &v).unwrap(), s);
    }

    #[test]
    fn binary_rejects_corruption() {
        let v = Vocabulary::standard();
        let bytes = sample().to_bytes(&v);
        assert_eq!(TokenStream::from_bytes(&bytes[..10], &v), Err(StreamFormatError::ShortHeader));
        let mut b = bytes.clone();
        b[0] = b'X';
        assert!(matches!(TokenStream::from_bytes(&b, &v), Err(StreamFormatError::BadMagic(_))));
        let mut b = bytes.clone();
        b.pop();
        assert!(matches!(TokenStream::from_bytes(&b, &v), Err(StreamFormatError::Length { .. })));
        let mut b = bytes.clone();
        b[16] = 0xff;
        b[17] = 0xff;
        assert_eq!(TokenStream::from_bytes(&b, &v), Err(StreamFormatError::IdOutOfRange(0xffff)));
    }

    #[test]
    fn text_dump_parses_back() {
        let v = Vocabulary::standard();
        let s = sample();
        let text = s.to_text(&v);
        assert!(text.contains("Instrument(0) Note(55) EndTieSection"));
        assert_eq!(TokenStream::from_text(&text, &v).unwrap(), s);
        assert!(TokenStream::from_text("Time(600)", &v).is_err());
    }
}
