//! Letters and words shared by the whole pipeline.
//!
//! Transducers read words over `{a, b, i1, ..., in}`; everything downstream
//! of the binary coding (Z-transducers, defense systems, substitutions)
//! works over `{0, 1}`.

use std::fmt;
use thiserror::Error;

/// A letter of the transducer input alphabet: `a`, `b`, or an index
/// symbol `i1`, `i2`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    A,
    B,
    /// Index letter `i_alpha` with a 1-based index.
    Index(u32),
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::A => write!(f, "a"),
            Letter::B => write!(f, "b"),
            Letter::Index(i) => write!(f, "i{i}"),
        }
    }
}

/// A word over the transducer input alphabet.
pub type Word = Vec<Letter>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordParseError {
    #[error("unexpected character {0:?} in word (expected a, b, or iN)")]
    BadChar(char),
    #[error("index letter `i` must be followed by digits")]
    BareIndex,
    #[error("index 0 is not a letter (indices are 1-based)")]
    ZeroIndex,
}

/// Parses a word like `i1i2abb`. `-` denotes the empty word.
pub fn parse_word(s: &str) -> Result<Word, WordParseError> {
    let mut out = Vec::new();
    if s == "-" {
        return Ok(out);
    }
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            'a' => out.push(Letter::A),
            'b' => out.push(Letter::B),
            'i' => {
                let mut digits = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(*d);
                    chars.next();
                }
                if digits.is_empty() {
                    return Err(WordParseError::BareIndex);
                }
                let idx: u32 = digits.parse().map_err(|_| WordParseError::BareIndex)?;
                if idx == 0 {
                    return Err(WordParseError::ZeroIndex);
                }
                out.push(Letter::Index(idx));
            }
            other => return Err(WordParseError::BadChar(other)),
        }
    }
    Ok(out)
}

/// Formats a word; the empty word prints as `-`.
pub fn format_word(w: &[Letter]) -> String {
    if w.is_empty() {
        "-".to_string()
    } else {
        w.iter().map(|l| l.to_string()).collect()
    }
}

/// A binary symbol. Attack words, Z-transducer inputs and substitution
/// targets all live over `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub const BOTH: [Bit; 2] = [Bit::Zero, Bit::One];

    pub fn as_char(self) -> char {
        match self {
            Bit::Zero => '0',
            Bit::One => '1',
        }
    }

    pub fn index(self) -> usize {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn from_char(c: char) -> Option<Bit> {
        match c {
            '0' => Some(Bit::Zero),
            '1' => Some(Bit::One),
            _ => None,
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unexpected character {0:?} in binary word (expected 0 or 1)")]
pub struct BitParseError(pub char);

/// Parses a binary word like `0101`. `-` denotes the empty word.
pub fn parse_bits(s: &str) -> Result<Vec<Bit>, BitParseError> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|c| Bit::from_char(c).ok_or(BitParseError(c)))
        .collect()
}

/// Formats a binary word; the empty word prints as `-`.
pub fn format_bits(w: &[Bit]) -> String {
    if w.is_empty() {
        "-".to_string()
    } else {
        w.iter().map(|b| b.as_char()).collect()
    }
}
