use std::fmt;

use serde::Serialize;

use super::{Card, CardSequence, Suit};
use crate::error::{Error, Result};

/// A bit committed as two face-down cards: `CH` is 0, `HC` is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Commitment {
    first: Suit,
}

impl Commitment {
    pub fn from_suits(first: Suit, second: Suit) -> Result<Self> {
        if first == second {
            return Err(Error::domain("a commitment needs two different suits"));
        }
        Ok(Commitment { first })
    }

    pub fn value(&self) -> u8 {
        match self.first {
            Suit::Club => 0,
            Suit::Heart => 1,
        }
    }

    pub fn suits(&self) -> [Suit; 2] {
        [self.first, self.first.other()]
    }

    pub fn cards(&self) -> [Card; 2] {
        self.suits().map(Card::face_down)
    }
}

pub fn encode_bit(bit: u8) -> Result<Commitment> {
    match bit {
        0 => Ok(Commitment { first: Suit::Club }),
        1 => Ok(Commitment { first: Suit::Heart }),
        _ => Err(Error::domain(format!("{bit} is not a bit"))),
    }
}

pub fn decode_bit(c: &Commitment) -> u8 {
    c.value()
}

/// Which suit marks the encoded value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// All hearts except a club at index `value`.
    Club,
    /// All clubs except a heart at index `value`.
    Heart,
}

impl Scheme {
    pub fn marker(self) -> Suit {
        match self {
            Scheme::Club => Suit::Club,
            Scheme::Heart => Suit::Heart,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Club => "club",
            Scheme::Heart => "heart",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An element of Z/kZ encoded as `k` cards with one off-suit marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntEncoding {
    pub scheme: Scheme,
    pub modulus: usize,
    pub value: usize,
}

impl IntEncoding {
    pub fn suits(&self) -> Vec<Suit> {
        let marker = self.scheme.marker();
        (0..self.modulus)
            .map(|i| {
                if i == self.value {
                    marker
                } else {
                    marker.other()
                }
            })
            .collect()
    }

    pub fn into_sequence(self) -> CardSequence {
        CardSequence::face_down(&self.suits()).expect("modulus is at least 2")
    }

    /// Reads an encoding back from suits; fails unless exactly one card
    /// carries the scheme's marker suit.
    pub fn decode(suits: &[Suit], scheme: Scheme) -> Result<Self> {
        let marker = scheme.marker();
        let mut hits = suits.iter().enumerate().filter(|(_, &s)| s == marker);
        match (hits.next(), hits.next()) {
            (Some((value, _)), None) if suits.len() >= 2 => Ok(IntEncoding {
                scheme,
                modulus: suits.len(),
                value,
            }),
            _ => Err(Error::domain(format!(
                "{} is not a {scheme}-scheme encoding",
                suits.iter().map(|s| s.letter()).collect::<String>()
            ))),
        }
    }
}

pub fn encode_int(value: usize, modulus: usize, scheme: Scheme) -> Result<IntEncoding> {
    if modulus < 2 {
        return Err(Error::domain(format!("modulus {modulus} is below 2")));
    }
    if value >= modulus {
        return Err(Error::domain(format!("{value} is not in Z/{modulus}Z")));
    }
    Ok(IntEncoding {
        scheme,
        modulus,
        value,
    })
}
