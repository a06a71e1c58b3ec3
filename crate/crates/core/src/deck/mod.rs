//! Cards, card rows and the deterministic actions on them.
//!
//! Positions on the external surface (cycle notation, reveal lists, reports)
//! are 1-based; the `usize` indices taken by methods here are 0-based.

mod encoding;
mod perm;

use std::fmt;

use serde::{Serialize, Serializer};

pub use encoding::{decode_bit, encode_bit, encode_int, Commitment, IntEncoding, Scheme};
pub use perm::{parse_cycles, Permutation};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suit {
    Club,
    Heart,
}

impl Suit {
    pub fn letter(self) -> char {
        match self {
            Suit::Club => 'C',
            Suit::Heart => 'H',
        }
    }

    pub fn from_letter(c: char) -> Option<Suit> {
        match c {
            'C' => Some(Suit::Club),
            'H' => Some(Suit::Heart),
            _ => None,
        }
    }

    pub fn other(self) -> Suit {
        match self {
            Suit::Club => Suit::Heart,
            Suit::Heart => Suit::Club,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    FaceDown,
    FaceUp,
}

/// A single card. The suit never changes; only the orientation does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Card {
    suit: Suit,
    pub orientation: Orientation,
}

impl Card {
    pub fn face_down(suit: Suit) -> Self {
        Card {
            suit,
            orientation: Orientation::FaceDown,
        }
    }

    pub fn face_up(suit: Suit) -> Self {
        Card {
            suit,
            orientation: Orientation::FaceUp,
        }
    }

    pub fn suit(&self) -> Suit {
        self.suit
    }

    pub fn is_face_up(&self) -> bool {
        self.orientation == Orientation::FaceUp
    }

    fn flipped(self) -> Self {
        let orientation = match self.orientation {
            Orientation::FaceDown => Orientation::FaceUp,
            Orientation::FaceUp => Orientation::FaceDown,
        };
        Card {
            orientation,
            ..self
        }
    }
}

/// An ordered row of cards.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CardSequence {
    cards: Vec<Card>,
}

impl CardSequence {
    pub fn new(cards: Vec<Card>) -> Result<Self> {
        if cards.is_empty() {
            return Err(Error::domain("a card sequence needs at least one card"));
        }
        Ok(CardSequence { cards })
    }

    /// Face-down row with the given suits.
    pub fn face_down(suits: &[Suit]) -> Result<Self> {
        Self::new(suits.iter().copied().map(Card::face_down).collect())
    }

    /// Parses a row written with `C`/`H`, all face-down.
    pub fn from_letters(text: &str) -> Result<Self> {
        let suits = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| Suit::from_letter(c).ok_or_else(|| Error::domain(format!("bad suit {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::face_down(&suits)
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn cards(&self) -> &[Card] {
        &self.cards
    }

    pub fn suits(&self) -> Vec<Suit> {
        self.cards.iter().map(Card::suit).collect()
    }

    /// Number of clubs and hearts in the row.
    pub fn suit_counts(&self) -> (usize, usize) {
        let clubs = self.cards.iter().filter(|c| c.suit == Suit::Club).count();
        (clubs, self.len() - clubs)
    }

    /// The hidden suits at `positions`, regardless of orientation.
    pub fn peek(&self, positions: &[usize]) -> Result<Vec<Suit>> {
        positions
            .iter()
            .map(|&p| self.card(p).map(|c| c.suit))
            .collect()
    }

    pub fn card(&self, position: usize) -> Result<&Card> {
        self.cards.get(position).ok_or_else(|| {
            Error::domain(format!(
                "position {} outside a row of {} cards",
                position + 1,
                self.len()
            ))
        })
    }

    pub fn apply_perm(&self, perm: &Permutation) -> Result<Self> {
        Ok(CardSequence {
            cards: perm.permute(&self.cards)?,
        })
    }

    pub fn left_shift(&self, r: usize) -> Self {
        self.apply_perm(&Permutation::left_shift(self.len(), r))
            .expect("shift has the row's length")
    }

    pub fn right_shift(&self, r: usize) -> Self {
        self.apply_perm(&Permutation::right_shift(self.len(), r))
            .expect("shift has the row's length")
    }

    /// Flips the cards at `positions`. Cards turning face-up are recorded in
    /// the returned observation, in the order given.
    pub fn turn_over(&self, positions: &[usize]) -> Result<(Self, Observation)> {
        let mut cards = self.cards.clone();
        let mut seen_pos = Vec::new();
        let mut seen_suits = Vec::new();
        let mut touched = vec![false; cards.len()];
        for &p in positions {
            self.card(p)?;
            if std::mem::replace(&mut touched[p], true) {
                return Err(Error::domain(format!("position {} turned twice", p + 1)));
            }
            let card = cards[p].flipped();
            if card.is_face_up() {
                seen_pos.push(p);
                seen_suits.push(card.suit);
            }
            cards[p] = card;
        }
        Ok((
            CardSequence { cards },
            Observation::new(seen_pos, seen_suits),
        ))
    }

    /// Renders the row as the public sees it: `?` for face-down cards.
    pub fn public_view(&self) -> String {
        self.cards
            .iter()
            .map(|c| if c.is_face_up() { c.suit.letter() } else { '?' })
            .collect()
    }

    /// Renders the row with hidden suits shown in lower case.
    pub fn peek_view(&self) -> String {
        self.cards
            .iter()
            .map(|c| {
                let l = c.suit.letter();
                if c.is_face_up() {
                    l
                } else {
                    l.to_ascii_lowercase()
                }
            })
            .collect()
    }
}

impl fmt::Display for CardSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.public_view())
    }
}

/// The suits seen when cards are turned face-up, with their positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Observation {
    positions: Vec<usize>,
    suits: Vec<Suit>,
}

impl Observation {
    pub fn new(positions: Vec<usize>, suits: Vec<Suit>) -> Self {
        debug_assert_eq!(positions.len(), suits.len());
        Observation { positions, suits }
    }

    /// 0-based positions.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn suits(&self) -> &[Suit] {
        &self.suits
    }

    pub fn suit_string(&self) -> String {
        self.suits.iter().map(|s| s.letter()).collect()
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pos: Vec<String> = self.positions.iter().map(|p| (p + 1).to_string()).collect();
        write!(f, "{}={}", pos.join(","), self.suit_string())
    }
}

impl Serialize for Observation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn turn_over_reveals_in_order() {
        let seq = CardSequence::from_letters("CH").unwrap();
        let (up, obs) = seq.turn_over(&[0, 1]).unwrap();
        assert_eq!(obs.suit_string(), "CH");
        assert_eq!(up.public_view(), "CH");
        let (down, obs2) = up.turn_over(&[0, 1]).unwrap();
        assert_eq!(down, seq);
        assert!(obs2.suits().is_empty());
    }

    #[test]
    fn turn_over_rejects_bad_positions() {
        let seq = CardSequence::from_letters("CHC").unwrap();
        assert!(seq.turn_over(&[3]).is_err());
        assert!(seq.turn_over(&[1, 1]).is_err());
    }

    #[test]
    fn club_scheme_reveal() {
        let seq = encode_int(1, 3, Scheme::Club).unwrap().into_sequence();
        let (_, obs) = seq.turn_over(&[0, 1, 2]).unwrap();
        assert_eq!(obs.suit_string(), "HCH");
    }

    #[test]
    fn views() {
        let seq = CardSequence::from_letters("CHH").unwrap();
        let (seq, _) = seq.turn_over(&[1]).unwrap();
        assert_eq!(seq.public_view(), "?H?");
        assert_eq!(seq.peek_view(), "cHh");
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let seq = CardSequence::from_letters("CHC").unwrap();
        assert!(seq.apply_perm(&Permutation::identity(4)).is_err());
    }

    fn row() -> impl Strategy<Value = CardSequence> {
        prop::collection::vec(prop::bool::ANY, 1..10).prop_map(|bits| {
            let suits: Vec<Suit> = bits
                .into_iter()
                .map(|b| if b { Suit::Heart } else { Suit::Club })
                .collect();
            CardSequence::face_down(&suits).unwrap()
        })
    }

    proptest! {
        #[test]
        fn actions_conserve_suits(seq in row(), r in 0usize..20, seed in any::<u64>()) {
            let n = seq.len();
            let mut image: Vec<usize> = (0..n).collect();
            // cheap deterministic shuffle from the seed
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                image.swap(i, (s >> 33) as usize % (i + 1));
            }
            let perm = Permutation::from_image(image).unwrap();
            let counts = seq.suit_counts();
            prop_assert_eq!(seq.apply_perm(&perm).unwrap().suit_counts(), counts);
            prop_assert_eq!(seq.left_shift(r).suit_counts(), counts);
            let all: Vec<usize> = (0..n).collect();
            prop_assert_eq!(seq.turn_over(&all).unwrap().0.suit_counts(), counts);
            prop_assert_eq!(seq.apply_perm(&perm).unwrap().apply_perm(&perm.inverse()).unwrap(), seq.clone());
            prop_assert_eq!(seq.left_shift(r).right_shift(r), seq);
        }
    }
}
