use std::fmt;

use crate::error::{Error, Result};

/// A rearrangement of card positions.
///
/// The cycle `(i j ...)` moves the card at position `i` to position `j`, so
/// `(1 6 4)(2 5)` turns `(x1,x2,x3,x4,x5,x6)` into `(x4,x5,x3,x6,x2,x1)`.
/// Positions are 1-based in cycle notation and 0-based internally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    /// `image[i]` is the destination of the card currently at `i`.
    image: Vec<usize>,
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Permutation {
            image: (0..len).collect(),
        }
    }

    /// Builds a permutation from its 0-based image vector.
    pub fn from_image(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &dst in &image {
            if dst >= image.len() || seen[dst] {
                return Err(Error::domain(format!("{image:?} is not a bijection")));
            }
            seen[dst] = true;
        }
        Ok(Permutation { image })
    }

    /// Builds a permutation on `len` positions from disjoint 1-based cycles.
    pub fn from_cycles(len: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut image: Vec<usize> = (0..len).collect();
        let mut used = vec![false; len];
        for cycle in cycles {
            for &p in cycle {
                if p == 0 || p > len {
                    return Err(Error::domain(format!("position {p} outside 1..={len}")));
                }
                if used[p - 1] {
                    return Err(Error::domain(format!(
                        "position {p} appears in more than one place"
                    )));
                }
                used[p - 1] = true;
            }
            for (i, &p) in cycle.iter().enumerate() {
                let next = cycle[(i + 1) % cycle.len()];
                image[p - 1] = next - 1;
            }
        }
        Ok(Permutation { image })
    }

    /// Parses cycle notation such as `(1 6 4)(2 5)` or `id`.
    pub fn parse(text: &str, len: usize) -> Result<Self> {
        Self::from_cycles(len, &parse_cycles(text)?)
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// Destination (0-based) of the card at 0-based position `i`.
    pub fn apply_index(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &d)| i == d)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &d) in self.image.iter().enumerate() {
            inv[d] = i;
        }
        Permutation { image: inv }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Permutation) -> Self {
        assert_eq!(self.len(), next.len(), "permutation sizes differ");
        Permutation {
            image: self.image.iter().map(|&d| next.image[d]).collect(),
        }
    }

    pub fn pow(&self, exp: usize) -> Self {
        (0..exp).fold(Self::identity(self.len()), |acc, _| acc.then(self))
    }

    /// Applies this permutation to an arbitrary slice of items.
    pub fn permute<T: Clone>(&self, items: &[T]) -> Result<Vec<T>> {
        if items.len() != self.len() {
            return Err(Error::domain(format!(
                "permutation on {} positions applied to {} items",
                self.len(),
                items.len()
            )));
        }
        let mut out = items.to_vec();
        for (i, item) in items.iter().enumerate() {
            out[self.image[i]] = item.clone();
        }
        Ok(out)
    }

    /// Lifts a permutation of `slots.len()` local positions onto a row of
    /// `row_len` cards, where local position `i` is row position `slots[i]`
    /// (0-based). Positions outside `slots` stay fixed.
    pub fn embed(&self, slots: &[usize], row_len: usize) -> Result<Self> {
        if slots.len() != self.len() {
            return Err(Error::domain(format!(
                "embedding {} positions into {} slots",
                self.len(),
                slots.len()
            )));
        }
        let mut image: Vec<usize> = (0..row_len).collect();
        for (local, &slot) in slots.iter().enumerate() {
            if slot >= row_len {
                return Err(Error::domain(format!("slot {} outside row", slot + 1)));
            }
            image[slot] = slots[self.image[local]];
        }
        Permutation::from_image(image)
    }

    /// Left cyclic shift by `r` on `len` positions: `(1 k k-1 ... 2)^r`.
    pub fn left_shift(len: usize, r: usize) -> Self {
        if len == 0 {
            return Self::identity(0);
        }
        let r = r % len;
        Permutation {
            image: (0..len).map(|i| (i + len - r) % len).collect(),
        }
    }

    /// Right cyclic shift by `r`: `(1 2 ... k)^r`.
    pub fn right_shift(len: usize, r: usize) -> Self {
        Self::left_shift(len, r).inverse()
    }

    /// Disjoint cycles in canonical form (each starting at its smallest
    /// element, ordered by that element, fixed points omitted), 1-based.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] || self.image[start] == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                cycle.push(p + 1);
                p = self.image[p];
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("id");
        }
        for cycle in cycles {
            let body: Vec<String> = cycle.iter().map(ToString::to_string).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

/// Parses cycle notation into raw 1-based cycles without checking bounds.
pub fn parse_cycles(text: &str) -> Result<Vec<Vec<usize>>> {
    let text = text.trim();
    if text == "id" {
        return Ok(Vec::new());
    }
    let mut cycles = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix('(') else {
            return Err(Error::domain(format!("expected '(' in {text:?}")));
        };
        let Some(close) = body.find(')') else {
            return Err(Error::domain(format!("unclosed cycle in {text:?}")));
        };
        let cycle = body[..close]
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::domain(format!("bad position {tok:?} in {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if cycle.is_empty() {
            return Err(Error::domain(format!("empty cycle in {text:?}")));
        }
        cycles.push(cycle);
        rest = body[close + 1..].trim_start();
    }
    if cycles.is_empty() {
        return Err(Error::domain("empty cycle notation"));
    }
    Ok(cycles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_example_direction() {
        let p = Permutation::parse("(1 6 4)(2 5)", 6).unwrap();
        let xs = ["x1", "x2", "x3", "x4", "x5", "x6"];
        assert_eq!(
            p.permute(&xs).unwrap(),
            ["x4", "x5", "x3", "x6", "x2", "x1"]
        );
    }

    #[test]
    fn display_is_canonical() {
        let p = Permutation::parse("(5 2)(6 4 1)", 6).unwrap();
        assert_eq!(p.to_string(), "(1 6 4)(2 5)");
        assert_eq!(Permutation::identity(4).to_string(), "id");
    }

    #[test]
    fn rejects_malformed_cycles() {
        assert!(Permutation::parse("(1 2", 3).is_err());
        assert!(Permutation::parse("(1 4)", 3).is_err());
        assert!(Permutation::parse("(1 2)(2 3)", 3).is_err());
        assert!(Permutation::parse("1 2", 3).is_err());
        assert!(Permutation::parse("()", 3).is_err());
    }

    #[test]
    fn shifts() {
        let abc = ['A', 'B', 'C'];
        assert_eq!(
            Permutation::left_shift(3, 1).permute(&abc).unwrap(),
            ['B', 'C', 'A']
        );
        assert_eq!(
            Permutation::left_shift(3, 1),
            Permutation::parse("(1 3 2)", 3).unwrap()
        );
        assert_eq!(
            Permutation::right_shift(3, 1),
            Permutation::parse("(1 2 3)", 3).unwrap()
        );
        assert!(Permutation::left_shift(5, 5).is_identity());
    }

    #[test]
    fn embed_fixes_other_positions() {
        let swap = Permutation::parse("(1 2)", 2).unwrap();
        let lifted = swap.embed(&[1, 4], 6).unwrap();
        assert_eq!(lifted.to_string(), "(2 5)");
    }

    fn perm_strategy() -> impl Strategy<Value = Permutation> {
        (1usize..9).prop_flat_map(|n| {
            Just((0..n).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|v| Permutation::from_image(v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn inverse_composes_to_identity(p in perm_strategy()) {
            prop_assert!(p.then(&p.inverse()).is_identity());
            prop_assert!(p.inverse().then(&p).is_identity());
        }

        #[test]
        fn cycle_notation_round_trips(p in perm_strategy()) {
            let text = p.to_string();
            prop_assert_eq!(Permutation::parse(&text, p.len()).unwrap(), p);
        }

        #[test]
        fn left_shift_is_repeated_unit_shift(n in 1usize..10, r in 0usize..25) {
            prop_assert_eq!(Permutation::left_shift(n, r), Permutation::left_shift(n, 1).pow(r));
        }
    }
}
