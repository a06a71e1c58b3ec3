//! Ideal randomized actions: each one is a uniform choice from a finite set
//! of permutations, hidden from every party.

use std::fmt;

use serde::Serialize;

use crate::deck::Permutation;
use crate::error::{Error, Result};
use crate::prob::Prob;
use crate::protocol::Stmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShuffleKind {
    RandomCut,
    KSectionCut,
    PartialCut,
    /// An explicit permutation set.
    Shuffle,
}

impl ShuffleKind {
    pub fn name(self) -> &'static str {
        match self {
            ShuffleKind::RandomCut => "random_cut",
            ShuffleKind::KSectionCut => "k_section_cut",
            ShuffleKind::PartialCut => "partial_cut",
            ShuffleKind::Shuffle => "shuffle",
        }
    }
}

impl fmt::Display for ShuffleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A uniformly random permutation from a nonempty, deduplicated set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShuffleAction {
    kind: ShuffleKind,
    perms: Vec<Permutation>,
}

impl ShuffleAction {
    pub fn new(kind: ShuffleKind, perms: Vec<Permutation>) -> Result<Self> {
        let Some(first) = perms.first() else {
            return Err(Error::domain("a shuffle needs at least one permutation"));
        };
        let len = first.len();
        let mut unique: Vec<Permutation> = Vec::with_capacity(perms.len());
        for p in perms {
            if p.len() != len {
                return Err(Error::domain(
                    "shuffle permutations act on different lengths",
                ));
            }
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        Ok(ShuffleAction {
            kind,
            perms: unique,
        })
    }

    pub fn kind(&self) -> ShuffleKind {
        self.kind
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn len(&self) -> usize {
        self.perms[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of equally likely outcomes.
    pub fn size(&self) -> usize {
        self.perms.len()
    }

    pub fn choices(&self) -> impl Iterator<Item = RandomChoice> + '_ {
        let of = self.size();
        (0..of).map(move |index| RandomChoice { index, of })
    }

    /// Lifts the shuffle onto `slots` (0-based) of a row of `row_len` cards.
    pub fn embed(&self, slots: &[usize], row_len: usize) -> Result<Self> {
        let perms = self
            .perms
            .iter()
            .map(|p| p.embed(slots, row_len))
            .collect::<Result<Vec<_>>>()?;
        ShuffleAction::new(self.kind, perms)
    }
}

/// One hidden outcome of a shuffle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RandomChoice {
    pub index: usize,
    pub of: usize,
}

impl RandomChoice {
    pub fn probability(&self) -> Prob {
        Prob::reciprocal(self.of as u128)
    }
}

/// Uniform cyclic shift of `k` cards.
pub fn random_cut(k: usize) -> Result<ShuffleAction> {
    if k == 0 {
        return Err(Error::domain("a random cut needs at least one card"));
    }
    let perms = (0..k).map(|r| Permutation::left_shift(k, r)).collect();
    ShuffleAction::new(ShuffleKind::RandomCut, perms)
}

/// Uniform cyclic shift by whole blocks: `k` blocks of `m` cards.
pub fn k_section_cut(k: usize, m: usize) -> Result<ShuffleAction> {
    if k == 0 || m == 0 {
        return Err(Error::domain("a k-section cut needs k >= 1 and m >= 1"));
    }
    let perms = (0..k)
        .map(|r| Permutation::left_shift(k * m, r * m))
        .collect();
    ShuffleAction::new(ShuffleKind::KSectionCut, perms)
}

/// k-section cut on a row whose length must be a multiple of `k`.
pub fn k_section_cut_for(len: usize, k: usize) -> Result<ShuffleAction> {
    if k == 0 || !len.is_multiple_of(k) {
        return Err(Error::domain(format!(
            "{len} cards cannot be split into {k} equal sections"
        )));
    }
    k_section_cut(k, len / k)
}

/// Random cut applied only to the cards at `positions` (0-based), rotating
/// them in the listed order and fixing everything else.
pub fn partial_random_cut(len: usize, positions: &[usize]) -> Result<ShuffleAction> {
    if positions.len() < 2 {
        return Err(Error::domain(
            "a partial random cut needs at least two positions",
        ));
    }
    let mut seen = vec![false; len];
    for &p in positions {
        if p >= len {
            return Err(Error::domain(format!(
                "position {} outside 1..={len}",
                p + 1
            )));
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::domain(format!("position {} listed twice", p + 1)));
        }
    }
    let cut = random_cut(positions.len())?.embed(positions, len)?;
    ShuffleAction::new(ShuffleKind::PartialCut, cut.perms)
}

/// The random bit XOR gadget on `k` commitments laid out as
/// `(x1,y1,...,xk,yk)`: regroup to `(x1..xk,y1..yk)`, 2-section cut,
/// regroup back. Every bit ends up XORed with one hidden uniform bit.
pub fn random_bit_xor(k: usize) -> Result<Vec<Stmt>> {
    if k == 0 {
        return Err(Error::domain(
            "random bit XOR needs at least one commitment",
        ));
    }
    let gather = xor_gather(k);
    Ok(vec![
        Stmt::Perm(gather.clone()),
        Stmt::Shuffle(k_section_cut(2, k)?),
        Stmt::Perm(gather.inverse()),
    ])
}

/// Moves `x_i` (position `2i-1`) to `i` and `y_i` (position `2i`) to `k+i`.
fn xor_gather(k: usize) -> Permutation {
    let image = (0..2 * k)
        .map(|p| if p % 2 == 0 { p / 2 } else { k + p / 2 })
        .collect();
    Permutation::from_image(image).expect("gather is a bijection")
}

/// The direct form the XOR gadget is equivalent to:
/// `{id, (1 2)(3 4)...(2k-1 2k)}`.
pub fn xor_reference_shuffle(k: usize) -> Result<ShuffleAction> {
    let cycles: Vec<Vec<usize>> = (0..k).map(|i| vec![2 * i + 1, 2 * i + 2]).collect();
    ShuffleAction::new(
        ShuffleKind::Shuffle,
        vec![
            Permutation::identity(2 * k),
            Permutation::from_cycles(2 * k, &cycles)?,
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn outcomes(action: &ShuffleAction, items: &[usize]) -> BTreeMap<Vec<usize>, Prob> {
        let mut map = BTreeMap::new();
        for (p, c) in action.permutations().iter().zip(action.choices()) {
            *map.entry(p.permute(items).unwrap())
                .or_insert_with(Prob::zero) += &c.probability();
        }
        map
    }

    #[test]
    fn random_cut_sizes() {
        assert_eq!(random_cut(5).unwrap().size(), 5);
        let one = random_cut(1).unwrap();
        assert_eq!(one.size(), 1);
        assert!(one.permutations()[0].is_identity());
        let two = random_cut(2).unwrap();
        assert_eq!(two.permutations()[1].to_string(), "(1 2)");
        assert!(random_cut(0).is_err());
    }

    #[test]
    fn probabilities_sum_to_one() {
        for k in 1..8 {
            let total: Prob = random_cut(k)
                .unwrap()
                .choices()
                .map(|c| c.probability())
                .sum();
            assert_eq!(total, Prob::one());
        }
    }

    #[test]
    fn bisection_of_six() {
        let cut = k_section_cut(2, 3).unwrap();
        let got = outcomes(&cut, &[1, 2, 3, 4, 5, 6]);
        let keys: Vec<_> = got.keys().cloned().collect();
        assert_eq!(keys, vec![vec![1, 2, 3, 4, 5, 6], vec![4, 5, 6, 1, 2, 3]]);
        assert_eq!(k_section_cut(1, 4).unwrap().size(), 1);
        assert!(k_section_cut_for(7, 2).is_err());
    }

    #[test]
    fn k_section_with_unit_blocks_is_random_cut() {
        for k in 1..7 {
            assert_eq!(
                k_section_cut(k, 1).unwrap().permutations(),
                random_cut(k).unwrap().permutations()
            );
        }
    }

    #[test]
    fn partial_cut_example() {
        // positions 2, 5, 7 of seven cards
        let cut = partial_random_cut(7, &[1, 4, 6]).unwrap();
        assert_eq!(cut.size(), 3);
        let mut dest = Vec::new();
        for p in cut.permutations() {
            dest.push(p.apply_index(1) + 1);
            for fixed in [0, 2, 3, 5] {
                assert_eq!(p.apply_index(fixed), fixed);
            }
        }
        dest.sort();
        assert_eq!(dest, vec![2, 5, 7]);
    }

    #[test]
    fn partial_cut_edge_cases() {
        let full = partial_random_cut(4, &[0, 1, 2, 3]).unwrap();
        assert_eq!(full.permutations(), random_cut(4).unwrap().permutations());
        let pair = partial_random_cut(5, &[1, 3]).unwrap();
        let names: Vec<String> = pair.permutations().iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["id", "(2 4)"]);
        assert!(partial_random_cut(5, &[2]).is_err());
        assert!(partial_random_cut(5, &[2, 2]).is_err());
        assert!(partial_random_cut(5, &[2, 5]).is_err());
    }

    #[test]
    fn random_cut_closed_under_composition() {
        for k in 1..7 {
            let cut = random_cut(k).unwrap();
            let items: Vec<usize> = (0..k).collect();
            let mut twice: BTreeMap<Vec<usize>, Prob> = BTreeMap::new();
            for a in cut.permutations() {
                for b in cut.permutations() {
                    let p = Prob::reciprocal((k * k) as u128);
                    *twice
                        .entry(a.then(b).permute(&items).unwrap())
                        .or_insert_with(Prob::zero) += &p;
                }
            }
            assert_eq!(twice, outcomes(&cut, &items));
        }
    }

    #[test]
    fn dedups_permutations() {
        let id = Permutation::identity(3);
        let s = ShuffleAction::new(ShuffleKind::Shuffle, vec![id.clone(), id]).unwrap();
        assert_eq!(s.size(), 1);
        assert!(ShuffleAction::new(ShuffleKind::Shuffle, vec![]).is_err());
    }
}
