use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::protocol::{Protocol, Stmt};
use crate::shuffle::ShuffleKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KindCount {
    pub min: usize,
    pub max: usize,
}

/// Cards dealt and shuffles executed along root-to-leaf paths of the
/// decision tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceCount {
    pub cards: usize,
    pub clubs: usize,
    pub hearts: usize,
    /// Shuffles on the longest path.
    pub shuffles: usize,
    pub shuffles_min: usize,
    pub shuffles_max: usize,
    /// Every path executes the same number of shuffles.
    pub uniform: bool,
    pub by_kind: BTreeMap<String, KindCount>,
}

#[derive(Debug, Clone, Default)]
struct Span {
    total: (usize, usize),
    kinds: BTreeMap<ShuffleKind, (usize, usize)>,
}

impl Span {
    fn add(&mut self, kind: ShuffleKind) {
        self.total.0 += 1;
        self.total.1 += 1;
        let e = self.kinds.entry(kind).or_insert((0, 0));
        e.0 += 1;
        e.1 += 1;
    }

    /// Paths through either `self` or `other`.
    fn either(&self, other: &Span) -> Span {
        let mut kinds = BTreeMap::new();
        for k in self.kinds.keys().chain(other.kinds.keys()) {
            let a = self.kinds.get(k).copied().unwrap_or((0, 0));
            let b = other.kinds.get(k).copied().unwrap_or((0, 0));
            kinds.insert(*k, (a.0.min(b.0), a.1.max(b.1)));
        }
        Span {
            total: (
                self.total.0.min(other.total.0),
                self.total.1.max(other.total.1),
            ),
            kinds,
        }
    }
}

/// Shuffle counts of the paths that run `block` and then `after`.
fn span(block: &[Stmt], after: Span) -> Span {
    let mut acc = after;
    for stmt in block.iter().rev() {
        match stmt {
            Stmt::Shuffle(s) => acc.add(s.kind()),
            Stmt::Output(_) => acc = Span::default(),
            Stmt::Reveal(r) if !r.arms.is_empty() => {
                let mut arms = r.arms.iter().map(|a| span(&a.body, acc.clone()));
                let first = arms.next().expect("non-empty arms");
                acc = arms.fold(first, |x, y| x.either(&y));
            }
            _ => {}
        }
    }
    acc
}

/// Counts cards and shuffles without running the protocol.
pub fn count_resources(protocol: &Protocol) -> Result<ResourceCount> {
    let first = protocol.domain().inputs().swap_remove(0);
    let (clubs, hearts) = protocol.initial_row(&first)?.suit_counts();
    let s = span(protocol.body(), Span::default());
    Ok(ResourceCount {
        cards: protocol.card_count(),
        clubs,
        hearts,
        shuffles: s.total.1,
        shuffles_min: s.total.0,
        shuffles_max: s.total.1,
        uniform: s.total.0 == s.total.1,
        by_kind: s
            .kinds
            .into_iter()
            .map(|(k, (min, max))| (k.name().to_string(), KindCount { min, max }))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{equality_first, equality_second, five_card_trick, k_candidate_equality};

    #[test]
    fn five_card_trick_counts() {
        let r = count_resources(&five_card_trick().unwrap()).unwrap();
        assert_eq!((r.cards, r.clubs, r.hearts, r.shuffles), (5, 3, 2, 1));
        assert!(r.uniform);
        assert_eq!(r.by_kind["random_cut"], KindCount { min: 1, max: 1 });
    }

    #[test]
    fn equality_families() {
        for n in 2..=6 {
            let r = count_resources(&equality_first(n).unwrap()).unwrap();
            assert_eq!((r.cards, r.shuffles), (2 * n, n));
            assert!(r.uniform);
            let r = count_resources(&equality_second(n).unwrap()).unwrap();
            assert_eq!((r.cards, r.shuffles), (2 * n, n - 1));
        }
        let r = count_resources(&k_candidate_equality(3, 4).unwrap()).unwrap();
        assert_eq!((r.cards, r.shuffles), (12, 5));
    }
}
