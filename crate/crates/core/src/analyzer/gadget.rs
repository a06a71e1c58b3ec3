use std::collections::{BTreeMap, BTreeSet};

use crate::deck::Permutation;
use crate::error::{Error, Result};
use crate::prob::Prob;
use crate::protocol::{Protocol, Stmt};
use crate::shuffle::ShuffleAction;

/// Distribution of the net permutation a straight-line fragment of perms
/// and shuffles applies to `len` cards, keyed by cycle notation.
pub fn fragment_distribution(fragment: &[Stmt], len: usize) -> Result<BTreeMap<String, Prob>> {
    let mut states: Vec<(Permutation, Prob)> = vec![(Permutation::identity(len), Prob::one())];
    for stmt in fragment {
        states = match stmt {
            Stmt::Perm(p) => states.into_iter().map(|(q, w)| (q.then(p), w)).collect(),
            Stmt::Shuffle(s) => {
                let each = s
                    .choices()
                    .next()
                    .map(|c| c.probability())
                    .unwrap_or_else(Prob::one);
                states
                    .into_iter()
                    .flat_map(|(q, w)| {
                        let each = each.clone();
                        s.permutations()
                            .iter()
                            .map(move |p| (q.then(p), w.clone() * each.clone()))
                    })
                    .collect()
            }
            other => {
                return Err(Error::domain(format!(
                    "a gadget holds only perms and shuffles, got {other}"
                )))
            }
        };
    }
    let mut out: BTreeMap<String, Prob> = BTreeMap::new();
    for (p, w) in states {
        if p.len() != len {
            return Err(Error::domain("fragment acts on the wrong number of cards"));
        }
        *out.entry(p.to_string()).or_insert_with(Prob::zero) += w;
    }
    Ok(out)
}

/// Distribution of a single shuffle, in the same form.
pub fn action_distribution(action: &ShuffleAction) -> BTreeMap<String, Prob> {
    fragment_distribution(&[Stmt::Shuffle(action.clone())], action.len())
        .expect("a lone shuffle is a valid fragment")
}

/// The distinct cyclic-rotation classes of the row just before the first
/// shuffle, over every input. Each class is named by its smallest rotation.
pub fn precut_rotation_classes(protocol: &Protocol) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for x in protocol.domain().inputs() {
        let letters: String = protocol
            .pre_shuffle_row(&x)?
            .suits()
            .iter()
            .map(|s| s.letter())
            .collect();
        let doubled = format!("{letters}{letters}");
        let n = letters.len();
        let canon = (0..n).map(|r| &doubled[r..r + n]).min().unwrap_or("");
        out.insert(canon.to_string());
    }
    Ok(out)
}
