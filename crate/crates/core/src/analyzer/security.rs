use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use serde::Serialize;

use super::{class_of, has_public_output, per_input, walk, Options, TraceKey};
use crate::error::Result;
use crate::prob::Prob;
use crate::protocol::{Input, Protocol, StepBudget};

/// Probability of each visible trace for one input.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceDistribution(BTreeMap<TraceKey, Prob>);

impl TraceDistribution {
    pub fn of(protocol: &Protocol, input: &[u32], budget: &mut StepBudget) -> Result<Self> {
        protocol.domain().check(input)?;
        let mut map: BTreeMap<TraceKey, Prob> = BTreeMap::new();
        walk(
            protocol,
            input,
            budget,
            None,
            &mut |_| {},
            &mut |cursor, _| {
                let p = Prob::reciprocal(cursor.denominator());
                match map.entry(TraceKey::new(cursor.trace())) {
                    Entry::Occupied(mut e) => *e.get_mut() += p,
                    Entry::Vacant(e) => {
                        e.insert(p);
                    }
                }
            },
        )?;
        Ok(TraceDistribution(map))
    }

    pub fn probability(&self, trace: &TraceKey) -> Prob {
        self.0.get(trace).cloned().unwrap_or_else(Prob::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TraceKey, &Prob)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> Prob {
        self.0.values().cloned().sum()
    }

    /// The smallest trace whose probability differs between the two.
    pub fn first_difference(&self, other: &TraceDistribution) -> Option<TraceKey> {
        let mut a = self.0.iter().peekable();
        let mut b = other.0.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return None,
                (Some((ka, _)), None) => return Some((*ka).clone()),
                (None, Some((kb, _))) => return Some((*kb).clone()),
                (Some((ka, pa)), Some((kb, pb))) => match ka.cmp(kb) {
                    std::cmp::Ordering::Less => return Some((*ka).clone()),
                    std::cmp::Ordering::Greater => return Some((*kb).clone()),
                    std::cmp::Ordering::Equal => {
                        if pa != pb {
                            return Some((*ka).clone());
                        }
                        a.next();
                        b.next();
                    }
                },
            }
        }
    }
}

/// Two inputs with the same public output but different trace distributions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// The shared output, or `None` when the output is hidden.
    pub output: Option<i64>,
    pub inputs: [Input; 2],
    pub trace: TraceKey,
    pub probabilities: [Prob; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SecurityReport {
    pub pass: bool,
    /// Groups of inputs whose traces must be indistinguishable.
    pub classes: usize,
    /// Inputs compared against their group's first input.
    pub comparisons: usize,
    pub violations: Vec<Violation>,
}

/// Checks that inputs with the same public output induce the same trace
/// distribution. When no leaf outputs a public value, all inputs form one
/// group.
pub fn verify_security(protocol: &Protocol, opts: &Options) -> Result<SecurityReport> {
    let public = has_public_output(protocol);
    let inputs = protocol.domain().inputs();
    let mut refs: BTreeMap<Option<i64>, Input> = BTreeMap::new();
    for x in &inputs {
        refs.entry(class_of(protocol, public, x))
            .or_insert_with(|| x.clone());
    }
    let ref_inputs: Vec<Input> = refs.values().cloned().collect();
    let mut ref_dists = BTreeMap::new();
    for r in opts.par_map(&ref_inputs, |x| {
        TraceDistribution::of(protocol, x, &mut StepBudget::new(opts.budget))
    })? {
        let d = r?;
        let x = &ref_inputs[ref_dists.len()];
        ref_dists.insert(class_of(protocol, public, x), (x.clone(), d));
    }

    let compared = per_input(protocol, opts, |x, budget| {
        let class = class_of(protocol, public, x);
        let (rx, rd) = &ref_dists[&class];
        if rx == x {
            return Ok(None);
        }
        let d = TraceDistribution::of(protocol, x, budget)?;
        Ok(rd.first_difference(&d).map(|trace| Violation {
            output: class,
            inputs: [rx.clone(), x.clone()],
            probabilities: [rd.probability(&trace), d.probability(&trace)],
            trace,
        }))
    })?;

    let violations: Vec<Violation> = compared.into_iter().filter_map(|(_, v)| v).collect();
    Ok(SecurityReport {
        pass: violations.is_empty(),
        classes: refs.len(),
        comparisons: inputs.len() - refs.len(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{equality_first_sabotaged, five_card_trick, six_card_trick, Sabotage};

    #[test]
    fn five_card_trick_zero_inputs_look_alike() {
        let p = five_card_trick().unwrap();
        let dists: Vec<TraceDistribution> = [[0, 0], [0, 1], [1, 0]]
            .iter()
            .map(|x| TraceDistribution::of(&p, x, &mut StepBudget::new(1000)).unwrap())
            .collect();
        assert_eq!(dists[0].len(), 5);
        assert_eq!(dists[0].total(), Prob::one());
        assert_eq!(dists[0], dists[1]);
        assert_eq!(dists[1], dists[2]);
        let r = verify_security(&p, &Options::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.classes, 2);
        assert_eq!(r.comparisons, 2);
    }

    #[test]
    fn six_card_trick_is_secure() {
        let p = six_card_trick().unwrap();
        assert!(verify_security(&p, &Options::default()).unwrap().pass);
    }

    #[test]
    fn early_reveal_leaks() {
        let p = equality_first_sabotaged(3, Sabotage::EarlyReveal).unwrap();
        let r = verify_security(&p, &Options::default()).unwrap();
        assert!(!r.pass);
        let v = &r.violations[0];
        assert_ne!(v.probabilities[0], v.probabilities[1]);
    }

    #[test]
    fn difference_is_symmetric() {
        let p = equality_first_sabotaged(3, Sabotage::NoFinalCut).unwrap();
        let mut b = StepBudget::new(100_000);
        let a = TraceDistribution::of(&p, &[0, 0, 1], &mut b).unwrap();
        let c = TraceDistribution::of(&p, &[0, 1, 1], &mut b).unwrap();
        let t = a.first_difference(&c).unwrap();
        assert_eq!(c.first_difference(&a), Some(t.clone()));
        assert_ne!(a.probability(&t), c.probability(&t));
    }
}
