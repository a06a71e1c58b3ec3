use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{Domain, Input};
use crate::error::{Error, Result};

/// The function a protocol is supposed to compute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Conjunction of all inputs.
    And,
    /// 1 iff every input is equal.
    Equality,
    /// XOR of all input bits.
    Parity,
    /// `g(number of ones)`, table indexed by the sum.
    Symmetric(Vec<i64>),
    /// Explicit table over all inputs in lexicographic order.
    Table(Vec<i64>),
    /// Sum of the inputs modulo `k`.
    AddMod(u32),
    /// Sum of the inputs over the integers.
    Sum,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
        match self {
            Target::And => f.write_str("and"),
            Target::Equality => f.write_str("equality"),
            Target::Parity => f.write_str("xor"),
            Target::Symmetric(g) => write!(f, "sym {}", list(g)),
            Target::Table(t) => write!(f, "table {}", list(t)),
            Target::AddMod(k) => write!(f, "addmod {k}"),
            Target::Sum => f.write_str("sum"),
        }
    }
}

/// A target function over a concrete input domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSpec {
    target: Target,
    domain: Domain,
}

impl FunctionSpec {
    pub fn new(target: Target, domain: Domain) -> Result<Self> {
        match &target {
            Target::Symmetric(g) => {
                let Domain::Bits { n } = domain else {
                    return Err(Error::domain("symmetric tables need a bit domain"));
                };
                if g.len() != n + 1 {
                    return Err(Error::domain(format!(
                        "symmetric table for {n} bits needs {} entries, got {}",
                        n + 1,
                        g.len()
                    )));
                }
            }
            Target::Table(t) => {
                if t.len() != domain.size() {
                    return Err(Error::domain(format!(
                        "table needs {} entries, got {}",
                        domain.size(),
                        t.len()
                    )));
                }
            }
            Target::Parity => {
                if !matches!(domain, Domain::Bits { .. }) {
                    return Err(Error::domain("parity needs a bit domain"));
                }
            }
            Target::AddMod(0) => return Err(Error::domain("modulus must be positive")),
            _ => {}
        }
        Ok(FunctionSpec { target, domain })
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn eval(&self, input: &[u32]) -> i64 {
        match &self.target {
            Target::And => input.iter().all(|&v| v == 1) as i64,
            Target::Equality => input.windows(2).all(|w| w[0] == w[1]) as i64,
            Target::Parity => input.iter().fold(0, |acc, &v| acc ^ v) as i64,
            Target::Symmetric(g) => g[input.iter().sum::<u32>() as usize],
            Target::Table(t) => t[self.domain.index_of(input)],
            Target::AddMod(k) => (input.iter().sum::<u32>() % k) as i64,
            Target::Sum => input.iter().sum::<u32>() as i64,
        }
    }

    /// Exhaustively checks invariance under every permutation of the inputs
    /// (adjacent transpositions generate them all).
    pub fn is_symmetric(&self) -> bool {
        let n = self.domain.arity();
        self.domain.inputs().iter().all(|x| {
            let fx = self.eval(x);
            (0..n.saturating_sub(1)).all(|i| {
                let mut y = x.clone();
                y.swap(i, i + 1);
                self.eval(&y) == fx
            })
        })
    }

    /// Symmetric and invariant under complementing every bit.
    pub fn is_doubly_symmetric(&self) -> bool {
        if !matches!(self.domain, Domain::Bits { .. }) || !self.is_symmetric() {
            return false;
        }
        self.domain.inputs().iter().all(|x| {
            let complement: Input = x.iter().map(|b| 1 - b).collect();
            self.eval(x) == self.eval(&complement)
        })
    }

    /// For a symmetric function on bits, `g` with `f(a) = g(sum a)`.
    pub fn reduced(&self) -> Option<Vec<i64>> {
        let Domain::Bits { n } = self.domain else {
            return None;
        };
        if !self.is_symmetric() {
            return None;
        }
        Some(
            (0..=n)
                .map(|s| {
                    let x: Input = (0..n).map(|i| (i < s) as u32).collect();
                    self.eval(&x)
                })
                .collect(),
        )
    }
}

/// Groups `0..g.len()` by value: `P_b = {a : g(a) = b}`.
pub fn preimages(g: &[i64]) -> BTreeMap<i64, Vec<usize>> {
    let mut out: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (a, &b) in g.iter().enumerate() {
        out.entry(b).or_default().push(a);
    }
    out
}
