//! Protocols as decision trees over card actions.
//!
//! A protocol body is a block of statements. A reveal may carry branch arms
//! keyed on the suits it shows; an arm either ends in an output or falls
//! through to the statements after the reveal.

mod build;
pub mod builtins;
mod exec;
mod function;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

pub use builtins::{
    add_mod_k, and_gate, builtin, doubly_symmetric, equality_first, equality_first_sabotaged,
    equality_second, five_card_trick, k_candidate_equality, mizuki_sone_sandwich, six_card_trick,
    sum_first_k, symmetric_plus_two, BuiltinParams, Sabotage,
};
pub use exec::{Cursor, Event, Next, StepBudget};
pub use function::{preimages, FunctionSpec, Target};

use crate::deck::{CardSequence, Permutation, Scheme, Suit};
use crate::error::{Error, Result};
use crate::shuffle::ShuffleAction;

/// One player's private value per coordinate.
pub type Input = Vec<u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// `n` bits.
    Bits { n: usize },
    /// `n` elements of Z/kZ.
    Modular { n: usize, k: usize },
}

impl Domain {
    pub fn arity(&self) -> usize {
        match *self {
            Domain::Bits { n } | Domain::Modular { n, .. } => n,
        }
    }

    pub fn radix(&self) -> usize {
        match *self {
            Domain::Bits { .. } => 2,
            Domain::Modular { k, .. } => k,
        }
    }

    pub fn size(&self) -> usize {
        self.radix().pow(self.arity() as u32)
    }

    /// Every input in lexicographic order.
    pub fn inputs(&self) -> Vec<Input> {
        let (n, r) = (self.arity(), self.radix() as u32);
        let mut out = Vec::with_capacity(self.size());
        let mut cur = vec![0u32; n];
        loop {
            out.push(cur.clone());
            let mut i = n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < r {
                    break;
                }
                cur[i] = 0;
            }
        }
    }

    pub fn index_of(&self, input: &[u32]) -> usize {
        let r = self.radix();
        input.iter().fold(0, |acc, &v| acc * r + v as usize)
    }

    pub fn check(&self, input: &[u32]) -> Result<()> {
        if input.len() != self.arity() {
            return Err(Error::domain(format!(
                "expected {} inputs, got {}",
                self.arity(),
                input.len()
            )));
        }
        if let Some(bad) = input.iter().find(|&&v| v as usize >= self.radix()) {
            return Err(Error::domain(format!(
                "input {bad} outside 0..{}",
                self.radix()
            )));
        }
        Ok(())
    }
}

/// Bits needed to write every element of Z/kZ.
pub fn bit_width(k: usize) -> usize {
    let mut l = 0;
    while (1usize << l) < k {
        l += 1;
    }
    l.max(1)
}

/// How the initial row is dealt from the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayoutItem {
    /// Commitment of bit input `i` (0-based).
    Commit(usize),
    /// Commitment of bit `bit` of integer input `input`.
    Bit { input: usize, bit: usize },
    /// A known face-down card.
    Const(Suit),
    /// Integer input `input` in the given scheme, modulus from the domain.
    Int { input: usize, scheme: Scheme },
}

impl LayoutItem {
    pub fn width(&self, domain: &Domain) -> usize {
        match self {
            LayoutItem::Commit(_) | LayoutItem::Bit { .. } => 2,
            LayoutItem::Const(_) => 1,
            LayoutItem::Int { .. } => domain.radix(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Layout {
    items: Vec<LayoutItem>,
}

impl Layout {
    pub fn new(items: Vec<LayoutItem>) -> Self {
        Layout { items }
    }

    pub fn items(&self) -> &[LayoutItem] {
        &self.items
    }

    pub fn card_count(&self, domain: &Domain) -> usize {
        self.items.iter().map(|i| i.width(domain)).sum()
    }

    pub fn build(&self, domain: &Domain, input: &[u32]) -> Result<CardSequence> {
        domain.check(input)?;
        let mut suits = Vec::new();
        for item in &self.items {
            match *item {
                LayoutItem::Commit(i) => {
                    let v = *input
                        .get(i)
                        .ok_or_else(|| Error::domain(format!("no input {}", i + 1)))?;
                    if v > 1 {
                        return Err(Error::domain(format!("{v} is not a bit")));
                    }
                    suits.extend(crate::deck::encode_bit(v as u8)?.suits());
                }
                LayoutItem::Bit { input: i, bit } => {
                    let v = *input
                        .get(i)
                        .ok_or_else(|| Error::domain(format!("no input {}", i + 1)))?;
                    suits.extend(crate::deck::encode_bit(((v >> bit) & 1) as u8)?.suits());
                }
                LayoutItem::Const(s) => suits.push(s),
                LayoutItem::Int { input: i, scheme } => {
                    let v = *input
                        .get(i)
                        .ok_or_else(|| Error::domain(format!("no input {}", i + 1)))?;
                    suits.extend(
                        crate::deck::encode_int(v as usize, domain.radix(), scheme)?.suits(),
                    );
                }
            }
        }
        CardSequence::face_down(&suits)
    }
}

/// Suits an arm accepts; `None` matches either suit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern(Vec<Option<Suit>>);

impl Pattern {
    pub fn exact(suits: &[Suit]) -> Self {
        Pattern(suits.iter().copied().map(Some).collect())
    }

    pub fn new(cells: Vec<Option<Suit>>) -> Self {
        Pattern(cells)
    }

    pub fn cells(&self) -> &[Option<Suit>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn matches(&self, suits: &[Suit]) -> bool {
        self.0.len() == suits.len()
            && self
                .0
                .iter()
                .zip(suits)
                .all(|(p, s)| p.is_none_or(|p| p == *s))
    }

    /// Whether some observation matches both patterns.
    pub fn overlaps(&self, other: &Pattern) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.is_none() || b.is_none() || a == b)
    }

    pub fn parse(text: &str) -> Result<Self> {
        text.chars()
            .map(|c| match c {
                '*' => Ok(None),
                c => Suit::from_letter(c)
                    .map(Some)
                    .ok_or_else(|| Error::domain(format!("bad pattern character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Pattern)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            let ch = c.map_or('*', Suit::letter);
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

/// How a leaf turns the final row into a result.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ResultRule {
    /// A public value, fixed by the path that reached this leaf.
    Public(i64),
    /// A face-down commitment at two positions (0-based).
    Committed([usize; 2]),
    /// A face-down integer encoding.
    Encoded {
        positions: Vec<usize>,
        scheme: Scheme,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arm {
    pub pattern: Pattern,
    pub body: Vec<Stmt>,
}

/// Equality and hashing ignore `line`, which only locates diagnostics.
#[derive(Debug, Clone)]
pub struct Reveal {
    /// Preorder index, assigned when the protocol is built.
    pub id: usize,
    /// Source line for script-built protocols.
    pub line: Option<usize>,
    /// 0-based positions, turned face-up in this order.
    pub positions: Vec<usize>,
    /// Empty means no branching.
    pub arms: Vec<Arm>,
}

impl PartialEq for Reveal {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.positions == other.positions && self.arms == other.arms
    }
}

impl Eq for Reveal {}

impl std::hash::Hash for Reveal {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
        self.positions.hash(state);
        self.arms.hash(state);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Perm(Permutation),
    Shuffle(ShuffleAction),
    Reveal(Reveal),
    /// Turn face-up cards back down; shows nothing.
    Conceal(Vec<usize>),
    Output(ResultRule),
}

impl Stmt {
    pub fn reveal(positions: Vec<usize>, arms: Vec<Arm>) -> Stmt {
        Stmt::Reveal(Reveal {
            id: 0,
            line: None,
            positions,
            arms,
        })
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |ps: &[usize]| {
            ps.iter()
                .map(|p| (p + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Stmt::Perm(p) => write!(f, "perm {p}"),
            Stmt::Shuffle(s) => write!(f, "{} over {} outcomes", s.kind(), s.size()),
            Stmt::Reveal(r) => write!(f, "reveal {}", list(&r.positions)),
            Stmt::Conceal(ps) => write!(f, "conceal {}", list(ps)),
            Stmt::Output(ResultRule::Public(v)) => write!(f, "output public {v}"),
            Stmt::Output(ResultRule::Committed(ps)) => write!(f, "output committed {}", list(ps)),
            Stmt::Output(ResultRule::Encoded { positions, scheme }) => {
                write!(f, "output encoded {scheme} {}", list(positions))
            }
        }
    }
}

/// Named parameters, rendered into reports.
pub type Params = BTreeMap<String, serde_json::Value>;

/// A complete protocol paired with the function it computes.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    name: String,
    params: Params,
    domain: Domain,
    layout: Layout,
    body: Vec<Stmt>,
    spec: FunctionSpec,
    reveal_count: usize,
}

impl Protocol {
    pub fn new(
        name: impl Into<String>,
        params: Params,
        layout: Layout,
        body: Vec<Stmt>,
        spec: FunctionSpec,
    ) -> Result<Self> {
        let domain = *spec.domain();
        let len = layout.card_count(&domain);
        if len == 0 {
            return Err(Error::domain("the layout deals no cards"));
        }
        let mut body = body;
        let mut next_id = 0;
        number_and_check(&mut body, len, &mut next_id)?;
        Ok(Protocol {
            name: name.into(),
            params,
            domain,
            layout,
            body,
            spec,
            reveal_count: next_id,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn body(&self) -> &[Stmt] {
        &self.body
    }

    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    pub fn card_count(&self) -> usize {
        self.layout.card_count(&self.domain)
    }

    pub fn reveal_count(&self) -> usize {
        self.reveal_count
    }

    pub fn initial_row(&self, input: &[u32]) -> Result<CardSequence> {
        self.layout.build(&self.domain, input)
    }

    /// The row just before the first shuffle or reveal.
    pub fn pre_shuffle_row(&self, input: &[u32]) -> Result<CardSequence> {
        let mut row = self.initial_row(input)?;
        for stmt in &self.body {
            match stmt {
                Stmt::Perm(p) => row = row.apply_perm(p)?,
                _ => break,
            }
        }
        Ok(row)
    }
}

fn number_and_check(block: &mut [Stmt], len: usize, next_id: &mut usize) -> Result<()> {
    let in_range = |ps: &[usize]| -> Result<()> {
        match ps.iter().find(|&&p| p >= len) {
            Some(p) => Err(Error::domain(format!(
                "position {} outside a row of {len} cards",
                p + 1
            ))),
            None => Ok(()),
        }
    };
    for stmt in block {
        match stmt {
            Stmt::Perm(p) if p.len() != len => {
                return Err(Error::domain(format!(
                    "perm {p} has the wrong size for {len} cards"
                )))
            }
            Stmt::Shuffle(s) if s.len() != len => {
                return Err(Error::domain(format!(
                    "shuffle has the wrong size for {len} cards"
                )))
            }
            Stmt::Perm(_) | Stmt::Shuffle(_) => {}
            Stmt::Conceal(ps) => in_range(ps)?,
            Stmt::Output(ResultRule::Committed(ps)) => {
                in_range(ps)?;
                if ps[0] == ps[1] {
                    return Err(Error::domain(
                        "committed output needs two distinct positions",
                    ));
                }
            }
            Stmt::Output(ResultRule::Encoded { positions, .. }) => in_range(positions)?,
            Stmt::Output(ResultRule::Public(_)) => {}
            Stmt::Reveal(r) => {
                in_range(&r.positions)?;
                r.id = *next_id;
                *next_id += 1;
                for arm in &r.arms {
                    if arm.pattern.len() != r.positions.len() {
                        return Err(Error::domain(format!(
                            "pattern {} does not fit a reveal of {} cards",
                            arm.pattern,
                            r.positions.len()
                        )));
                    }
                }
                for arm in &mut r.arms {
                    number_and_check(&mut arm.body, len, next_id)?;
                }
            }
        }
    }
    Ok(())
}
