//! The built-in protocols and the gadgets they are made from.

use serde::Deserialize;
use serde_json::json;

use super::build::{add_mod, and_commit, sum_bits, xor_all, Builder};
use super::{
    bit_width, preimages, Domain, FunctionSpec, Layout, LayoutItem, Params, Pattern, Protocol,
    ResultRule, Stmt, Target,
};
use crate::deck::{encode_int, Permutation, Scheme, Suit};
use crate::error::{Error, Result};
use crate::shuffle::{self, partial_random_cut, random_cut};

fn pair(i: usize) -> [usize; 2] {
    [2 * i, 2 * i + 1]
}

fn commits(n: usize) -> Vec<LayoutItem> {
    (0..n).map(LayoutItem::Commit).collect()
}

fn need_n(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::domain(format!("{what} needs n >= {min}, got {n}")));
    }
    Ok(())
}

fn rotations(letters: &str) -> Vec<Pattern> {
    let suits: Vec<Suit> = letters.chars().filter_map(Suit::from_letter).collect();
    let mut out: Vec<Pattern> = Vec::new();
    for r in 0..suits.len() {
        let mut rotated = suits.clone();
        rotated.rotate_left(r);
        let p = Pattern::exact(&rotated);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Reveals `row` (a heart-scheme encoding) and outputs `g(t)` for the
/// shown value `t`.
fn reveal_heart_row(b: &mut Builder, row: &[usize], g: &[i64]) -> Result<()> {
    let k = row.len();
    let mut arms = Vec::with_capacity(k);
    for (t, &value) in g.iter().enumerate().take(k) {
        let mut arm = b.arm();
        arm.output(ResultRule::Public(value));
        arms.push((
            Pattern::exact(&encode_int(t, k, Scheme::Heart)?.suits()),
            arm,
        ));
    }
    b.reveal(row, arms);
    Ok(())
}

/// One partial random cut per output value with more than one preimage.
fn preimage_cuts(b: &mut Builder, row: &[usize], g: &[i64], len: usize) -> Result<()> {
    for (_, class) in preimages(&g[..row.len()]) {
        if class.len() > 1 {
            let slots: Vec<usize> = class.iter().map(|&a| row[a]).collect();
            b.shuffle(partial_random_cut(len, &slots)?);
        }
    }
    Ok(())
}

/// Two-player AND with five cards, public output.
pub fn five_card_trick() -> Result<Protocol> {
    let domain = Domain::Bits { n: 2 };
    let layout = Layout::new(vec![
        LayoutItem::Commit(0),
        LayoutItem::Const(Suit::Club),
        LayoutItem::Commit(1),
    ]);
    let mut b = Builder::new(5);
    b.perm(Permutation::parse("(4 5)", 5)?);
    b.shuffle(random_cut(5)?);
    let mut arms = Vec::new();
    for (class, value) in [("HHCCC", 1), ("HCHCC", 0)] {
        for p in rotations(class) {
            let mut arm = b.arm();
            arm.output(ResultRule::Public(value));
            arms.push((p, arm));
        }
    }
    b.reveal(&[0, 1, 2, 3, 4], arms);
    Protocol::new(
        "five_card_trick",
        Params::new(),
        layout,
        b.finish(),
        FunctionSpec::new(Target::And, domain)?,
    )
}

/// Three-player equality with six cards and one random cut.
pub fn six_card_trick() -> Result<Protocol> {
    let domain = Domain::Bits { n: 3 };
    let mut b = Builder::new(6);
    b.perm(Permutation::parse("(2 4 6)", 6)?);
    b.shuffle(random_cut(6)?);
    let mut arms = Vec::new();
    for (class, value) in [("CHCHCH", 1), ("CCCHHH", 0)] {
        for p in rotations(class) {
            let mut arm = b.arm();
            arm.output(ResultRule::Public(value));
            arms.push((p, arm));
        }
    }
    b.reveal(&[0, 1, 2, 3, 4, 5], arms);
    Protocol::new(
        "six_card_trick",
        Params::new(),
        Layout::new(commits(3)),
        b.finish(),
        FunctionSpec::new(Target::Equality, domain)?,
    )
}

/// Adds `b` (club scheme) into `a` (heart scheme) in Z/kZ. The output row is
/// the first `k` cards.
pub fn add_mod_k(k: usize) -> Result<Protocol> {
    if k < 2 {
        return Err(Error::domain(format!("addition needs k >= 2, got {k}")));
    }
    let domain = Domain::Modular { n: 2, k };
    let layout = Layout::new(vec![
        LayoutItem::Int {
            input: 0,
            scheme: Scheme::Heart,
        },
        LayoutItem::Int {
            input: 1,
            scheme: Scheme::Club,
        },
    ]);
    let x: Vec<usize> = (0..k).collect();
    let y: Vec<usize> = (k..2 * k).collect();
    let mut b = Builder::new(2 * k);
    add_mod(&mut b, &x, &y)?;
    b.output(ResultRule::Encoded {
        positions: x,
        scheme: Scheme::Heart,
    });
    Protocol::new(
        "add",
        Params::from([("k".to_string(), json!(k))]),
        layout,
        b.finish(),
        FunctionSpec::new(Target::AddMod(k as u32), domain)?,
    )
}

/// Sums `n` committed bits with one extra club and one extra heart.
pub fn sum_first_k(n: usize) -> Result<Protocol> {
    need_n(n, 2, "summation")?;
    let domain = Domain::Bits { n };
    let mut items = commits(n);
    items.extend([
        LayoutItem::Const(Suit::Club),
        LayoutItem::Const(Suit::Heart),
    ]);
    let len = 2 * n + 2;
    let bits: Vec<[usize; 2]> = (0..n).map(pair).collect();
    let mut b = Builder::new(len);
    let row = sum_bits(&mut b, &bits, 2 * n, 2 * n + 1)?;
    b.output(ResultRule::Encoded {
        positions: row,
        scheme: Scheme::Heart,
    });
    Protocol::new(
        "sum",
        Params::from([("n".to_string(), json!(n))]),
        Layout::new(items),
        b.finish(),
        FunctionSpec::new(Target::Sum, domain)?,
    )
}

/// The perm / 2-section cut / inverse perm sequence of the committed AND on
/// `(x1,y1,x2,y2,x3,y3)`.
pub fn mizuki_sone_sandwich() -> Vec<Stmt> {
    let forward = Permutation::parse("(2 4 3)", 6).expect("valid cycle");
    vec![
        Stmt::Perm(forward.clone()),
        Stmt::Shuffle(shuffle::k_section_cut(2, 3).expect("valid cut")),
        Stmt::Perm(forward.inverse()),
    ]
}

/// Committed AND of two bits with one extra club and heart.
pub fn and_gate() -> Result<Protocol> {
    let domain = Domain::Bits { n: 2 };
    let mut items = commits(2);
    items.extend([
        LayoutItem::Const(Suit::Club),
        LayoutItem::Const(Suit::Heart),
    ]);
    let mut b = Builder::new(6);
    let (out, _) = and_commit(&mut b, pair(0), pair(1), pair(2))?;
    b.output(ResultRule::Committed(out));
    Protocol::new(
        "and",
        Params::new(),
        Layout::new(items),
        b.finish(),
        FunctionSpec::new(Target::And, domain)?,
    )
}

/// Ways to break the first equality protocol, for exercising the analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sabotage {
    /// Skip the final random cut, so the whole sum shows.
    NoFinalCut,
    /// Turn over the first commitment before anything is shuffled.
    EarlyReveal,
}

fn first_protocol_body(n: usize, g: &[i64], sabotage: Option<Sabotage>) -> Result<Vec<Stmt>> {
    let len = 2 * n;
    let bits: Vec<[usize; 2]> = (0..n).map(pair).collect();
    let mut b = Builder::new(len);
    if sabotage == Some(Sabotage::EarlyReveal) {
        b.reveal(&bits[0], Vec::new());
        b.conceal(&bits[0]);
    }
    xor_all(&mut b, &bits)?;
    let free = bits[n - 1];
    let keep = b.arm();
    // a'_n = 1: complement every remaining bit, and put the free pair as CH
    let mut negate = b.arm();
    let mut swaps: Vec<[usize; 2]> = bits[..n - 1].to_vec();
    swaps.push(free);
    negate.swap_pairs(&swaps)?;
    b.reveal_bit(free, keep, negate);
    b.conceal(&free);
    let row = sum_bits(&mut b, &bits[..n - 1], free[0], free[1])?;
    match sabotage {
        Some(Sabotage::NoFinalCut) => {}
        _ if g.is_empty() => {
            b.shuffle_on(&row[1..], &random_cut(row.len() - 1)?)?;
        }
        _ => preimage_cuts(&mut b, &row, g, len)?,
    }
    let g_row: Vec<i64> = if g.is_empty() {
        (0..row.len()).map(|t| (t == 0) as i64).collect()
    } else {
        g.to_vec()
    };
    reveal_heart_row(&mut b, &row, &g_row)?;
    Ok(b.finish())
}

/// Equality of `n` bits with `2n` cards and `n` shuffles; public output.
pub fn equality_first(n: usize) -> Result<Protocol> {
    need_n(n, 2, "equality_first")?;
    let domain = Domain::Bits { n };
    Protocol::new(
        "equality_first",
        Params::from([("n".to_string(), json!(n))]),
        Layout::new(commits(n)),
        first_protocol_body(n, &[], None)?,
        FunctionSpec::new(Target::Equality, domain)?,
    )
}

/// A deliberately broken `equality_first`.
pub fn equality_first_sabotaged(n: usize, sabotage: Sabotage) -> Result<Protocol> {
    need_n(n, 2, "equality_first")?;
    let name = match sabotage {
        Sabotage::NoFinalCut => "equality_first_no_final_cut",
        Sabotage::EarlyReveal => "equality_first_early_reveal",
    };
    Protocol::new(
        name,
        Params::from([("n".to_string(), json!(n))]),
        Layout::new(commits(n)),
        first_protocol_body(n, &[], Some(sabotage))?,
        FunctionSpec::new(Target::Equality, Domain::Bits { n })?,
    )
}

/// Any doubly symmetric function of `n` bits with `2n` cards.
///
/// `g` is indexed by the number of ones; a table of length `n` is extended
/// with `g(n) = g(0)`.
pub fn doubly_symmetric(n: usize, g: &[i64]) -> Result<Protocol> {
    need_n(n, 2, "doubly_symmetric")?;
    let mut table = g.to_vec();
    if table.len() == n {
        table.push(table[0]);
    }
    let domain = Domain::Bits { n };
    let spec = FunctionSpec::new(Target::Symmetric(table.clone()), domain)?;
    if !spec.is_doubly_symmetric() {
        return Err(Error::domain(format!(
            "g = {table:?} is not doubly symmetric (needs g(a) = g(n - a))"
        )));
    }
    // the row after the reveal holds a sum over n-1 bits: 0..n-1
    let reduced = &table[..n];
    Protocol::new(
        "doubly_symmetric",
        Params::from([("n".to_string(), json!(n)), ("g".to_string(), json!(table))]),
        Layout::new(commits(n)),
        first_protocol_body(n, reduced, None)?,
        spec,
    )
}

/// Any symmetric function of `n` bits with `2n + 2` cards; `g` has `n + 1`
/// entries.
pub fn symmetric_plus_two(n: usize, g: &[i64]) -> Result<Protocol> {
    need_n(n, 2, "symmetric")?;
    let domain = Domain::Bits { n };
    let spec = FunctionSpec::new(Target::Symmetric(g.to_vec()), domain)?;
    let len = 2 * n + 2;
    let mut items = commits(n);
    items.extend([
        LayoutItem::Const(Suit::Club),
        LayoutItem::Const(Suit::Heart),
    ]);
    let bits: Vec<[usize; 2]> = (0..n).map(pair).collect();
    let mut b = Builder::new(len);
    let row = sum_bits(&mut b, &bits, 2 * n, 2 * n + 1)?;
    preimage_cuts(&mut b, &row, g, len)?;
    reveal_heart_row(&mut b, &row, g)?;
    Protocol::new(
        "symmetric",
        Params::from([("n".to_string(), json!(n)), ("g".to_string(), json!(g))]),
        Layout::new(items),
        b.finish(),
        spec,
    )
}

/// Committed equality over the commitments at `bits`. Returns the output
/// pair and a face-up `CH` free pair.
fn equality_plane(b: &mut Builder, bits: &[[usize; 2]]) -> Result<([usize; 2], [usize; 2])> {
    let n = bits.len();
    xor_all(b, bits)?;
    let mut free = bits[n - 1];
    // a'_n = 0: complement the rest so that equality becomes an AND
    let mut negate = b.arm();
    negate.swap_pairs(&bits[..n - 1])?;
    let mut keep = b.arm();
    keep.swap_pairs(&[free])?;
    b.reveal_bit(free, negate, keep);
    let mut acc = bits[0];
    for &bit in &bits[1..n - 1] {
        b.conceal(&free);
        (acc, free) = and_commit(b, acc, bit, free)?;
    }
    Ok((acc, free))
}

/// Committed equality of `n` bits with `2n` cards and `n - 1` shuffles.
pub fn equality_second(n: usize) -> Result<Protocol> {
    need_n(n, 2, "equality_second")?;
    let bits: Vec<[usize; 2]> = (0..n).map(pair).collect();
    let mut b = Builder::new(2 * n);
    let (out, _) = equality_plane(&mut b, &bits)?;
    b.output(ResultRule::Committed(out));
    Protocol::new(
        "equality_second",
        Params::from([("n".to_string(), json!(n))]),
        Layout::new(commits(n)),
        b.finish(),
        FunctionSpec::new(Target::Equality, Domain::Bits { n })?,
    )
}

/// Committed equality of `n` values in Z/kZ, each written as
/// `ceil(lg k)` bit commitments.
pub fn k_candidate_equality(n: usize, k: usize) -> Result<Protocol> {
    need_n(n, 2, "kcand_equality")?;
    if k < 2 {
        return Err(Error::domain(format!(
            "kcand_equality needs k >= 2, got {k}"
        )));
    }
    let width = bit_width(k);
    let mut items = Vec::new();
    for input in 0..n {
        for bit in 0..width {
            items.push(LayoutItem::Bit { input, bit });
        }
    }
    let slot = |i: usize, j: usize| pair(i * width + j);
    let mut b = Builder::new(2 * width * n);
    let mut outs = Vec::with_capacity(width);
    let mut free = [0, 0];
    for j in 0..width {
        let plane: Vec<[usize; 2]> = (0..n).map(|i| slot(i, j)).collect();
        let (out, f) = equality_plane(&mut b, &plane)?;
        outs.push(out);
        free = f;
    }
    let mut acc = outs[0];
    for &out in &outs[1..] {
        b.conceal(&free);
        (acc, free) = and_commit(&mut b, acc, out, free)?;
    }
    b.output(ResultRule::Committed(acc));
    Protocol::new(
        "kcand_equality",
        Params::from([("k".to_string(), json!(k)), ("n".to_string(), json!(n))]),
        Layout::new(items),
        b.finish(),
        FunctionSpec::new(Target::Equality, Domain::Modular { n, k })?,
    )
}

/// Parameters for selecting a built-in by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinParams {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub g: Option<Vec<i64>>,
}

pub const BUILTIN_NAMES: &[&str] = &[
    "five_card_trick",
    "six_card_trick",
    "equality_first",
    "equality_second",
    "doubly_symmetric",
    "symmetric",
    "kcand_equality",
    "add",
    "sum",
    "and",
];

/// Looks up a built-in protocol by name.
pub fn builtin(name: &str, params: &BuiltinParams) -> Result<Protocol> {
    let n = || {
        params
            .n
            .ok_or_else(|| Error::domain(format!("{name} needs n")))
    };
    let k = || {
        params
            .k
            .ok_or_else(|| Error::domain(format!("{name} needs k")))
    };
    let g = || {
        params
            .g
            .clone()
            .ok_or_else(|| Error::domain(format!("{name} needs a g table")))
    };
    match name {
        "five_card_trick" => five_card_trick(),
        "six_card_trick" => six_card_trick(),
        "equality_first" => equality_first(n()?),
        "equality_second" => equality_second(n()?),
        "doubly_symmetric" => doubly_symmetric(n()?, &g()?),
        "symmetric" => symmetric_plus_two(n()?, &g()?),
        "kcand_equality" => k_candidate_equality(n()?, k()?),
        "add" => add_mod_k(k()?),
        "sum" => sum_first_k(n()?),
        "and" => and_gate(),
        other => Err(Error::domain(format!(
            "unknown protocol {other:?}; expected one of {}",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}
