//! Emitting statements for protocols whose pieces live on scattered slots of
//! one row. Slots are 0-based row positions.

use super::{Arm, Pattern, ResultRule, Stmt};
use crate::deck::{Permutation, Scheme, Suit};
use crate::error::Result;
use crate::shuffle::{self, ShuffleAction};

pub(crate) struct Builder {
    len: usize,
    stmts: Vec<Stmt>,
}

impl Builder {
    pub fn new(len: usize) -> Self {
        Builder {
            len,
            stmts: Vec::new(),
        }
    }

    pub fn arm(&self) -> Builder {
        Builder::new(self.len)
    }

    pub fn finish(self) -> Vec<Stmt> {
        self.stmts
    }

    pub fn perm(&mut self, p: Permutation) {
        if !p.is_identity() {
            self.stmts.push(Stmt::Perm(p));
        }
    }

    /// Applies a local permutation to the cards in `slots`.
    pub fn perm_on(&mut self, slots: &[usize], p: &Permutation) -> Result<()> {
        let lifted = p.embed(slots, self.len)?;
        self.perm(lifted);
        Ok(())
    }

    pub fn shuffle_on(&mut self, slots: &[usize], action: &ShuffleAction) -> Result<()> {
        self.stmts
            .push(Stmt::Shuffle(action.embed(slots, self.len)?));
        Ok(())
    }

    pub fn shuffle(&mut self, action: ShuffleAction) {
        self.stmts.push(Stmt::Shuffle(action));
    }

    /// Replays a fragment written for `slots.len()` cards on `slots`.
    pub fn fragment_on(&mut self, slots: &[usize], fragment: Vec<Stmt>) -> Result<()> {
        for stmt in fragment {
            match stmt {
                Stmt::Perm(p) => self.perm_on(slots, &p)?,
                Stmt::Shuffle(s) => self.shuffle_on(slots, &s)?,
                other => unreachable!("fragments hold only perms and shuffles, got {other}"),
            }
        }
        Ok(())
    }

    /// Swaps the two cards of each pair in one public rearrangement.
    pub fn swap_pairs(&mut self, pairs: &[[usize; 2]]) -> Result<()> {
        if pairs.is_empty() {
            return Ok(());
        }
        let cycles: Vec<Vec<usize>> = pairs.iter().map(|[a, b]| vec![a + 1, b + 1]).collect();
        self.perm(Permutation::from_cycles(self.len, &cycles)?);
        Ok(())
    }

    pub fn reveal(&mut self, slots: &[usize], arms: Vec<(Pattern, Builder)>) {
        let arms = arms
            .into_iter()
            .map(|(pattern, b)| Arm {
                pattern,
                body: b.finish(),
            })
            .collect();
        self.stmts.push(Stmt::reveal(slots.to_vec(), arms));
    }

    pub fn conceal(&mut self, slots: &[usize]) {
        self.stmts.push(Stmt::Conceal(slots.to_vec()));
    }

    pub fn output(&mut self, rule: ResultRule) {
        self.stmts.push(Stmt::Output(rule));
    }

    /// Reveals a commitment with one arm per value.
    pub fn reveal_bit(&mut self, pair: [usize; 2], zero: Builder, one: Builder) {
        self.reveal(
            &pair,
            vec![
                (Pattern::exact(&[Suit::Club, Suit::Heart]), zero),
                (Pattern::exact(&[Suit::Heart, Suit::Club]), one),
            ],
        );
    }
}

/// Random bit XOR over the commitments at `pairs`.
pub(crate) fn xor_all(b: &mut Builder, pairs: &[[usize; 2]]) -> Result<()> {
    let slots: Vec<usize> = pairs.iter().flatten().copied().collect();
    b.fragment_on(&slots, shuffle::random_bit_xor(pairs.len())?)
}

/// Interleaving used by the addition: local `x_i` (index `i`) and `y_j`
/// (index `k + j`) go to `Z = (x0, y_{k-1}, x1, y_{k-2}, ..., x_{k-1}, y0)`.
pub(crate) fn add_interleave(k: usize) -> Permutation {
    let mut image = vec![0; 2 * k];
    for i in 0..k {
        image[i] = 2 * i;
        image[k + i] = 2 * (k - 1 - i) + 1;
    }
    Permutation::from_image(image).expect("interleave is a bijection")
}

/// Adds `y` (club scheme) into `x` (heart scheme), both of length `k`.
///
/// On return `x` holds the sum in the heart scheme and `y` is face-up with
/// its single club moved to `y[0]`.
pub(crate) fn add_mod(b: &mut Builder, x: &[usize], y: &[usize]) -> Result<()> {
    let k = x.len();
    debug_assert_eq!(k, y.len());
    let slots: Vec<usize> = x.iter().chain(y).copied().collect();
    let gather = add_interleave(k);
    b.fragment_on(
        &slots,
        vec![
            Stmt::Perm(gather.clone()),
            Stmt::Shuffle(shuffle::k_section_cut(k, 2)?),
            Stmt::Perm(gather.inverse()),
        ],
    )?;
    // y now shows b + r; shifting x right by that amount gives a + b
    let mut arms = Vec::with_capacity(k);
    for s in 0..k {
        let shown = crate::deck::encode_int(s, k, Scheme::Club)?.suits();
        let mut arm = b.arm();
        arm.perm_on(x, &Permutation::right_shift(k, s))?;
        arm.perm_on(y, &Permutation::left_shift(k, s))?;
        arms.push((Pattern::exact(&shown), arm));
    }
    b.reveal(y, arms);
    Ok(())
}

/// Sums the committed bits at `bits` into a heart-scheme row, consuming one
/// face-down club and one face-down heart. Returns the row's slots
/// (`bits.len() + 1` of them, or 2 for a single bit).
pub(crate) fn sum_bits(
    b: &mut Builder,
    bits: &[[usize; 2]],
    club: usize,
    heart: usize,
) -> Result<Vec<usize>> {
    let first = bits[0];
    b.swap_pairs(&[first])?;
    if bits.len() == 1 {
        return Ok(first.to_vec());
    }
    let mut x = vec![first[0], first[1], club];
    let mut y = vec![bits[1][0], bits[1][1], heart];
    add_mod(b, &x, &y)?;
    for bit in &bits[2..] {
        b.conceal(&y);
        x.push(y[0]);
        y = bit.iter().chain(&y[1..]).copied().collect();
        add_mod(b, &x, &y)?;
    }
    Ok(x)
}

/// The committed AND of `acc` and `bit` using the face-down zero commitment
/// at `zero`. Returns `(output, free)`; the free pair is face-up `CH`.
pub(crate) fn and_commit(
    b: &mut Builder,
    acc: [usize; 2],
    bit: [usize; 2],
    zero: [usize; 2],
) -> Result<([usize; 2], [usize; 2])> {
    let slots = [acc[0], acc[1], bit[0], bit[1], zero[0], zero[1]];
    b.fragment_on(&slots, super::builtins::mizuki_sone_sandwich())?;
    // first bit 0: the third commitment is the output; move it into `bit`
    let mut zero_arm = b.arm();
    zero_arm.swap_pairs(&[[bit[0], zero[0]], [bit[1], zero[1]]])?;
    let mut one_arm = b.arm();
    one_arm.swap_pairs(&[acc])?;
    b.reveal_bit(acc, zero_arm, one_arm);
    Ok((bit, acc))
}
