use std::collections::{BTreeMap, BTreeSet};

use super::codes::*;
use super::{Diagnostic, ScriptDocument, Spanned, Statement};
use crate::analyzer::{per_input_checked, Options};
use crate::deck::Permutation;
use crate::error::Error;
use crate::protocol::{
    bit_width, Arm, Domain, FunctionSpec, Layout, LayoutItem, Params, Protocol, ResultRule, Stmt,
};
use crate::shuffle::{self, ShuffleAction, ShuffleKind};

/// Statements executed per input while checking branch coverage.
pub const CHECK_BUDGET: u64 = 20_000_000;

/// Face-up flags of every card, one set per way of reaching a statement.
type States = BTreeSet<Vec<bool>>;

struct Elab {
    cards: usize,
    diags: Vec<Diagnostic>,
}

impl Elab {
    fn error(&mut self, code: &'static str, at: (usize, usize), msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, at.0, at.1, msg));
    }

    fn slots(&self, on: &Option<Vec<usize>>) -> Vec<usize> {
        on.clone().unwrap_or_else(|| (0..self.cards).collect())
    }

    /// The perms and shuffles a non-branching statement stands for.
    fn lower(&self, stmt: &Statement) -> crate::Result<Vec<Stmt>> {
        let n = self.cards;
        let embed = |a: ShuffleAction, slots: &[usize]| a.embed(slots, n).map(Stmt::Shuffle);
        Ok(match stmt {
            Statement::Perm(p) => vec![Stmt::Perm(p.clone())],
            Statement::Shuffle(ps) => {
                vec![Stmt::Shuffle(ShuffleAction::new(
                    ShuffleKind::Shuffle,
                    ps.clone(),
                )?)]
            }
            Statement::LShift { r, on } | Statement::RShift { r, on } => {
                let slots = self.slots(on);
                let len = slots.len();
                let p = if matches!(stmt, Statement::LShift { .. }) {
                    Permutation::left_shift(len, r % len)
                } else {
                    Permutation::right_shift(len, r % len)
                };
                vec![Stmt::Perm(p.embed(&slots, n)?)]
            }
            Statement::RCut(slots) => vec![embed(shuffle::random_cut(slots.len())?, slots)?],
            Statement::KSec { k, on } => {
                let slots = self.slots(on);
                vec![embed(shuffle::k_section_cut_for(slots.len(), *k)?, &slots)?]
            }
            Statement::XorAll { on } => {
                let slots = self.slots(on);
                if !slots.len().is_multiple_of(2) {
                    return Err(Error::domain(format!(
                        "xorall needs commitments, but covers {} cards",
                        slots.len()
                    )));
                }
                let mut out = Vec::new();
                for s in shuffle::random_bit_xor(slots.len() / 2)? {
                    match s {
                        Stmt::Perm(p) => {
                            let p = p.embed(&slots, n)?;
                            if !p.is_identity() {
                                out.push(Stmt::Perm(p));
                            }
                        }
                        Stmt::Shuffle(a) => out.push(embed(a, &slots)?),
                        _ => unreachable!("the XOR gadget holds only perms and shuffles"),
                    }
                }
                out
            }
            Statement::PCut(slots) => vec![Stmt::Shuffle(shuffle::partial_random_cut(n, slots)?)],
            Statement::Reveal { .. } | Statement::Conceal(_) | Statement::Output(_) => {
                unreachable!("handled by the caller")
            }
        })
    }

    fn check_face_down(
        &mut self,
        states: &States,
        ps: &[usize],
        code: &'static str,
        at: (usize, usize),
        what: &str,
    ) -> bool {
        for st in states {
            if let Some(p) = ps.iter().find(|&&p| st[p]) {
                self.error(
                    code,
                    at,
                    format!("{what} card {}, which is face-up here", p + 1),
                );
                return false;
            }
        }
        true
    }

    fn block(&mut self, stmts: &[Spanned<Statement>], mut states: States) -> (Vec<Stmt>, States) {
        let mut out = Vec::new();
        for s in stmts {
            let at = (s.line, s.col);
            if states.is_empty() {
                self.error(
                    UNREACHABLE,
                    at,
                    "statement after every path has produced its output",
                );
                break;
            }
            match &s.node {
                Statement::Reveal {
                    positions,
                    branches,
                } => {
                    self.check_face_down(&states, positions, REVEAL_FACE_UP, at, "reveal of");
                    states = states
                        .into_iter()
                        .map(|mut st| {
                            positions.iter().for_each(|&p| st[p] = true);
                            st
                        })
                        .collect();
                    let mut arms = Vec::new();
                    if !branches.is_empty() {
                        let mut after = States::new();
                        for b in branches {
                            let (body, end) = self.block(&b.node.body, states.clone());
                            after.extend(end);
                            arms.push(Arm {
                                pattern: b.node.pattern.clone(),
                                body,
                            });
                        }
                        states = after;
                    }
                    let mut stmt = Stmt::reveal(positions.clone(), arms);
                    if let Stmt::Reveal(r) = &mut stmt {
                        r.line = Some(s.line);
                    }
                    out.push(stmt);
                }
                Statement::Conceal(ps) => {
                    for st in &states {
                        if let Some(p) = ps.iter().find(|&&p| !st[p]) {
                            let msg = format!("conceal of card {}, which is face-down here", p + 1);
                            self.error(CONCEAL_FACE_DOWN, at, msg);
                            break;
                        }
                    }
                    states = states
                        .into_iter()
                        .map(|mut st| {
                            ps.iter().for_each(|&p| st[p] = false);
                            st
                        })
                        .collect();
                    out.push(Stmt::Conceal(ps.clone()));
                }
                Statement::Output(rule) => {
                    let ps: &[usize] = match rule {
                        ResultRule::Public(_) => &[],
                        ResultRule::Committed(ps) => ps,
                        ResultRule::Encoded { positions, .. } => positions,
                    };
                    self.check_face_down(&states, ps, OUTPUT_FACE_UP, at, "output reads");
                    states.clear();
                    out.push(Stmt::Output(rule.clone()));
                }
                other => match self.lower(other) {
                    Ok(lowered) => {
                        for stmt in lowered {
                            states = self.apply(&stmt, states, at);
                            out.push(stmt);
                        }
                    }
                    Err(e) => self.error(INVALID, at, plain(&e)),
                },
            }
        }
        (out, states)
    }

    /// Moves face-up flags through a perm; shuffles must leave face-up
    /// cards where they are.
    fn apply(&mut self, stmt: &Stmt, states: States, at: (usize, usize)) -> States {
        match stmt {
            Stmt::Perm(p) => states
                .into_iter()
                .map(|st| p.permute(&st).expect("sizes checked"))
                .collect(),
            Stmt::Shuffle(a) => {
                for st in &states {
                    let moved = (0..self.cards)
                        .find(|&i| st[i] && a.permutations().iter().any(|p| p.apply_index(i) != i));
                    if let Some(i) = moved {
                        self.error(
                            SHUFFLE_FACE_UP,
                            at,
                            format!("shuffle moves face-up card {}", i + 1),
                        );
                        break;
                    }
                }
                states
            }
            _ => states,
        }
    }
}

fn plain(e: &Error) -> String {
    match e {
        Error::Domain(m) => m.clone(),
        other => other.to_string(),
    }
}

fn check_layout(domain: &Domain, items: &[LayoutItem]) -> Result<(), String> {
    let n = domain.arity();
    for item in items {
        match (*item, domain) {
            (LayoutItem::Commit(i), Domain::Bits { .. }) if i < n => {}
            (LayoutItem::Commit(i), _) => {
                return Err(format!("a{} needs a bit input between 1 and {n}", i + 1))
            }
            (LayoutItem::Bit { input, bit }, _) if input < n && bit < bit_width(domain.radix()) => {
            }
            (LayoutItem::Bit { input, bit }, _) => {
                return Err(format!("a{}.{bit} is outside the inputs", input + 1))
            }
            (LayoutItem::Int { input, .. }, Domain::Modular { .. }) if input < n => {}
            (LayoutItem::Int { input, .. }, _) => {
                return Err(format!("input {} is not a modular input", input + 1))
            }
            (LayoutItem::Const(_), _) => {}
        }
    }
    Ok(())
}

/// Builds a protocol from a document with the default coverage budget.
pub fn elaborate(doc: &ScriptDocument) -> Result<Protocol, Vec<Diagnostic>> {
    elaborate_with(doc, CHECK_BUDGET)
}

/// Builds a protocol, checking the card budget, the face-up state of every
/// revealed, concealed, shuffled and output card, and (by running every
/// input) that each reveal's branches cover what it can show.
pub fn elaborate_with(doc: &ScriptDocument, budget: u64) -> Result<Protocol, Vec<Diagnostic>> {
    let h = &doc.header.node;
    let head_at = (doc.header.line, doc.header.col);
    let one = |code, msg: String| vec![Diagnostic::new(code, head_at.0, head_at.1, msg)];

    let spec = FunctionSpec::new(h.function.clone(), h.domain)
        .map_err(|e| one(BAD_FUNCTION, plain(&e)))?;
    check_layout(&h.domain, &h.layout).map_err(|m| one(BAD_LAYOUT, m))?;
    let layout = Layout::new(h.layout.clone());
    let dealt = layout.card_count(&h.domain);
    if dealt != h.cards {
        return Err(one(
            CARD_BUDGET,
            format!(
                "the layout deals {dealt} cards but the header allows {}",
                h.cards
            ),
        ));
    }

    let mut elab = Elab {
        cards: h.cards,
        diags: Vec::new(),
    };
    let start: States = [vec![false; h.cards]].into_iter().collect();
    let (body, end) = elab.block(&doc.body, start);
    if !end.is_empty() && elab.diags.is_empty() {
        let last = last_line(&doc.body).unwrap_or(head_at);
        elab.error(
            NO_OUTPUT,
            last,
            "some path reaches the end of the script without an output",
        );
    }
    if !elab.diags.is_empty() {
        elab.diags.sort_by_key(|d| (d.line, d.col));
        return Err(elab.diags);
    }

    let params: Params = h.params.iter().cloned().collect::<BTreeMap<_, _>>();
    let protocol = Protocol::new(h.name.clone(), params, layout, body, spec)
        .map_err(|e| one(INVALID, plain(&e)))?;
    check_coverage(&protocol, doc, budget)?;
    Ok(protocol)
}

fn last_line(stmts: &[Spanned<Statement>]) -> Option<(usize, usize)> {
    stmts.last().map(|s| match &s.node {
        Statement::Reveal { branches, .. } => branches
            .last()
            .and_then(|b| last_line(&b.node.body))
            .unwrap_or((s.line, s.col)),
        _ => (s.line, s.col),
    })
}

fn reveal_lines(block: &[Stmt], out: &mut BTreeMap<usize, usize>) {
    for stmt in block {
        if let Stmt::Reveal(r) = stmt {
            if let Some(line) = r.line {
                out.insert(r.id, line);
            }
            for arm in &r.arms {
                reveal_lines(&arm.body, out);
            }
        }
    }
}

fn check_coverage(
    protocol: &Protocol,
    doc: &ScriptDocument,
    budget: u64,
) -> Result<(), Vec<Diagnostic>> {
    let opts = Options {
        budget,
        ..Options::from_env().unwrap_or_default()
    };
    let head_at = (doc.header.line, doc.header.col);
    let Err((input, err)) = per_input_checked(protocol, &opts) else {
        return Ok(());
    };
    let mut lines = BTreeMap::new();
    reveal_lines(protocol.body(), &mut lines);
    let d = match err {
        Error::Uncovered { reveal, observed } => {
            let line = lines.get(&reveal).copied().unwrap_or(head_at.0);
            Diagnostic::new(
                NOT_EXHAUSTIVE,
                line,
                1,
                format!("on input {input} this reveal shows {observed}, which no branch covers"),
            )
        }
        Error::Budget { budget } => Diagnostic::new(
            ENUMERATION_BUDGET,
            head_at.0,
            head_at.1,
            format!("checking input {input} took more than {budget} steps"),
        ),
        Error::NoOutput => Diagnostic::new(
            NO_OUTPUT,
            head_at.0,
            head_at.1,
            format!("on input {input} a path ends without an output"),
        ),
        other => Diagnostic::new(
            INVALID,
            head_at.0,
            head_at.1,
            format!("on input {input}: {}", plain(&other)),
        ),
    };
    Err(vec![d])
}
