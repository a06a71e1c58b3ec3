use std::fmt::Write;

use super::{ScriptDocument, Spanned, Statement};
use crate::deck::Scheme;
use crate::protocol::{Domain, LayoutItem, ResultRule};

fn positions(ps: &[usize]) -> String {
    let contiguous = ps.len() > 2 && ps.windows(2).all(|w| w[1] == w[0] + 1);
    if contiguous {
        format!("{}..{}", ps[0] + 1, ps[ps.len() - 1] + 1)
    } else {
        ps.iter()
            .map(|p| (p + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn on(slots: &Option<Vec<usize>>) -> String {
    slots
        .as_ref()
        .map_or_else(String::new, |s| format!(" on {}", positions(s)))
}

fn layout_item(item: &LayoutItem) -> String {
    match *item {
        LayoutItem::Commit(i) => format!("a{}", i + 1),
        LayoutItem::Bit { input, bit } => format!("a{}.{bit}", input + 1),
        LayoutItem::Const(s) => s.letter().to_string(),
        LayoutItem::Int { input, scheme } => match scheme {
            Scheme::Heart => format!("h{}", input + 1),
            Scheme::Club => format!("c{}", input + 1),
        },
    }
}

fn block(out: &mut String, stmts: &[Spanned<Statement>], depth: usize) {
    let pad = "  ".repeat(depth);
    for s in stmts {
        let line = match &s.node {
            Statement::Perm(p) => format!("perm {p}"),
            Statement::Shuffle(ps) => format!(
                "shuffle {{{}}}",
                ps.iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            Statement::LShift { r, on: o } => format!("lshift {r}{}", on(o)),
            Statement::RShift { r, on: o } => format!("rshift {r}{}", on(o)),
            Statement::RCut(ps) => format!("rcut {}", positions(ps)),
            Statement::KSec { k, on: o } => format!("ksec {k}{}", on(o)),
            Statement::XorAll { on: o } => format!("xorall{}", on(o)),
            Statement::PCut(ps) => format!("pcut {}", positions(ps)),
            Statement::Reveal { positions: ps, .. } => format!("reveal {}", positions(ps)),
            Statement::Conceal(ps) => format!("conceal {}", positions(ps)),
            Statement::Output(ResultRule::Public(v)) => format!("output public {v}"),
            Statement::Output(ResultRule::Committed([a, b])) => {
                format!("output committed {} {}", a + 1, b + 1)
            }
            Statement::Output(ResultRule::Encoded {
                positions: ps,
                scheme,
            }) => {
                format!("output encoded {scheme} {}", positions(ps))
            }
        };
        let _ = writeln!(out, "{pad}{line}");
        if let Statement::Reveal { branches, .. } = &s.node {
            for b in branches {
                let _ = writeln!(out, "{pad}branch {} {{", b.node.pattern);
                block(out, &b.node.body, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

/// Renders a document in canonical form; parsing the result gives back an
/// equal document.
pub fn serialize(doc: &ScriptDocument) -> String {
    let h = &doc.header.node;
    let mut out = String::new();
    let _ = writeln!(out, "protocol {}", h.name);
    for (k, v) in &h.params {
        let _ = writeln!(out, "param {k} {v}");
    }
    let _ = match h.domain {
        Domain::Bits { n } => writeln!(out, "inputs {n} bits"),
        Domain::Modular { n, k } => writeln!(out, "inputs {n} mod {k}"),
    };
    let _ = writeln!(out, "cards {}", h.cards);
    let _ = writeln!(out, "function {}", h.function);
    let items: Vec<String> = h.layout.iter().map(layout_item).collect();
    let _ = writeln!(out, "layout {}", items.join(" "));
    block(&mut out, &doc.body, 0);
    out
}
