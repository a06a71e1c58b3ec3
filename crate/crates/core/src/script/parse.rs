use super::codes::*;
use super::{Branch, Diagnostic, Header, ScriptDocument, Spanned, Statement};
use crate::deck::{Permutation, Scheme, Suit};
use crate::protocol::{Domain, LayoutItem, Pattern, ResultRule, Target};

/// A logical piece of a line: statement text, or a block brace.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Item {
    Text(String),
    Open,
    Close,
}

type Located = Spanned<Item>;

/// Splits the source into statements and braces. Braces inside a
/// `shuffle { ... }` statement belong to the statement.
fn segment(text: &str) -> Vec<Located> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let src = raw.split('#').next().unwrap_or("");
        let mut buf = String::new();
        let mut start = 0;
        let mut literal_depth = 0usize;
        let flush = |buf: &mut String, start: usize, out: &mut Vec<Located>| {
            let trimmed = buf.trim();
            if !trimmed.is_empty() {
                let lead = buf.chars().take_while(|c| c.is_whitespace()).count();
                out.push(Spanned {
                    node: Item::Text(trimmed.to_string()),
                    line,
                    col: start + lead + 1,
                });
            }
            buf.clear();
        };
        for (col, c) in src.chars().enumerate() {
            let in_shuffle = buf.split_whitespace().next() == Some("shuffle");
            match c {
                '{' if in_shuffle => {
                    literal_depth += 1;
                    buf.push(c);
                }
                '}' if literal_depth > 0 => {
                    literal_depth -= 1;
                    buf.push(c);
                }
                '{' | '}' => {
                    flush(&mut buf, start, &mut out);
                    out.push(Spanned {
                        node: if c == '{' { Item::Open } else { Item::Close },
                        line,
                        col: col + 1,
                    });
                    start = col + 1;
                }
                _ => {
                    if buf.is_empty() {
                        start = col;
                    }
                    buf.push(c);
                }
            }
        }
        flush(&mut buf, start, &mut out);
    }
    out
}

struct Parser {
    items: Vec<Located>,
    pos: usize,
    cards: usize,
    diags: Vec<Diagnostic>,
}

/// Splits `word rest` into the first word and the trimmed rest.
fn head(text: &str) -> (&str, &str) {
    match text.split_once(char::is_whitespace) {
        Some((w, rest)) => (w, rest.trim()),
        None => (text, ""),
    }
}

fn number(text: &str) -> Result<usize, String> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| format!("expected a number, got {:?}", text.trim()))
}

/// Parses a `Target` from `function` header text.
pub(crate) fn parse_target(text: &str) -> Result<Target, String> {
    let (word, rest) = head(text);
    let list = |rest: &str| -> Result<Vec<i64>, String> {
        rest.split(',')
            .map(|v| {
                v.trim()
                    .parse::<i64>()
                    .map_err(|_| format!("bad table value {:?}", v.trim()))
            })
            .collect()
    };
    let plain = |t: Target| {
        if rest.is_empty() {
            Ok(t)
        } else {
            Err(format!("`{word}` takes no arguments"))
        }
    };
    match word {
        "and" => plain(Target::And),
        "equality" => plain(Target::Equality),
        "xor" => plain(Target::Parity),
        "sum" => plain(Target::Sum),
        "sym" => Ok(Target::Symmetric(list(rest)?)),
        "table" => Ok(Target::Table(list(rest)?)),
        "addmod" => Ok(Target::AddMod(number(rest)? as u32)),
        other => Err(format!(
            "unknown function {other:?}; expected and, equality, xor, sum, sym, table or addmod"
        )),
    }
}

fn parse_layout_item(tok: &str) -> Result<LayoutItem, String> {
    let index = |s: &str| -> Result<usize, String> {
        match s.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i - 1),
            _ => Err(format!("bad input number in {tok:?}")),
        }
    };
    match tok {
        "C" => return Ok(LayoutItem::Const(Suit::Club)),
        "H" => return Ok(LayoutItem::Const(Suit::Heart)),
        _ => {}
    }
    let mut chars = tok.chars();
    let kind = chars.next().ok_or("empty layout item")?;
    let rest = chars.as_str();
    match kind {
        'a' => match rest.split_once('.') {
            Some((i, b)) => Ok(LayoutItem::Bit {
                input: index(i)?,
                bit: b
                    .parse()
                    .map_err(|_| format!("bad bit number in {tok:?}"))?,
            }),
            None => Ok(LayoutItem::Commit(index(rest)?)),
        },
        'h' => Ok(LayoutItem::Int {
            input: index(rest)?,
            scheme: Scheme::Heart,
        }),
        'c' => Ok(LayoutItem::Int {
            input: index(rest)?,
            scheme: Scheme::Club,
        }),
        _ => Err(format!(
            "unknown layout item {tok:?}; expected aN, aN.B, hN, cN, C or H"
        )),
    }
}

impl Parser {
    fn error(&mut self, code: &'static str, line: usize, col: usize, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, line, col, msg));
    }

    /// Parses `1,2,3` or `1..5` into 0-based positions.
    fn positions(&self, text: &str) -> Result<Vec<usize>, (&'static str, String)> {
        let text = text.trim();
        let one = |t: &str| -> Result<usize, (&'static str, String)> {
            let p = t
                .trim()
                .parse::<usize>()
                .map_err(|_| (BAD_ARGUMENT, format!("bad position {:?}", t.trim())))?;
            if p == 0 || p > self.cards {
                return Err((
                    POSITION_RANGE,
                    format!("position {p} outside 1..={}", self.cards),
                ));
            }
            Ok(p - 1)
        };
        let out: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
            let (a, b) = (one(a)?, one(b)?);
            if a > b {
                return Err((BAD_ARGUMENT, format!("empty range {text:?}")));
            }
            (a..=b).collect()
        } else {
            if text.is_empty() {
                return Err((BAD_ARGUMENT, "expected positions".into()));
            }
            text.split(',').map(one).collect::<Result<_, _>>()?
        };
        let mut seen = vec![false; self.cards];
        for &p in &out {
            if std::mem::replace(&mut seen[p], true) {
                return Err((BAD_ARGUMENT, format!("position {} listed twice", p + 1)));
            }
        }
        Ok(out)
    }

    fn perm(&self, text: &str) -> Result<Permutation, (&'static str, String)> {
        Permutation::parse(text, self.cards).map_err(|e| {
            let msg = e.to_string();
            let code = if msg.contains("outside") {
                POSITION_RANGE
            } else {
                BAD_CYCLES
            };
            (code, msg.trim_start_matches("domain error: ").to_string())
        })
    }

    /// `r` or `r on p1,...`.
    fn amount_on(&self, rest: &str) -> Result<(usize, Option<Vec<usize>>), (&'static str, String)> {
        let (amount, on) = match rest.split_once(" on ") {
            Some((a, on)) => (a, Some(self.positions(on)?)),
            None => (rest, None),
        };
        let r = number(amount).map_err(|m| (BAD_ARGUMENT, m))?;
        Ok((r, on))
    }

    fn statement(&self, text: &str) -> Result<Statement, (&'static str, String)> {
        let (word, rest) = head(text);
        let bad = |m: String| (BAD_ARGUMENT, m);
        Ok(match word {
            "perm" => Statement::Perm(self.perm(rest)?),
            "shuffle" => {
                let inner = rest
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .ok_or_else(|| bad("expected shuffle {perm, perm, ...}".into()))?;
                let perms = inner
                    .split(',')
                    .map(|p| self.perm(p))
                    .collect::<Result<Vec<_>, _>>()?;
                Statement::Shuffle(perms)
            }
            "lshift" | "rshift" => {
                let (r, on) = self.amount_on(rest)?;
                if word == "lshift" {
                    Statement::LShift { r, on }
                } else {
                    Statement::RShift { r, on }
                }
            }
            "rcut" => Statement::RCut(self.positions(rest)?),
            "ksec" => {
                let (k, on) = self.amount_on(rest)?;
                Statement::KSec { k, on }
            }
            "xorall" => Statement::XorAll {
                on: match rest.strip_prefix("on ") {
                    Some(ps) => Some(self.positions(ps)?),
                    None if rest.is_empty() => None,
                    None => return Err(bad(format!("unexpected {rest:?} after xorall"))),
                },
            },
            "pcut" => Statement::PCut(self.positions(rest)?),
            "reveal" => Statement::Reveal {
                positions: self.positions(rest)?,
                branches: Vec::new(),
            },
            "conceal" => Statement::Conceal(self.positions(rest)?),
            "output" => {
                let (kind, args) = head(rest);
                Statement::Output(match kind {
                    "public" => ResultRule::Public(
                        args.parse::<i64>()
                            .map_err(|_| bad(format!("bad public value {args:?}")))?,
                    ),
                    "committed" => {
                        let ps = self.positions(&args.replace(char::is_whitespace, ","))?;
                        let [a, b] = ps[..] else {
                            return Err(bad("committed output needs two positions".into()));
                        };
                        ResultRule::Committed([a, b])
                    }
                    "encoded" => {
                        let (scheme, ps) = head(args);
                        let scheme = match scheme {
                            "heart" => Scheme::Heart,
                            "club" => Scheme::Club,
                            s => return Err(bad(format!("unknown scheme {s:?}"))),
                        };
                        ResultRule::Encoded {
                            positions: self.positions(ps)?,
                            scheme,
                        }
                    }
                    k => {
                        return Err(bad(format!(
                            "unknown output kind {k:?}; expected public, committed or encoded"
                        )))
                    }
                })
            }
            other => return Err((UNKNOWN_STATEMENT, format!("unknown statement {other:?}"))),
        })
    }

    fn header(&mut self) -> Option<Spanned<Header>> {
        const KEYS: [&str; 6] = ["protocol", "param", "inputs", "cards", "function", "layout"];
        let (mut name, mut params, mut domain, mut cards, mut function, mut layout) =
            (None, Vec::new(), None, None, None, None);
        let (line0, col0) = self.items.first().map_or((1, 1), |i| (i.line, i.col));
        while let Some(item) = self.items.get(self.pos) {
            let Item::Text(text) = &item.node else { break };
            let (word, rest) = head(text);
            if !KEYS.contains(&word) {
                break;
            }
            let (line, col, text) = (item.line, item.col, text.clone());
            self.pos += 1;
            let (word, rest) = (word.to_string(), rest.to_string());
            if name.is_none() && word != "protocol" {
                self.error(
                    MISSING_HEADER,
                    line,
                    col,
                    "missing header: the first line must be `protocol NAME`",
                );
                return None;
            }
            let dup = |set: bool, p: &mut Parser| {
                if set {
                    p.error(BAD_HEADER, line, col, format!("duplicate `{word}` line"));
                }
            };
            match word.as_str() {
                "protocol" => {
                    dup(name.is_some(), self);
                    if rest.is_empty() || rest.contains(char::is_whitespace) {
                        self.error(BAD_HEADER, line, col, "expected `protocol NAME`");
                    }
                    name = Some(rest);
                }
                "param" => {
                    let (key, value) = head(&rest);
                    match serde_json::from_str::<serde_json::Value>(value) {
                        Ok(v) if !key.is_empty() => params.push((key.to_string(), v)),
                        _ => self.error(
                            BAD_HEADER,
                            line,
                            col,
                            format!("expected `param KEY JSON`, got {text:?}"),
                        ),
                    }
                }
                "inputs" => {
                    dup(domain.is_some(), self);
                    let words: Vec<&str> = rest.split_whitespace().collect();
                    let parsed = match words[..] {
                        [n, "bits"] => n.parse().ok().map(|n| Domain::Bits { n }),
                        [n, "mod", k] => match (n.parse(), k.parse()) {
                            (Ok(n), Ok(k)) if k >= 2 => Some(Domain::Modular { n, k }),
                            _ => None,
                        },
                        _ => None,
                    };
                    match parsed {
                        Some(d) if d.arity() > 0 => domain = Some(d),
                        _ => self.error(
                            BAD_HEADER,
                            line,
                            col,
                            "expected `inputs N bits` or `inputs N mod K`",
                        ),
                    }
                }
                "cards" => {
                    dup(cards.is_some(), self);
                    match number(&rest) {
                        Ok(n) if n > 0 => cards = Some(n),
                        _ => self.error(BAD_HEADER, line, col, "expected `cards N` with N >= 1"),
                    }
                }
                "function" => {
                    dup(function.is_some(), self);
                    match parse_target(&rest) {
                        Ok(t) => function = Some(t),
                        Err(m) => self.error(BAD_FUNCTION, line, col, m),
                    }
                }
                "layout" => {
                    dup(layout.is_some(), self);
                    let mut items = Vec::new();
                    for tok in rest.split_whitespace() {
                        match parse_layout_item(tok) {
                            Ok(i) => items.push(i),
                            Err(m) => self.error(BAD_LAYOUT, line, col, m),
                        }
                    }
                    if items.is_empty() {
                        self.error(BAD_LAYOUT, line, col, "the layout is empty");
                    }
                    layout = Some(items);
                }
                _ => unreachable!(),
            }
        }
        let Some(name) = name else {
            let (line, col) = self.items.get(self.pos).map_or((1, 1), |i| (i.line, i.col));
            self.error(
                MISSING_HEADER,
                line,
                col,
                "missing header: the first line must be `protocol NAME`",
            );
            return None;
        };
        let missing = |what: &str, p: &mut Parser| {
            p.error(
                MISSING_HEADER,
                line0,
                col0,
                format!("missing header line `{what}`"),
            );
        };
        if domain.is_none() {
            missing("inputs", self);
        }
        if cards.is_none() {
            missing("cards", self);
        }
        if function.is_none() && !self.diags.iter().any(|d| d.code == BAD_FUNCTION) {
            missing("function", self);
        }
        if layout.is_none() {
            missing("layout", self);
        }
        Some(Spanned {
            node: Header {
                name,
                params,
                domain: domain?,
                cards: cards?,
                function: function?,
                layout: layout?,
            },
            line: line0,
            col: col0,
        })
    }

    /// Parses statements until a closing brace (when `nested`) or the end.
    fn block(&mut self, nested: Option<(usize, usize)>) -> Vec<Spanned<Statement>> {
        let mut out: Vec<Spanned<Statement>> = Vec::new();
        while let Some(item) = self.items.get(self.pos).cloned() {
            self.pos += 1;
            match item.node {
                Item::Close => {
                    if nested.is_some() {
                        return out;
                    }
                    self.error(BRACES, item.line, item.col, "unmatched `}`");
                }
                Item::Open => {
                    self.error(
                        BRACES,
                        item.line,
                        item.col,
                        "`{` must follow `branch PATTERN`",
                    );
                    self.block(Some((item.line, item.col)));
                }
                Item::Text(text) => {
                    let (word, rest) = head(&text);
                    if word == "branch" {
                        self.branch(&mut out, rest, item.line, item.col);
                        continue;
                    }
                    match self.statement(&text) {
                        Ok(node) => out.push(Spanned {
                            node,
                            line: item.line,
                            col: item.col,
                        }),
                        Err((code, m)) => self.error(code, item.line, item.col, m),
                    }
                }
            }
        }
        if let Some((line, col)) = nested {
            self.error(BRACES, line, col, "missing `}` for this block");
        }
        out
    }

    fn branch(&mut self, out: &mut [Spanned<Statement>], pattern: &str, line: usize, col: usize) {
        let opened = matches!(
            self.items.get(self.pos),
            Some(Spanned {
                node: Item::Open,
                ..
            })
        );
        if !opened {
            self.error(BRACES, line, col, "expected `{` after the branch pattern");
            return;
        }
        let open = &self.items[self.pos];
        let open_at = (open.line, open.col);
        self.pos += 1;
        let body = self.block(Some(open_at));
        let pattern = match Pattern::parse(pattern.trim()) {
            Ok(p) if !p.is_empty() => p,
            _ => {
                self.error(
                    BAD_ARGUMENT,
                    line,
                    col,
                    format!("bad branch pattern {pattern:?}; use C, H and *"),
                );
                return;
            }
        };
        let Some(Spanned {
            node:
                Statement::Reveal {
                    positions,
                    branches,
                },
            ..
        }) = out.last_mut()
        else {
            self.error(
                STRAY_BRANCH,
                line,
                col,
                "`branch` must follow a `reveal` or another branch",
            );
            return;
        };
        if pattern.len() != positions.len() {
            self.error(
                STRAY_BRANCH,
                line,
                col,
                format!(
                    "pattern {pattern} has {} cards but the reveal shows {}",
                    pattern.len(),
                    positions.len()
                ),
            );
            return;
        }
        if let Some(prev) = branches.iter().find(|b| b.node.pattern.overlaps(&pattern)) {
            let msg = format!(
                "pattern {pattern} overlaps pattern {} on line {}",
                prev.node.pattern, prev.line
            );
            self.error(OVERLAPPING_BRANCHES, line, col, msg);
            return;
        }
        branches.push(Spanned {
            node: Branch { pattern, body },
            line,
            col,
        });
    }
}

/// Parses a script. On failure every diagnostic found is returned, in
/// source order.
pub fn parse(text: &str) -> Result<ScriptDocument, Vec<Diagnostic>> {
    let mut p = Parser {
        items: segment(text),
        pos: 0,
        cards: 0,
        diags: Vec::new(),
    };
    if p.items.is_empty() {
        return Err(vec![Diagnostic::new(
            MISSING_HEADER,
            1,
            1,
            "missing header",
        )]);
    }
    let header = p.header();
    if let Some(h) = &header {
        p.cards = h.node.cards;
        let body = p.block(None);
        if p.diags.is_empty() {
            return Ok(ScriptDocument {
                header: header.expect("checked"),
                body,
            });
        }
    }
    let mut diags = p.diags;
    diags.sort_by_key(|d| (d.line, d.col));
    Err(diags)
}
