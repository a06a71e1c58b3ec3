//! The `.cardp` protocol description format.
//!
//! A script is a header followed by a line-oriented statement list; `branch`
//! blocks after a `reveal` are brace-delimited and `#` starts a comment.
//! Positions are 1-based in the text and 0-based in the tree.

mod elaborate;
mod parse;
mod print;

use std::fmt;

pub use elaborate::{elaborate, elaborate_with};
pub use parse::parse;
pub use print::serialize;

use crate::deck::Permutation;
use crate::protocol::{Domain, LayoutItem, Pattern, Protocol, ResultRule, Target};

/// A node with the place it was written. Positions are ignored by `==`, so
/// parsed and re-parsed documents compare equal.
#[derive(Debug, Clone)]
pub struct Spanned<T> {
    pub node: T,
    pub line: usize,
    pub col: usize,
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl<T: Eq> Eq for Spanned<T> {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub name: String,
    pub params: Vec<(String, serde_json::Value)>,
    pub domain: Domain,
    pub cards: usize,
    pub function: Target,
    pub layout: Vec<LayoutItem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub pattern: Pattern,
    pub body: Vec<Spanned<Statement>>,
}

/// Position lists are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Perm(Permutation),
    Shuffle(Vec<Permutation>),
    LShift {
        r: usize,
        on: Option<Vec<usize>>,
    },
    RShift {
        r: usize,
        on: Option<Vec<usize>>,
    },
    RCut(Vec<usize>),
    KSec {
        k: usize,
        on: Option<Vec<usize>>,
    },
    XorAll {
        on: Option<Vec<usize>>,
    },
    PCut(Vec<usize>),
    Reveal {
        positions: Vec<usize>,
        branches: Vec<Spanned<Branch>>,
    },
    Conceal(Vec<usize>),
    Output(ResultRule),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptDocument {
    pub header: Spanned<Header>,
    pub body: Vec<Spanned<Statement>>,
}

/// A positioned problem in a script. Codes `E0xx` come from parsing and
/// `E1xx` from elaboration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    pub(crate) fn new(
        code: &'static str,
        line: usize,
        col: usize,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            code,
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} {}",
            self.line, self.col, self.code, self.message
        )
    }
}

/// Diagnostic codes.
pub mod codes {
    pub const MISSING_HEADER: &str = "E001";
    pub const UNKNOWN_STATEMENT: &str = "E002";
    pub const BAD_CYCLES: &str = "E003";
    pub const POSITION_RANGE: &str = "E004";
    pub const OVERLAPPING_BRANCHES: &str = "E005";
    pub const BAD_ARGUMENT: &str = "E006";
    pub const BRACES: &str = "E007";
    pub const BAD_HEADER: &str = "E008";
    pub const STRAY_BRANCH: &str = "E009";
    pub const BAD_LAYOUT: &str = "E010";
    pub const BAD_FUNCTION: &str = "E011";

    pub const CARD_BUDGET: &str = "E101";
    pub const REVEAL_FACE_UP: &str = "E102";
    pub const NOT_EXHAUSTIVE: &str = "E103";
    pub const CONCEAL_FACE_DOWN: &str = "E104";
    pub const OUTPUT_FACE_UP: &str = "E105";
    pub const SHUFFLE_FACE_UP: &str = "E106";
    pub const ENUMERATION_BUDGET: &str = "E107";
    pub const NO_OUTPUT: &str = "E108";
    pub const UNREACHABLE: &str = "E109";
    pub const INVALID: &str = "E110";
}

/// Parses and elaborates in one step.
pub fn load(text: &str) -> Result<Protocol, Vec<Diagnostic>> {
    elaborate(&parse(text)?)
}

/// Renders diagnostics one per line, prefixed with `path`.
pub fn render_diagnostics(path: &str, diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{path}:{d}\n")).collect()
}
