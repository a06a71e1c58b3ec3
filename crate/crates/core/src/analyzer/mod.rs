//! Exhaustive execution of protocols over every input and every shuffle
//! outcome, with exact probabilities.

mod correctness;
mod gadget;
mod posterior;
mod report;
mod resources;
mod sample;
mod security;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

pub use correctness::{verify_correctness, CorrectnessReport, Counterexample, DeadBranch};
pub use gadget::{action_distribution, fragment_distribution, precut_rotation_classes};
pub use posterior::{kwh_posteriors, InputProbability, PosteriorRow, PosteriorTable, Prior};
pub use report::{build_report, Report};
pub use resources::{count_resources, KindCount, ResourceCount};
pub use sample::{sample_paths, trace_probability, SampleReport};
pub use security::{verify_security, SecurityReport, TraceDistribution, Violation};

use crate::deck::{Observation, Scheme, Suit};
use crate::error::{Error, Result};
use crate::prob::Prob;
use crate::protocol::{Cursor, Event, Input, Next, Protocol, StepBudget, Stmt};
use crate::shuffle::RandomChoice;

/// What a finished path produces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProtocolResult {
    Public(i64),
    /// Face-down commitment; `value` is known only to the analyzer.
    Committed {
        positions: [usize; 2],
        value: u8,
    },
    /// Face-down integer encoding; `value` is known only to the analyzer.
    Encoded {
        positions: Vec<usize>,
        scheme: Scheme,
        value: usize,
    },
}

impl ProtocolResult {
    pub fn value(&self) -> i64 {
        match self {
            ProtocolResult::Public(v) => *v,
            ProtocolResult::Committed { value, .. } => *value as i64,
            ProtocolResult::Encoded { value, .. } => *value as i64,
        }
    }

    pub fn public_value(&self) -> Option<i64> {
        match self {
            ProtocolResult::Public(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for ProtocolResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |ps: &[usize]| {
            ps.iter()
                .map(|p| (p + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            ProtocolResult::Public(v) => write!(f, "public {v}"),
            ProtocolResult::Committed { positions, value } => {
                write!(f, "committed {} = {value}", list(positions))
            }
            ProtocolResult::Encoded {
                positions,
                scheme,
                value,
            } => write!(f, "encoded {scheme} {} = {value}", list(positions)),
        }
    }
}

/// A visible trace packed into bytes: per card turned up, a big-endian
/// `u16` of `position << 1 | suit`, with `0xFFFF` closing each reveal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceKey(Box<[u8]>);

impl TraceKey {
    pub fn new(trace: &[Observation]) -> Self {
        let mut bytes = Vec::new();
        for obs in trace {
            for (&p, &s) in obs.positions().iter().zip(obs.suits()) {
                debug_assert!(p < 0x7FFF);
                let word = ((p as u16) << 1) | (s == Suit::Heart) as u16;
                bytes.extend(word.to_be_bytes());
            }
            bytes.extend([0xFF, 0xFF]);
        }
        TraceKey(bytes.into_boxed_slice())
    }

    pub fn observations(&self) -> Vec<Observation> {
        let mut out = Vec::new();
        let (mut ps, mut ss) = (Vec::new(), Vec::new());
        for chunk in self.0.chunks_exact(2) {
            let word = u16::from_be_bytes([chunk[0], chunk[1]]);
            if word == 0xFFFF {
                out.push(Observation::new(
                    std::mem::take(&mut ps),
                    std::mem::take(&mut ss),
                ));
            } else {
                ps.push((word >> 1) as usize);
                ss.push(if word & 1 == 1 {
                    Suit::Heart
                } else {
                    Suit::Club
                });
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.0
            .chunks_exact(2)
            .filter(|c| c == &[0xFF, 0xFF])
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TraceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let obs = self.observations();
        if obs.is_empty() {
            return f.write_str("(nothing shown)");
        }
        let parts: Vec<String> = obs.iter().map(Observation::to_string).collect();
        f.write_str(&parts.join(" | "))
    }
}

impl Serialize for TraceKey {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One complete execution path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub input: Input,
    pub choices: Vec<RandomChoice>,
    pub trace: Vec<Observation>,
    pub probability: Prob,
    pub result: ProtocolResult,
}

/// Enumeration settings shared by the analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    /// Statements executed per input before giving up.
    pub budget: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

pub const DEFAULT_BUDGET: u64 = 200_000_000;

impl Default for Options {
    fn default() -> Self {
        Options {
            budget: DEFAULT_BUDGET,
            threads: None,
        }
    }
}

impl Options {
    /// Defaults, with the worker count taken from `CARDPROTO_THREADS`.
    pub fn from_env() -> Result<Self> {
        let threads = match std::env::var("CARDPROTO_THREADS") {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Some(n),
                _ => {
                    return Err(Error::domain(format!(
                        "CARDPROTO_THREADS must be a positive integer, got {v:?}"
                    )))
                }
            },
            Err(_) => None,
        };
        Ok(Options {
            threads,
            ..Options::default()
        })
    }

    /// Maps `f` over `items` in parallel, keeping their order.
    pub(crate) fn par_map<T, R, F>(&self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        use rayon::prelude::*;
        match self.threads {
            None => Ok(items.par_iter().map(f).collect()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
                Ok(pool.install(|| items.par_iter().map(f).collect()))
            }
        }
    }
}

/// Depth-first walk over every path of `protocol` on `input`, in
/// lexicographic order of choice vectors. With `prefix`, only paths whose
/// full trace equals `prefix` are visited.
pub(crate) fn walk<'p>(
    protocol: &'p Protocol,
    input: &[u32],
    budget: &mut StepBudget,
    prefix: Option<&[Observation]>,
    hook: &mut dyn FnMut(Event<'_>),
    visit: &mut dyn FnMut(Cursor<'p>, ProtocolResult),
) -> Result<()> {
    let mut stack = vec![Cursor::start(protocol, input)?];
    while let Some(mut cursor) = stack.pop() {
        match cursor.advance(budget, prefix, hook)? {
            Next::Done(result) => {
                if prefix.is_none_or(|p| p.len() == cursor.trace().len()) {
                    visit(cursor, result);
                }
            }
            Next::Pruned => {}
            Next::Shuffle(action) => {
                for i in (0..action.size()).rev() {
                    let mut next = cursor.clone();
                    next.choose(action, i, hook)?;
                    stack.push(next);
                }
            }
        }
    }
    Ok(())
}

/// Every execution path of `protocol` on `input`.
pub fn enumerate_runs(
    protocol: &Protocol,
    input: &[u32],
    budget: &mut StepBudget,
) -> Result<Vec<RunOutcome>> {
    protocol.domain().check(input)?;
    let mut out = Vec::new();
    walk(
        protocol,
        input,
        budget,
        None,
        &mut |_| {},
        &mut |cursor, result| {
            let (input, choices, trace, denom) = cursor.into_parts();
            out.push(RunOutcome {
                input,
                choices,
                trace,
                probability: Prob::reciprocal(denom),
                result,
            });
        },
    )?;
    Ok(out)
}

/// Records which arm each reveal took, as `(reveal id, arm index)`.
pub(crate) fn arm_recorder(taken: &mut BTreeSet<(usize, usize)>) -> impl FnMut(Event<'_>) + '_ {
    move |event| {
        if let Event::Stmt {
            stmt: Stmt::Reveal(r),
            observation: Some(obs),
            ..
        } = event
        {
            if let Some(i) = r.arms.iter().position(|a| a.pattern.matches(obs.suits())) {
                taken.insert((r.id, i));
            }
        }
    }
}

/// Runs `f` on every input of the protocol's domain in parallel, turning a
/// budget overrun into an error naming the first input that hit it.
pub(crate) fn per_input<R, F>(protocol: &Protocol, opts: &Options, f: F) -> Result<Vec<(Input, R)>>
where
    R: Send,
    F: Fn(&Input, &mut StepBudget) -> Result<R> + Sync + Send,
{
    let inputs = protocol.domain().inputs();
    let results = opts.par_map(&inputs, |x| {
        let mut budget = StepBudget::new(opts.budget);
        f(x, &mut budget)
    })?;
    let total = inputs.len();
    let mut out = Vec::with_capacity(total);
    for (completed, (x, r)) in inputs.into_iter().zip(results).enumerate() {
        match r {
            Ok(v) => out.push((x, v)),
            Err(Error::Budget { budget }) => {
                return Err(Error::InputBudget {
                    budget,
                    input: input_label(&x),
                    completed,
                    total,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Runs every path of every input, reporting the first failure in input
/// order together with the input's label.
pub fn per_input_checked(
    protocol: &Protocol,
    opts: &Options,
) -> std::result::Result<(), (String, Error)> {
    let inputs = protocol.domain().inputs();
    let results = opts
        .par_map(&inputs, |x| {
            let mut budget = StepBudget::new(opts.budget);
            walk(protocol, x, &mut budget, None, &mut |_| {}, &mut |_, _| {})
        })
        .map_err(|e| (String::new(), e))?;
    for (x, r) in inputs.iter().zip(results) {
        r.map_err(|e| (input_label(x), e))?;
    }
    Ok(())
}

pub fn input_label(x: &[u32]) -> String {
    x.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// Whether any leaf announces a public value; if none does, the output is
/// hidden and traces must not depend on the input at all.
pub(crate) fn has_public_output(protocol: &Protocol) -> bool {
    fn any_public(block: &[Stmt]) -> bool {
        block.iter().any(|s| match s {
            Stmt::Output(crate::protocol::ResultRule::Public(_)) => true,
            Stmt::Reveal(r) => r.arms.iter().any(|a| any_public(&a.body)),
            _ => false,
        })
    }
    any_public(protocol.body())
}

/// Security class of an input: its function value if outputs are public.
pub(crate) fn class_of(protocol: &Protocol, public: bool, x: &[u32]) -> Option<i64> {
    public.then(|| protocol.spec().eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{equality_second, five_card_trick, Layout, LayoutItem, Protocol};
    use crate::protocol::{Domain, FunctionSpec, Params, ResultRule, Target};

    #[test]
    fn five_card_trick_on_ones() {
        let p = five_card_trick().unwrap();
        let runs = enumerate_runs(&p, &[1, 1], &mut StepBudget::new(1000)).unwrap();
        assert_eq!(runs.len(), 5);
        for r in &runs {
            assert_eq!(r.probability, Prob::new(1, 5));
            assert_eq!(r.result, ProtocolResult::Public(1));
        }
    }

    #[test]
    fn equality_second_three_has_four_paths() {
        let p = equality_second(3).unwrap();
        for x in p.domain().inputs() {
            let runs = enumerate_runs(&p, &x, &mut StepBudget::new(1000)).unwrap();
            assert_eq!(runs.len(), 4);
            let total: Prob = runs.iter().map(|r| r.probability.clone()).sum();
            assert_eq!(total, Prob::one());
        }
    }

    #[test]
    fn no_shuffle_means_one_certain_path() {
        let spec = FunctionSpec::new(Target::And, Domain::Bits { n: 1 }).unwrap();
        let p = Protocol::new(
            "copy",
            Params::new(),
            Layout::new(vec![LayoutItem::Commit(0)]),
            vec![Stmt::Output(ResultRule::Committed([0, 1]))],
            spec,
        )
        .unwrap();
        let runs = enumerate_runs(&p, &[1], &mut StepBudget::new(10)).unwrap();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].probability, Prob::one());
        assert_eq!(runs[0].result.value(), 1);
    }

    #[test]
    fn budget_stops_enumeration() {
        let p = five_card_trick().unwrap();
        let err = enumerate_runs(&p, &[1, 1], &mut StepBudget::new(3)).unwrap_err();
        assert_eq!(err, Error::Budget { budget: 3 });
    }

    #[test]
    fn trace_keys_round_trip() {
        let obs = vec![
            Observation::new(vec![4, 5], vec![Suit::Club, Suit::Heart]),
            Observation::new(vec![0], vec![Suit::Heart]),
        ];
        let key = TraceKey::new(&obs);
        assert_eq!(key.observations(), obs);
        assert_eq!(key.len(), 2);
        assert_eq!(key.to_string(), "5,6=CH | 1=H");
        assert_eq!(TraceKey::new(&[]).to_string(), "(nothing shown)");
    }
}
