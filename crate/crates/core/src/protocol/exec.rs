//! Stepping one execution path through a protocol.

use super::{Input, Protocol, ResultRule, Stmt};
use crate::deck::{CardSequence, Commitment, IntEncoding, Observation};
use crate::error::{Error, Result};
use crate::shuffle::{RandomChoice, ShuffleAction};

/// Caps the number of statements executed across an enumeration.
#[derive(Debug, Clone, Copy)]
pub struct StepBudget {
    pub limit: u64,
    pub used: u64,
}

impl StepBudget {
    pub fn new(limit: u64) -> Self {
        StepBudget { limit, used: 0 }
    }

    fn charge(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            return Err(Error::Budget { budget: self.limit });
        }
        Ok(())
    }
}

/// Something that happened while stepping, for renderers.
#[derive(Debug)]
pub enum Event<'a> {
    Stmt {
        stmt: &'a Stmt,
        row: &'a CardSequence,
        observation: Option<&'a Observation>,
    },
    Shuffled {
        action: &'a ShuffleAction,
        choice: RandomChoice,
        row: &'a CardSequence,
    },
}

pub enum Next<'a> {
    /// A shuffle must be resolved with [`Cursor::choose`].
    Shuffle(&'a ShuffleAction),
    Done(crate::analyzer::ProtocolResult),
    /// The observed trace left the required prefix.
    Pruned,
}

/// The state of one path: current row, what has been seen, and where
/// execution resumes.
#[derive(Debug, Clone)]
pub struct Cursor<'a> {
    protocol: &'a Protocol,
    input: Input,
    frames: Vec<(&'a [Stmt], usize)>,
    row: CardSequence,
    trace: Vec<Observation>,
    choices: Vec<RandomChoice>,
    denom: u128,
}

impl<'a> Cursor<'a> {
    pub fn start(protocol: &'a Protocol, input: &[u32]) -> Result<Self> {
        let row = protocol.initial_row(input)?;
        Ok(Cursor {
            protocol,
            input: input.to_vec(),
            frames: vec![(protocol.body(), 0)],
            row,
            trace: Vec::new(),
            choices: Vec::new(),
            denom: 1,
        })
    }

    pub fn row(&self) -> &CardSequence {
        &self.row
    }

    pub fn trace(&self) -> &[Observation] {
        &self.trace
    }

    pub fn choices(&self) -> &[RandomChoice] {
        &self.choices
    }

    pub fn input(&self) -> &Input {
        &self.input
    }

    /// Denominator of the path probability so far (numerator is 1).
    pub fn denominator(&self) -> u128 {
        self.denom
    }

    /// Runs deterministic statements until a shuffle or an output.
    ///
    /// With `prefix`, stops with [`Next::Pruned`] as soon as the trace stops
    /// agreeing with it.
    pub fn advance(
        &mut self,
        budget: &mut StepBudget,
        prefix: Option<&[Observation]>,
        hook: &mut dyn FnMut(Event<'_>),
    ) -> Result<Next<'a>> {
        loop {
            let Some(frame) = self.frames.last_mut() else {
                return Err(Error::NoOutput);
            };
            let (block, idx): (&'a [Stmt], usize) = (frame.0, frame.1);
            if idx >= block.len() {
                self.frames.pop();
                continue;
            }
            frame.1 += 1;
            let stmt = &block[idx];
            budget.charge()?;
            match stmt {
                Stmt::Perm(p) => {
                    self.row = self.row.apply_perm(p)?;
                    hook(Event::Stmt {
                        stmt,
                        row: &self.row,
                        observation: None,
                    });
                }
                Stmt::Shuffle(action) => return Ok(Next::Shuffle(action)),
                Stmt::Conceal(ps) => {
                    if let Some(p) = ps.iter().find(|&&p| !self.row.cards()[p].is_face_up()) {
                        return Err(Error::domain(format!(
                            "conceal of face-down card {}",
                            p + 1
                        )));
                    }
                    self.row = self.row.turn_over(ps)?.0;
                    hook(Event::Stmt {
                        stmt,
                        row: &self.row,
                        observation: None,
                    });
                }
                Stmt::Reveal(r) => {
                    if let Some(p) = r
                        .positions
                        .iter()
                        .find(|&&p| self.row.cards()[p].is_face_up())
                    {
                        return Err(Error::domain(format!("reveal of face-up card {}", p + 1)));
                    }
                    let (row, obs) = self.row.turn_over(&r.positions)?;
                    self.row = row;
                    if let Some(prefix) = prefix {
                        match prefix.get(self.trace.len()) {
                            Some(expected) if *expected == obs => {}
                            _ => return Ok(Next::Pruned),
                        }
                    }
                    hook(Event::Stmt {
                        stmt,
                        row: &self.row,
                        observation: Some(&obs),
                    });
                    if !r.arms.is_empty() {
                        let arm = r
                            .arms
                            .iter()
                            .find(|a| a.pattern.matches(obs.suits()))
                            .ok_or_else(|| Error::Uncovered {
                                reveal: r.id,
                                observed: obs.to_string(),
                            })?;
                        self.frames.push((&arm.body, 0));
                    }
                    self.trace.push(obs);
                }
                Stmt::Output(rule) => {
                    hook(Event::Stmt {
                        stmt,
                        row: &self.row,
                        observation: None,
                    });
                    return Ok(Next::Done(self.read_result(rule)?));
                }
            }
        }
    }

    /// Resolves the pending shuffle with outcome `index`.
    pub fn choose(
        &mut self,
        action: &ShuffleAction,
        index: usize,
        hook: &mut dyn FnMut(Event<'_>),
    ) -> Result<()> {
        let perm = action
            .permutations()
            .get(index)
            .ok_or_else(|| Error::domain(format!("shuffle has no outcome {index}")))?;
        self.row = self.row.apply_perm(perm)?;
        let choice = RandomChoice {
            index,
            of: action.size(),
        };
        self.denom = self
            .denom
            .checked_mul(choice.of as u128)
            .ok_or(Error::Overflow)?;
        self.choices.push(choice);
        hook(Event::Shuffled {
            action,
            choice,
            row: &self.row,
        });
        Ok(())
    }

    fn read_result(&self, rule: &ResultRule) -> Result<crate::analyzer::ProtocolResult> {
        use crate::analyzer::ProtocolResult;
        let face_down = |ps: &[usize]| -> Result<()> {
            match ps.iter().find(|&&p| self.row.cards()[p].is_face_up()) {
                Some(p) => Err(Error::domain(format!("output card {} is face-up", p + 1))),
                None => Ok(()),
            }
        };
        Ok(match rule {
            ResultRule::Public(v) => ProtocolResult::Public(*v),
            ResultRule::Committed(ps) => {
                face_down(ps)?;
                let suits = self.row.peek(ps)?;
                let c = Commitment::from_suits(suits[0], suits[1])?;
                ProtocolResult::Committed {
                    positions: *ps,
                    value: c.value(),
                }
            }
            ResultRule::Encoded { positions, scheme } => {
                face_down(positions)?;
                let e = IntEncoding::decode(&self.row.peek(positions)?, *scheme)?;
                ProtocolResult::Encoded {
                    positions: positions.clone(),
                    scheme: *scheme,
                    value: e.value,
                }
            }
        })
    }

    pub(crate) fn into_parts(self) -> (Input, Vec<RandomChoice>, Vec<Observation>, u128) {
        (self.input, self.choices, self.trace, self.denom)
    }

    pub fn protocol(&self) -> &'a Protocol {
        self.protocol
    }
}
