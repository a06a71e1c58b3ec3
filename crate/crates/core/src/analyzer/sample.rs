//! Seeded random path sampling for protocols too large to enumerate.
//! Sampling can refute correctness or security, never prove them.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{class_of, has_public_output, walk, Counterexample, TraceKey, Violation};
use crate::deck::Observation;
use crate::error::{Error, Result};
use crate::prob::Prob;
use crate::protocol::{Cursor, Input, Next, Params, Protocol, StepBudget};

/// Exact probability that `input` produces exactly `trace`, exploring only
/// the paths consistent with it.
pub fn trace_probability(
    protocol: &Protocol,
    input: &[u32],
    trace: &[Observation],
    budget: &mut StepBudget,
) -> Result<Prob> {
    protocol.domain().check(input)?;
    let mut total = Prob::zero();
    walk(
        protocol,
        input,
        budget,
        Some(trace),
        &mut |_| {},
        &mut |cursor, _| {
            total += Prob::reciprocal(cursor.denominator());
        },
    )?;
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampledCorrectness {
    pub pass: bool,
    pub paths: u64,
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampledSecurity {
    pub pass: bool,
    pub comparisons: u64,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleReport {
    pub protocol: String,
    pub params: Params,
    pub mode: &'static str,
    pub seed: u64,
    pub samples: u64,
    pub note: &'static str,
    pub correctness: SampledCorrectness,
    pub security: SampledSecurity,
}

/// Runs one path with shuffle outcomes drawn from `rng`.
pub(crate) fn random_path<'p>(
    protocol: &'p Protocol,
    input: &[u32],
    rng: &mut ChaCha8Rng,
    budget: &mut StepBudget,
) -> Result<(Cursor<'p>, super::ProtocolResult)> {
    let mut cursor = Cursor::start(protocol, input)?;
    loop {
        match cursor.advance(budget, None, &mut |_| {})? {
            Next::Done(result) => return Ok((cursor, result)),
            Next::Shuffle(action) => {
                let i = rng.gen_range(0..action.size());
                cursor.choose(action, i, &mut |_| {})?;
            }
            Next::Pruned => unreachable!("no prefix given"),
        }
    }
}

/// Samples `samples` random (input, path) pairs. Each path is checked
/// against the function; its trace is then compared, with exact
/// probabilities, against a random other input of the same output class.
pub fn sample_paths(
    protocol: &Protocol,
    samples: u64,
    seed: u64,
    budget: u64,
) -> Result<SampleReport> {
    if samples == 0 {
        return Err(Error::domain("sampling needs at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let public = has_public_output(protocol);
    let inputs = protocol.domain().inputs();
    let mut classes: BTreeMap<Option<i64>, Vec<usize>> = BTreeMap::new();
    for (i, x) in inputs.iter().enumerate() {
        classes
            .entry(class_of(protocol, public, x))
            .or_default()
            .push(i);
    }
    let spec = protocol.spec();
    let mut correctness = SampledCorrectness {
        pass: true,
        paths: 0,
        counterexamples: Vec::new(),
    };
    let mut security = SampledSecurity {
        pass: true,
        comparisons: 0,
        violations: Vec::new(),
    };
    for _ in 0..samples {
        let mut steps = StepBudget::new(budget);
        let x: &Input = &inputs[rng.gen_range(0..inputs.len())];
        let (cursor, result) = random_path(protocol, x, &mut rng, &mut steps)?;
        correctness.paths += 1;
        let expected = spec.eval(x);
        if result.value() != expected && correctness.counterexamples.len() < 16 {
            correctness.counterexamples.push(Counterexample {
                input: x.clone(),
                choices: cursor.choices().iter().map(|c| c.index).collect(),
                trace: TraceKey::new(cursor.trace()),
                expected,
                got: result.to_string(),
            });
        }

        let class = class_of(protocol, public, x);
        let peers = &classes[&class];
        if peers.len() < 2 {
            continue;
        }
        let mut y = x;
        while y == x {
            y = &inputs[peers[rng.gen_range(0..peers.len())]];
        }
        let trace = cursor.trace();
        let px = trace_probability(protocol, x, trace, &mut StepBudget::new(budget))?;
        let py = trace_probability(protocol, y, trace, &mut StepBudget::new(budget))?;
        security.comparisons += 1;
        if px != py && security.violations.len() < 16 {
            security.violations.push(Violation {
                output: class,
                inputs: [x.clone(), y.clone()],
                trace: TraceKey::new(trace),
                probabilities: [px, py],
            });
        }
    }
    correctness.pass = correctness.counterexamples.is_empty();
    security.pass = security.violations.is_empty();
    Ok(SampleReport {
        protocol: protocol.name().to_string(),
        params: protocol.params().clone(),
        mode: "sampled",
        seed,
        samples,
        note: "sampling can refute but not prove correctness or security",
        correctness,
        security,
    })
}
