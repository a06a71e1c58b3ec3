use std::collections::BTreeSet;

use serde::Serialize;

use super::{arm_recorder, per_input, walk, Options, TraceKey};
use crate::error::{Error, Result};
use crate::protocol::{FunctionSpec, Input, Protocol, Stmt};

/// Counterexamples kept in a report; the count of failing paths is exact.
const MAX_COUNTEREXAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub input: Input,
    /// Index chosen at each shuffle along the path.
    pub choices: Vec<usize>,
    pub trace: TraceKey,
    pub expected: i64,
    pub got: String,
}

/// A branch arm that no input and no shuffle outcome ever reaches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeadBranch {
    pub reveal: usize,
    pub pattern: String,
    #[serde(skip)]
    pub line: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrectnessReport {
    pub pass: bool,
    pub inputs: usize,
    pub paths: u64,
    pub failing_paths: u64,
    pub counterexamples: Vec<Counterexample>,
    pub dead_branches: Vec<DeadBranch>,
}

struct InputCheck {
    paths: u64,
    failing: u64,
    counterexamples: Vec<Counterexample>,
    taken: BTreeSet<(usize, usize)>,
}

/// Checks that every path on every input produces `spec`'s value.
pub fn verify_correctness(
    protocol: &Protocol,
    spec: &FunctionSpec,
    opts: &Options,
) -> Result<CorrectnessReport> {
    if spec.domain() != protocol.domain() {
        return Err(Error::domain(
            "the function and the protocol have different domains",
        ));
    }
    let checks = per_input(protocol, opts, |x, budget| {
        let expected = spec.eval(x);
        let mut check = InputCheck {
            paths: 0,
            failing: 0,
            counterexamples: Vec::new(),
            taken: BTreeSet::new(),
        };
        let mut taken = BTreeSet::new();
        walk(
            protocol,
            x,
            budget,
            None,
            &mut arm_recorder(&mut taken),
            &mut |cursor, result| {
                check.paths += 1;
                if result.value() != expected {
                    check.failing += 1;
                    if check.counterexamples.len() < MAX_COUNTEREXAMPLES {
                        check.counterexamples.push(Counterexample {
                            input: x.clone(),
                            choices: cursor.choices().iter().map(|c| c.index).collect(),
                            trace: TraceKey::new(cursor.trace()),
                            expected,
                            got: result.to_string(),
                        });
                    }
                }
            },
        )?;
        check.taken = taken;
        Ok(check)
    })?;

    let mut report = CorrectnessReport {
        pass: true,
        inputs: checks.len(),
        paths: 0,
        failing_paths: 0,
        counterexamples: Vec::new(),
        dead_branches: Vec::new(),
    };
    let mut taken = BTreeSet::new();
    for (_, check) in checks {
        report.paths += check.paths;
        report.failing_paths += check.failing;
        let room = MAX_COUNTEREXAMPLES - report.counterexamples.len();
        report
            .counterexamples
            .extend(check.counterexamples.into_iter().take(room));
        taken.extend(check.taken);
    }
    report.pass = report.failing_paths == 0;
    report.dead_branches = dead_branches(protocol.body(), &taken);
    Ok(report)
}

fn dead_branches(block: &[Stmt], taken: &BTreeSet<(usize, usize)>) -> Vec<DeadBranch> {
    let mut out = Vec::new();
    for stmt in block {
        if let Stmt::Reveal(r) = stmt {
            for (i, arm) in r.arms.iter().enumerate() {
                if !taken.contains(&(r.id, i)) {
                    out.push(DeadBranch {
                        reveal: r.id,
                        pattern: arm.pattern.to_string(),
                        line: r.line,
                    });
                }
                out.extend(dead_branches(&arm.body, taken));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{
        equality_first, equality_first_sabotaged, five_card_trick, Domain, Sabotage, Target,
    };

    #[test]
    fn five_card_trick_is_correct() {
        let p = five_card_trick().unwrap();
        let r = verify_correctness(&p, p.spec(), &Options::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.paths, 20);
        assert!(r.dead_branches.is_empty());
    }

    #[test]
    fn wrong_function_gives_counterexamples() {
        let p = five_card_trick().unwrap();
        let or = FunctionSpec::new(Target::Table(vec![0, 1, 1, 1]), Domain::Bits { n: 2 }).unwrap();
        let r = verify_correctness(&p, &or, &Options::default()).unwrap();
        assert!(!r.pass);
        // inputs (0,1) and (1,0) disagree on all 5 paths each
        assert_eq!(r.failing_paths, 10);
        assert_eq!(r.counterexamples[0].input, vec![0, 1]);
        assert_eq!(r.counterexamples[0].expected, 1);
    }

    #[test]
    fn missing_final_cut_is_still_correct() {
        let p = equality_first_sabotaged(4, Sabotage::NoFinalCut).unwrap();
        assert!(
            verify_correctness(&p, p.spec(), &Options::default())
                .unwrap()
                .pass
        );
    }

    #[test]
    fn equality_first_four() {
        let p = equality_first(4).unwrap();
        let r = verify_correctness(&p, p.spec(), &Options::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.inputs, 16);
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let p = five_card_trick().unwrap();
        let f = FunctionSpec::new(Target::And, Domain::Bits { n: 3 }).unwrap();
        assert!(verify_correctness(&p, &f, &Options::default()).is_err());
    }
}
