use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{per_input, walk, Options, TraceKey};
use crate::deck::Observation;
use crate::error::{Error, Result};
use crate::prob::Prob;
use crate::protocol::{Domain, Input, Protocol};

/// A probability distribution over a protocol's inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prior {
    domain: Domain,
    weights: Vec<Prob>,
    label: String,
}

impl Prior {
    pub fn uniform(domain: Domain) -> Self {
        let size = domain.size();
        Prior {
            domain,
            weights: vec![Prob::reciprocal(size as u128); size],
            label: "uniform".into(),
        }
    }

    pub fn point(domain: Domain, input: &[u32]) -> Result<Self> {
        domain.check(input)?;
        let mut weights = vec![Prob::zero(); domain.size()];
        weights[domain.index_of(input)] = Prob::one();
        Ok(Prior {
            domain,
            weights,
            label: format!("point:{}", super::input_label(input)),
        })
    }

    /// Weights listed in the domain's lexicographic input order.
    pub fn from_weights(domain: Domain, weights: Vec<Prob>) -> Result<Self> {
        if weights.len() != domain.size() {
            return Err(Error::domain(format!(
                "prior needs {} weights, got {}",
                domain.size(),
                weights.len()
            )));
        }
        if weights.iter().any(Prob::is_negative) {
            return Err(Error::domain("prior weights must be non-negative"));
        }
        let total: Prob = weights.iter().cloned().sum();
        if total != Prob::one() {
            return Err(Error::domain(format!(
                "prior weights sum to {total}, not 1"
            )));
        }
        let label = format!(
            "weights:{}",
            weights
                .iter()
                .map(Prob::to_string)
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(Prior {
            domain,
            weights,
            label,
        })
    }

    /// `uniform`, `point:a1,a2,...` or `weights:p1,p2,...`.
    pub fn parse(text: &str, domain: Domain) -> Result<Self> {
        let text = text.trim();
        if text == "uniform" {
            return Ok(Prior::uniform(domain));
        }
        if let Some(rest) = text.strip_prefix("point:") {
            let input = rest
                .split(',')
                .map(|v| v.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::domain(format!("bad point prior {rest:?}: {e}")))?;
            return Prior::point(domain, &input);
        }
        if let Some(rest) = text.strip_prefix("weights:") {
            let weights = rest
                .split(',')
                .map(|v| v.trim().parse::<Prob>())
                .collect::<Result<Vec<_>>>()?;
            return Prior::from_weights(domain, weights);
        }
        Err(Error::domain(format!(
            "unknown prior {text:?}; use uniform, point:a1,... or weights:p1,..."
        )))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn weight(&self, input: &[u32]) -> &Prob {
        &self.weights[self.domain.index_of(input)]
    }
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputProbability {
    pub input: Input,
    pub probability: Prob,
}

/// Bayes posterior over inputs after one visible trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosteriorRow {
    pub trace: TraceKey,
    /// Probability of seeing this trace under the prior.
    pub probability: Prob,
    /// Inputs with non-zero posterior, in input order.
    pub posterior: Vec<InputProbability>,
    /// Whether the posterior is the prior restricted to the inputs whose
    /// output this trace can still lead to.
    pub matches_prior: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosteriorTable {
    pub prior: String,
    /// Number of reveals observed; `None` means whole traces.
    pub depth: Option<usize>,
    pub pass: bool,
    pub rows: Vec<PosteriorRow>,
}

impl PosteriorTable {
    /// The row for `trace`; a trace that cannot occur is a domain error.
    pub fn query(&self, trace: &[Observation]) -> Result<&PosteriorRow> {
        let key = TraceKey::new(trace);
        self.rows
            .binary_search_by(|r| r.trace.cmp(&key))
            .map(|i| &self.rows[i])
            .map_err(|_| Error::domain(format!("trace {key} has probability zero")))
    }

    /// Posterior probability of `input` given `trace`.
    pub fn posterior(&self, trace: &[Observation], input: &[u32]) -> Result<Prob> {
        let row = self.query(trace)?;
        Ok(row
            .posterior
            .iter()
            .find(|e| e.input == input)
            .map_or_else(Prob::zero, |e| e.probability.clone()))
    }
}

/// Per trace: probability given the input, and the public outputs (`None`
/// for hidden ones) that paths through it end in.
type Seen = BTreeMap<TraceKey, (Prob, BTreeSet<Option<i64>>)>;

/// Posterior over inputs for every trace (cut to its first `depth` reveals)
/// with positive probability under `prior`.
pub fn kwh_posteriors(
    protocol: &Protocol,
    prior: &Prior,
    depth: Option<usize>,
    opts: &Options,
) -> Result<PosteriorTable> {
    if prior.domain() != protocol.domain() {
        return Err(Error::domain(
            "the prior and the protocol have different domains",
        ));
    }
    let per = per_input(protocol, opts, |x, budget| {
        let mut seen = Seen::new();
        if prior.weight(x).is_zero() {
            return Ok(seen);
        }
        walk(
            protocol,
            x,
            budget,
            None,
            &mut |_| {},
            &mut |cursor, result| {
                let trace = cursor.trace();
                let cut = depth.map_or(trace.len(), |d| d.min(trace.len()));
                let entry = seen
                    .entry(TraceKey::new(&trace[..cut]))
                    .or_insert_with(|| (Prob::zero(), BTreeSet::new()));
                entry.0 += Prob::reciprocal(cursor.denominator());
                entry.1.insert(result.public_value());
            },
        )?;
        Ok(seen)
    })?;

    let mut traces: BTreeMap<TraceKey, (Vec<(usize, Prob)>, BTreeSet<Option<i64>>)> =
        BTreeMap::new();
    for (i, (_, seen)) in per.iter().enumerate() {
        for (key, (p, reach)) in seen {
            let e = traces.entry(key.clone()).or_default();
            e.0.push((i, p.clone()));
            e.1.extend(reach.iter().copied());
        }
    }

    let inputs: Vec<&Input> = per.iter().map(|(x, _)| x).collect();
    let spec = protocol.spec();
    let mut rows = Vec::with_capacity(traces.len());
    for (trace, (likelihoods, reach)) in traces {
        let joint: Vec<(usize, Prob)> = likelihoods
            .into_iter()
            .map(|(i, p)| (i, prior.weight(inputs[i]).clone() * p))
            .collect();
        let evidence: Prob = joint.iter().map(|(_, p)| p.clone()).sum();
        let posterior: Vec<InputProbability> = joint
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, p)| InputProbability {
                input: inputs[i].clone(),
                probability: p / evidence.clone(),
            })
            .collect();

        let hidden = reach.contains(&None);
        let allowed = |x: &Input| hidden || reach.contains(&Some(spec.eval(x)));
        let mass: Prob = inputs
            .iter()
            .filter(|x| allowed(x))
            .map(|x| prior.weight(x).clone())
            .sum();
        let expected: Vec<InputProbability> = inputs
            .iter()
            .filter(|x| allowed(x) && !prior.weight(x).is_zero())
            .map(|x| InputProbability {
                input: (*x).clone(),
                probability: prior.weight(x).clone() / mass.clone(),
            })
            .collect();

        rows.push(PosteriorRow {
            matches_prior: expected == posterior,
            trace,
            probability: evidence,
            posterior,
        });
    }
    Ok(PosteriorTable {
        prior: prior.to_string(),
        depth,
        pass: rows.iter().all(|r| r.matches_prior),
        rows,
    })
}
