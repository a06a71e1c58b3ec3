use serde::Serialize;

use super::{
    count_resources, kwh_posteriors, verify_correctness, verify_security, CorrectnessReport,
    Options, PosteriorTable, Prior, ResourceCount, SecurityReport,
};
use crate::error::Result;
use crate::protocol::{Params, Protocol};

/// Everything the analyzer says about one protocol. Field order and map
/// ordering are fixed, so serialization is byte-stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub protocol: String,
    pub params: Params,
    pub correctness: CorrectnessReport,
    pub security: SecurityReport,
    pub resources: ResourceCount,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posteriors: Option<PosteriorTable>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.correctness.pass
            && self.security.pass
            && self.posteriors.as_ref().is_none_or(|p| p.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Correctness, security and resources, plus posteriors when a prior is
/// given (with an optional reveal depth).
pub fn build_report(
    protocol: &Protocol,
    opts: &Options,
    prior: Option<(&Prior, Option<usize>)>,
) -> Result<Report> {
    let correctness = verify_correctness(protocol, protocol.spec(), opts)?;
    let security = verify_security(protocol, opts)?;
    let resources = count_resources(protocol)?;
    let posteriors = match prior {
        Some((prior, depth)) => Some(kwh_posteriors(protocol, prior, depth, opts)?),
        None => None,
    };
    Ok(Report {
        protocol: protocol.name().to_string(),
        params: protocol.params().clone(),
        correctness,
        security,
        resources,
        posteriors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::equality_first;

    #[test]
    fn report_shape() {
        let p = equality_first(3).unwrap();
        let r = build_report(&p, &Options::default(), None).unwrap();
        assert!(r.pass());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            ["correctness", "params", "protocol", "resources", "security"]
        );
        assert_eq!(v["params"]["n"], 3);
        assert_eq!(v["resources"]["cards"], 6);
        assert_eq!(v["resources"]["shuffles"], 3);
        let text = r.to_json();
        let order: Vec<usize> = [
            "\"protocol\"",
            "\"params\"",
            "\"correctness\"",
            "\"security\"",
        ]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
    }
}
