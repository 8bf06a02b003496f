use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::scenario::Scenario;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(pass: bool, detail: Option<String>) -> Self {
        Check { pass, detail }
    }

    /// Passes iff there is no discrepancy.
    pub fn clean<D: ToString>(defect: Option<D>) -> Self {
        Check { pass: defect.is_none(), detail: defect.map(|d| d.to_string()) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub outputs: BTreeMap<String, Value>,
    pub certificates: BTreeMap<String, Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl Report {
    /// A run that raised `error`. A scenario may expect this with an
    /// `"error"` entry naming a substring of the message.
    pub fn failed(scenario: &Scenario, error: String) -> Self {
        let mut certificates = BTreeMap::new();
        let mut verdict = Verdict::Error;
        if let Some(want) = scenario.expect.get("error") {
            let hit = want.as_str().is_some_and(|w| error.contains(w));
            let detail = (!hit).then(|| format!("expected an error containing {want}"));
            certificates.insert("expect:error".to_string(), Check::new(hit, detail));
            if hit {
                verdict = Verdict::Pass;
            }
        }
        Report {
            scenario: scenario.clone(),
            verdict,
            error: Some(error),
            outputs: BTreeMap::new(),
            certificates,
            elapsed_ms: None,
        }
    }

    /// Builds the report, turning each expectation into a check. A certificate
    /// named in an expectation is judged by that expectation alone.
    pub fn finish(
        scenario: &Scenario,
        outputs: BTreeMap<String, Value>,
        mut certificates: BTreeMap<String, Check>,
    ) -> Self {
        let mut judged: Vec<String> = Vec::new();
        let mut expectations = BTreeMap::new();
        for (key, want) in &scenario.expect {
            if key == "error" {
                expectations.insert("expect:error".to_string(), Check::new(false, Some("run did not fail".into())));
                continue;
            }
            let got = match key.split_once('.') {
                Some(("outputs", name)) => outputs.get(name).cloned(),
                Some(("certificates", name)) => {
                    judged.push(name.to_string());
                    certificates.get(name).map(|c| Value::Bool(c.pass))
                }
                _ => None,
            };
            let check = match got {
                Some(v) if &v == want => Check::new(true, None),
                Some(v) => Check::new(false, Some(format!("expected {want}, got {v}"))),
                None => Check::new(false, Some(format!("no value named {key}"))),
            };
            expectations.insert(format!("expect:{key}"), check);
        }
        let pass = certificates.iter().all(|(name, c)| c.pass || judged.contains(name))
            && expectations.values().all(|c| c.pass);
        certificates.extend(expectations);
        Report {
            scenario: scenario.clone(),
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            error: None,
            outputs,
            certificates,
            elapsed_ms: None,
        }
    }

    pub fn exit_code(&self, report_only: bool) -> u8 {
        match self.verdict {
            Verdict::Error => 2,
            Verdict::Fail if !report_only => 1,
            _ => 0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
