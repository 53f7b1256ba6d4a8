use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// The estimate is within three standard errors of the reference range.
    Consistent,
    /// The estimate lies more than three standard errors outside it.
    Violated,
    /// The bound carries no information (a probability bound of at least 1).
    Vacuous,
    /// Too few samples to judge.
    Inconclusive,
    /// No reference value; reported for inspection only.
    Exploratory,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
            Verdict::Vacuous => "vacuous",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Exploratory => "exploratory",
        }
    }
}

/// `violated` iff `estimate − 3·se > upper` or `estimate + 3·se < lower`.
pub fn judge(estimate: f64, std_error: f64, lower: Option<f64>, upper: Option<f64>) -> Verdict {
    let above = upper.is_some_and(|u| estimate - 3.0 * std_error > u);
    let below = lower.is_some_and(|l| estimate + 3.0 * std_error < l);
    if above || below {
        Verdict::Violated
    } else {
        Verdict::Consistent
    }
}

/// One row of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub label: String,
    pub analytical: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub verdict: Verdict,
    pub details: BTreeMap<String, f64>,
}

impl Cell {
    /// A cell judged against `[lower, upper]`.
    pub fn judged(
        label: impl Into<String>,
        analytical: Option<f64>,
        lower: Option<f64>,
        upper: Option<f64>,
        estimate: f64,
        std_error: f64,
        samples: u64,
    ) -> Self {
        Cell {
            label: label.into(),
            analytical,
            lower,
            upper,
            estimate,
            std_error,
            samples,
            verdict: judge(estimate, std_error, lower, upper),
            details: BTreeMap::new(),
        }
    }

    pub fn with_verdict(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        self
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub cells: Vec<Cell>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>) -> Self {
        ExperimentReport { name: name.into(), cells: Vec::new() }
    }

    pub fn any_violated(&self) -> bool {
        self.cells.iter().any(|c| c.verdict == Verdict::Violated)
    }

    pub fn cell(&self, label: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// `name,label,analytical,lower,upper,estimate,std_error,samples,verdict,details`
    /// with details packed as `key=value` pairs separated by `;`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record([
            "name", "label", "analytical", "lower", "upper", "estimate", "std_error", "samples", "verdict", "details",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.cells {
            let details =
                c.details.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
            w.write_record([
                self.name.clone(),
                c.label.clone(),
                opt(c.analytical),
                opt(c.lower),
                opt(c.upper),
                c.estimate.to_string(),
                c.std_error.to_string(),
                c.samples.to_string(),
                c.verdict.as_str().to_string(),
                details,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn judge_rule() {
        assert_eq!(judge(0.5, 0.1, Some(0.0), Some(0.19)), Verdict::Violated);
        assert_eq!(judge(0.5, 0.1, Some(0.0), Some(0.21)), Verdict::Consistent);
        assert_eq!(judge(-0.5, 0.1, Some(0.0), None), Verdict::Violated);
        assert_eq!(judge(-0.29, 0.1, Some(0.0), None), Verdict::Consistent);
        assert_eq!(judge(100.0, 0.0, None, None), Verdict::Consistent);
    }

    #[test]
    fn csv_and_json_layout() {
        let mut r = ExperimentReport::new("demo");
        r.cells.push(Cell::judged("a", Some(1.0), None, Some(2.0), 1.5, 0.25, 10).detail("k", 0.5));
        r.cells.push(Cell::judged("b", None, None, None, 3.0, 0.0, 1).with_verdict(Verdict::Exploratory));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "name,label,analytical,lower,upper,estimate,std_error,samples,verdict,details\n\
             demo,a,1,,2,1.5,0.25,10,consistent,k=0.5\n\
             demo,b,,,,3,0,1,exploratory,\n"
        );
        let back: ExperimentReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(!r.any_violated());
    }
}
