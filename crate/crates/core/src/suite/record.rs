use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Report, RunConfig};
use crate::tolerances::Tolerances;

/// How a value is compared with its tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Rule {
    /// `value ≤ tolerance`.
    AtMost,
    /// `value ≥ −tolerance`.
    Slack,
    /// `|value − target| ≤ tolerance`.
    Near { target: f64 },
}

impl Rule {
    pub fn passes(&self, value: f64, tol: f64) -> bool {
        match *self {
            Rule::AtMost => value <= tol,
            Rule::Slack => value >= -tol,
            Rule::Near { target } => (value - target).abs() <= tol,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Rule::AtMost => "at-most".into(),
            Rule::Slack => "slack".into(),
            Rule::Near { target } => format!("near({target})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    /// The formula being checked.
    pub anchor: String,
    /// SHA-256 (first 16 bytes, hex) of the canonical JSON of the inputs.
    pub inputs_digest: String,
    pub inputs: serde_json::Value,
    /// Worst value over the sampled points; `None` if evaluation failed.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub rule: Rule,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub id: String,
    pub reason: String,
}

/// Plot-ready `(x, y)` data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub id: String,
    pub columns: [String; 2],
    pub rows: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

pub fn digest(inputs: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(inputs).expect("json value serializes");
    let h = Sha256::digest(&bytes);
    h[..16].iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) struct Recorder<'a> {
    tol: &'a Tolerances,
    checks: Vec<CheckRecord>,
    skips: Vec<SkipRecord>,
    series: Vec<Series>,
    notes: Vec<String>,
}

impl<'a> Recorder<'a> {
    pub fn new(tol: &'a Tolerances) -> Self {
        Recorder {
            tol,
            checks: Vec::new(),
            skips: Vec::new(),
            series: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn tolerances(&self) -> &Tolerances {
        self.tol
    }

    pub fn check(
        &mut self,
        id: String,
        anchor: &str,
        inputs: serde_json::Value,
        value: f64,
        rule: Rule,
        note: Option<String>,
    ) {
        let tolerance = self.tol.get(&id);
        let pass = rule.passes(value, tolerance);
        // JSON has no infinities; keep them visible in the note.
        let note = match note {
            None if !value.is_finite() => Some(format!("value is {value}")),
            n => n,
        };
        self.checks.push(CheckRecord {
            id,
            anchor: anchor.to_string(),
            inputs_digest: digest(&inputs),
            inputs,
            value: value.is_finite().then_some(value),
            tolerance,
            rule,
            pass,
            note,
        });
    }

    /// A check whose evaluation failed; always a failure.
    pub fn failed(
        &mut self,
        id: String,
        anchor: &str,
        inputs: serde_json::Value,
        rule: Rule,
        note: String,
    ) {
        let tolerance = self.tol.get(&id);
        self.checks.push(CheckRecord {
            id,
            anchor: anchor.to_string(),
            inputs_digest: digest(&inputs),
            inputs,
            value: None,
            tolerance,
            rule,
            pass: false,
            note: Some(note),
        });
    }

    pub fn skip(&mut self, id: String, reason: impl Into<String>) {
        self.skips.push(SkipRecord {
            id,
            reason: reason.into(),
        });
    }

    pub fn series(&mut self, id: String, columns: [&str; 2], rows: Vec<[f64; 2]>) {
        self.series.push(Series {
            id,
            columns: columns.map(String::from),
            rows,
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        let text = text.into();
        if !self.notes.contains(&text) {
            self.notes.push(text);
        }
    }

    pub fn finish(self, cfg: &RunConfig) -> Report {
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let summary = Summary {
            checks: self.checks.len(),
            passed,
            failed: self.checks.len() - passed,
            skipped: self.skips.len(),
        };
        Report {
            suite: cfg.suite,
            config: cfg.clone(),
            checks: self.checks,
            skips: self.skips,
            series: self.series,
            notes: self.notes,
            summary,
            wall_time_s: None,
        }
    }
}
