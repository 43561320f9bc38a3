//! Run reports: a deterministic record of what a command read, what it
//! concluded at each step, and a few summary lines.
//!
//! Text output is a stable two-column layout; `--json` emits the same data as
//! a versioned JSON document.  Nothing in a report depends on time, locale,
//! hash-map iteration order or the absolute location of the data directory.

use std::fmt::Write as _;

use brestrict::criteria::Verdict;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Step {
    pub id: String,
    pub status: String,
    pub rule: String,
    pub evidence: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub step: String,
    pub expected: String,
    /// `None` when the report has no step with that id.
    pub actual: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpectOutcome {
    pub file: String,
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub steps: Vec<Step>,
    pub summary: Vec<String>,
    /// Set by commands whose own checks failed (e.g. `validate`).
    pub failed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectations: Option<ExpectOutcome>,
}

impl RunReport {
    pub fn new(command: String) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command,
            inputs: Vec::new(),
            steps: Vec::new(),
            summary: Vec::new(),
            failed: false,
            expectations: None,
        }
    }

    /// Reads a file, records its digest under the name it was given by, and
    /// returns the contents.
    pub fn read_input(&mut self, name: &str) -> Result<String, CliError> {
        let path = brestrict::data::resolve(name);
        let bytes = std::fs::read(&path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        self.inputs.push(InputDigest { name: name.to_string(), sha256: hex(&Sha256::digest(&bytes)) });
        String::from_utf8(bytes).map_err(|_| CliError::Usage(format!("{name} is not valid UTF-8")))
    }

    /// Adds a step; a repeated id gets a `#2`, `#3`, … suffix so ids stay unique.
    pub fn step(&mut self, id: impl Into<String>, status: impl Into<String>, rule: impl Into<String>, evidence: Vec<(String, String)>) {
        let base = id.into();
        let mut id = base.clone();
        let mut k = 1;
        while self.steps.iter().any(|s| s.id == id) {
            k += 1;
            id = format!("{base}#{k}");
        }
        self.steps.push(Step { id, status: status.into(), rule: rule.into(), evidence });
    }

    pub fn verdict(&mut self, id: impl Into<String>, v: &Verdict, extra: Vec<(String, String)>) {
        let mut evidence = extra;
        evidence.extend(v.evidence.0.iter().cloned());
        self.step(id, v.status.to_string(), v.rule.clone(), evidence);
    }

    pub fn summary(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub fn status_of(&self, id: &str) -> Option<&str> {
        self.steps.iter().find(|s| s.id == id).map(|s| s.status.as_str())
    }

    /// Compares step statuses against an expectations file.
    ///
    /// Each non-empty, non-`#` line is `<step-id> <status>`; the status is the
    /// last whitespace-separated token.
    pub fn check_expectations(&mut self, file: &str, text: &str) -> Result<(), CliError> {
        let mut checked = 0;
        let mut mismatches = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            // `#` also appears in de-duplicated step ids, so it only starts a
            // comment at the beginning of a line or after whitespace.
            let line = if raw.trim_start().starts_with('#') {
                ""
            } else {
                raw.find(" #").map_or(raw, |pos| &raw[..pos]).trim()
            };
            if line.is_empty() {
                continue;
            }
            let (id, expected) = line
                .rsplit_once(char::is_whitespace)
                .map(|(a, b)| (a.trim(), b.trim()))
                .ok_or_else(|| CliError::Expect { line: i + 1, message: "expected `<step-id> <status>`".into() })?;
            checked += 1;
            let actual = self.status_of(id).map(str::to_string);
            if actual.as_deref() != Some(expected) {
                mismatches.push(Mismatch { step: id.to_string(), expected: expected.to_string(), actual });
            }
        }
        self.expectations = Some(ExpectOutcome { file: file.to_string(), checked, mismatches });
        Ok(())
    }

    pub fn exit_code(&self) -> i32 {
        let mismatched = self.expectations.as_ref().is_some_and(|e| !e.mismatches.is_empty());
        if self.failed || mismatched {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command  {}", self.command);
        for i in &self.inputs {
            let _ = writeln!(out, "input    {}  sha256:{}", i.name, i.sha256);
        }
        for s in &self.steps {
            out.push('\n');
            if s.rule.is_empty() {
                let _ = writeln!(out, "[{}] {}", s.id, s.status);
            } else {
                let _ = writeln!(out, "[{}] {} ({})", s.id, s.status, s.rule);
            }
            let width = s.evidence.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
            for (k, v) in &s.evidence {
                let _ = writeln!(out, "  {k:<width$}  {v}");
            }
        }
        if !self.summary.is_empty() {
            out.push_str("\nsummary\n");
            for line in &self.summary {
                let _ = writeln!(out, "  {line}");
            }
        }
        if let Some(e) = &self.expectations {
            let _ = writeln!(out, "\nexpectations  {}: {} checked, {} mismatched", e.file, e.checked, e.mismatches.len());
            for m in &e.mismatches {
                let actual = m.actual.as_deref().unwrap_or("<missing step>");
                let _ = writeln!(out, "  MISMATCH [{}] expected {}, got {}", m.step, m.expected, actual);
            }
        }
        out
    }
}

pub fn ev(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Echo of the invocation, with arguments containing whitespace quoted.
pub fn command_echo(args: impl IntoIterator<Item = String>) -> String {
    let mut parts = vec!["brestrict".to_string()];
    for a in args {
        if a.is_empty() || a.chars().any(char::is_whitespace) {
            parts.push(format!("'{a}'"));
        } else {
            parts.push(a);
        }
    }
    parts.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> RunReport {
        let mut r = RunReport::new("brestrict test".into());
        r.step("a", "irreducible", "frobenius", vec![]);
        r.step("a", "reducible", "frobenius", vec![]);
        r
    }

    #[test]
    fn duplicate_ids_are_suffixed() {
        let r = report();
        assert_eq!(r.steps[1].id, "a#2");
    }

    #[test]
    fn expectations() {
        let mut r = report();
        r.check_expectations("e", "# comment\na irreducible\na#2 reducible  # trailing\n\n").unwrap();
        assert_eq!(r.exit_code(), 0);
        let mut r = report();
        r.check_expectations("e", "a reducible\nmissing irreducible\n").unwrap();
        assert_eq!(r.expectations.as_ref().unwrap().mismatches.len(), 2);
        assert_eq!(r.exit_code(), 1);
        assert!(report().check_expectations("e", "lonely\n").is_err());
    }

    #[test]
    fn echo_quotes_whitespace() {
        assert_eq!(command_echo(["a".to_string(), "b c".to_string()]), "brestrict a 'b c'");
    }
}
