//! Run reports: a flat per-agent table of exact values and bounds, plus the
//! full structured result of the command.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::rational::Rational;

/// Hex SHA-256 of the input bytes.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRow {
    pub agent: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Rational>,
    pub value: Rational,
    /// Named lower bounds the value is certified against.
    pub bounds: BTreeMap<String, Rational>,
    pub pass: bool,
}

impl AgentRow {
    pub fn new(agent: usize, initial: Option<Rational>, value: Rational) -> Self {
        AgentRow {
            agent,
            initial,
            value,
            bounds: BTreeMap::new(),
            pass: true,
        }
    }

    pub fn bound(mut self, name: &str, bound: Rational) -> Self {
        self.bounds.insert(name.to_string(), bound);
        self.pass = self.recompute();
        self
    }

    pub fn recompute(&self) -> bool {
        self.bounds.values().all(|&b| self.value >= b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub input_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub agents: Vec<AgentRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    pub elapsed_ms: u64,
    pub pass: bool,
    /// Command-specific structured result.
    #[serde(default)]
    pub details: serde_json::Value,
}

impl RunReport {
    pub fn new(command: &str, input: &[u8]) -> Self {
        RunReport {
            command: command.to_string(),
            input_digest: digest(input),
            seed: None,
            agents: Vec::new(),
            trace: None,
            elapsed_ms: 0,
            pass: true,
            details: serde_json::Value::Null,
        }
    }

    pub fn push(&mut self, row: AgentRow) {
        self.pass &= row.pass;
        self.agents.push(row);
    }

    /// Recomputes every pass flag from the stored exact values and checks
    /// that they agree with the stored flags.
    pub fn reverify(&self) -> bool {
        let rows_ok = self.agents.iter().all(|r| r.pass == r.recompute());
        let overall = self.agents.iter().all(|r| r.pass);
        rows_ok && (self.pass == overall || !self.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn reverify_round_trip() {
        let mut report = RunReport::new("transform", b"{}");
        report.push(AgentRow::new(0, Some(Rational::from(3)), Rational::ONE).bound("b", Rational::new(1, 2)));
        report.push(AgentRow::new(1, None, Rational::ZERO).bound("b", Rational::ZERO));
        assert!(report.pass);
        let back: RunReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
        assert!(back.reverify());

        let mut tampered = back.clone();
        tampered.agents[0].value = Rational::ZERO;
        assert!(!tampered.reverify());
    }
}
