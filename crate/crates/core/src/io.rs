//! JSON and text formats used on the command-line boundary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Counts;
use crate::obfuscate::{GatePool, InsertionRecord, PoolError};
use crate::sim::ProbabilityVector;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("pool index {0:?} is not a non-negative integer")]
    PoolIndex(String),
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error("probability vector must have a power-of-two length and sum to 1")]
    Probabilities,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolFileEntry {
    gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
}

/// Reads `{"0":{"gate":"x"},"6":{"gate":"cp","angle":0.785}}`.
pub fn pool_from_json(text: &str) -> Result<GatePool, FormatError> {
    let raw: BTreeMap<String, PoolFileEntry> = serde_json::from_str(text)?;
    let mut spec = Vec::with_capacity(raw.len());
    for (key, entry) in &raw {
        let index: u32 = key.parse().map_err(|_| FormatError::PoolIndex(key.clone()))?;
        spec.push((index, entry.gate.as_str(), entry.angle));
    }
    Ok(GatePool::build(spec)?)
}

pub fn pool_to_json(pool: &GatePool) -> String {
    let raw: BTreeMap<u32, PoolFileEntry> = pool
        .iter()
        .map(|(i, e)| {
            (
                i,
                PoolFileEntry {
                    gate: e.kind.mnemonic().to_string(),
                    angle: e.angle,
                },
            )
        })
        .collect();
    serde_json::to_string_pretty(&raw).expect("pool serialises")
}

/// Reads a plan: `[{"index":3,"qubits":[1,4,3]}, ...]` in insertion order.
pub fn plan_from_json(text: &str) -> Result<Vec<InsertionRecord>, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn plan_to_json(plan: &[InsertionRecord]) -> String {
    serde_json::to_string(plan).expect("plan serialises")
}

pub fn counts_from_json(text: &str) -> Result<Counts, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn counts_to_json(counts: &Counts) -> String {
    serde_json::to_string_pretty(counts).expect("counts serialise")
}

/// Probability dump: a JSON array ordered by basis index.
pub fn probabilities_to_json(probs: &ProbabilityVector) -> String {
    serde_json::to_string(probs).expect("probabilities serialise")
}

pub fn probabilities_from_json(text: &str) -> Result<ProbabilityVector, FormatError> {
    let raw: Vec<f64> = serde_json::from_str(text)?;
    ProbabilityVector::new(raw).ok_or(FormatError::Probabilities)
}

/// Key file contents without the optional trailing newline.
pub fn key_from_file_text(text: &str) -> &str {
    text.strip_suffix('\n')
        .map(|t| t.strip_suffix('\r').unwrap_or(t))
        .unwrap_or(text)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use super::*;
    use crate::circuit::GateKind;

    #[test]
    fn pool_file_round_trip() {
        let text = r#"{"0":{"gate":"x"},"5":{"gate":"s"},"6":{"gate":"cp","angle":0.7853981633974483}}"#;
        let pool = pool_from_json(text).unwrap();
        assert_eq!(pool.len(), 3);
        let cp = pool.get(6).unwrap();
        assert_eq!(cp.kind, GateKind::Cp);
        assert_eq!(cp.angle, Some(FRAC_PI_4));
        assert_eq!(pool_from_json(&pool_to_json(&pool)).unwrap(), pool);
        assert_eq!(pool_from_json(&pool_to_json(&GatePool::canonical())).unwrap(), GatePool::canonical());
    }

    #[test]
    fn pool_file_rejections() {
        assert!(matches!(pool_from_json(r#"{"a":{"gate":"x"}}"#), Err(FormatError::PoolIndex(_))));
        assert!(matches!(
            pool_from_json(r#"{"0":{"gate":"h"}}"#),
            Err(FormatError::Pool(PoolError::HadamardExcluded))
        ));
        assert!(matches!(
            pool_from_json(r#"{"0":{"gate":"x"},"00":{"gate":"y"}}"#),
            Err(FormatError::Pool(PoolError::DuplicateIndex(0)))
        ));
        assert!(pool_from_json(r#"{"0":{"gate":"x","colour":1}}"#).is_err());
    }

    #[test]
    fn plan_file() {
        let plan = plan_from_json(r#"[{"index":3,"qubits":[1,4,3]}]"#).unwrap();
        assert_eq!(plan, vec![InsertionRecord::new(3, [1, 4, 3])]);
        assert_eq!(plan_to_json(&plan), r#"[{"index":3,"qubits":[1,4,3]}]"#);
    }

    #[test]
    fn counts_file() {
        let c = counts_from_json(r#"{"shots":3,"counts":{"01":1,"10":2}}"#).unwrap();
        assert_eq!(c.get("10"), 2);
        assert_eq!(counts_from_json(&counts_to_json(&c)).unwrap(), c);
        assert!(counts_from_json(r#"{"shots":4,"counts":{"01":1,"10":2}}"#).is_err());
        assert!(counts_from_json(r#"{"shots":3,"counts":{"01":1,"1":2}}"#).is_err());
    }

    #[test]
    fn key_file_newlines() {
        assert_eq!(key_from_file_text("0#1\n"), "0#1");
        assert_eq!(key_from_file_text("0#1\r\n"), "0#1");
        assert_eq!(key_from_file_text("0#1"), "0#1");
        assert_eq!(key_from_file_text("0#1\n\n"), "0#1\n");
    }
}
