//! Total Variation Distance and Degree of Functional Corruption over counts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Counts;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("shot counts differ: {0} vs {1}")]
    ShotMismatch(u64, u64),
    #[error("bitstring widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("counts are empty")]
    Empty,
}

/// `sum_i |obfus_i - orig_i| / (2 * shots)` over the union of observed keys.
pub fn tvd(orig: &Counts, obfus: &Counts) -> Result<f64, MetricsError> {
    if orig.shots() != obfus.shots() {
        return Err(MetricsError::ShotMismatch(orig.shots(), obfus.shots()));
    }
    if !orig.is_empty() && !obfus.is_empty() && orig.width() != obfus.width() {
        return Err(MetricsError::WidthMismatch(orig.width(), obfus.width()));
    }
    if orig.shots() == 0 {
        return Err(MetricsError::Empty);
    }
    let keys: BTreeSet<&str> = orig.iter().chain(obfus.iter()).map(|(k, _)| k).collect();
    let total: u64 = keys.iter().map(|k| orig.get(k).abs_diff(obfus.get(k))).sum();
    Ok(total as f64 / (2 * orig.shots()) as f64)
}

/// `(count[correct] - max incorrect count) / shots`, with absent keys at 0.
pub fn dfc(counts: &Counts, correct: &str) -> Result<f64, MetricsError> {
    if counts.shots() == 0 {
        return Err(MetricsError::Empty);
    }
    if counts.width() != correct.len() {
        return Err(MetricsError::WidthMismatch(counts.width(), correct.len()));
    }
    let right = counts.get(correct);
    let wrong = counts
        .iter()
        .filter(|(k, _)| *k != correct)
        .map(|(_, n)| n)
        .max()
        .unwrap_or(0);
    Ok((right as f64 - wrong as f64) / counts.shots() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub tvd: f64,
    pub dfc: f64,
    pub correct_output: String,
}

impl MetricReport {
    /// TVD of `obfus` against `orig`, DFC of `obfus` against `correct`.
    pub fn evaluate(orig: &Counts, obfus: &Counts, correct: &str) -> Result<Self, MetricsError> {
        Ok(MetricReport {
            tvd: tvd(orig, obfus)?,
            dfc: dfc(obfus, correct)?,
            correct_output: correct.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(w: usize, pairs: &[(&str, u64)]) -> Counts {
        Counts::from_pairs(w, pairs.iter().map(|&(k, n)| (k, n))).unwrap()
    }

    #[test]
    fn tvd_reference_values() {
        let a = counts(2, &[("00", 700), ("11", 324)]);
        assert_eq!(tvd(&a, &a).unwrap(), 0.0);
        assert_eq!(
            tvd(&counts(1, &[("0", 1024)]), &counts(1, &[("1", 1024)])).unwrap(),
            1.0
        );
        let half = tvd(&counts(2, &[("00", 512), ("01", 512)]), &counts(2, &[("00", 1024)])).unwrap();
        assert!((half - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn tvd_preconditions() {
        assert_eq!(
            tvd(&counts(1, &[("0", 10)]), &counts(1, &[("0", 11)])),
            Err(MetricsError::ShotMismatch(10, 11))
        );
        assert_eq!(
            tvd(&counts(1, &[("0", 10)]), &counts(2, &[("00", 10)])),
            Err(MetricsError::WidthMismatch(1, 2))
        );
    }

    #[test]
    fn dfc_reference_values() {
        assert_eq!(dfc(&counts(3, &[("101", 1024)]), "101").unwrap(), 1.0);
        assert_eq!(dfc(&counts(3, &[("110", 1024)]), "101").unwrap(), -1.0);
        let mixed = counts(3, &[("101", 300), ("000", 500), ("111", 224)]);
        assert!((dfc(&mixed, "101").unwrap() - (-0.1953125)).abs() <= 1e-15);
        assert_eq!(dfc(&mixed, "10"), Err(MetricsError::WidthMismatch(3, 2)));
    }

    #[test]
    fn report_json_shape() {
        let r = MetricReport {
            tvd: 0.5,
            dfc: -0.25,
            correct_output: "01001".into(),
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"tvd":0.5,"dfc":-0.25,"correct_output":"01001"}"#
        );
    }
}
