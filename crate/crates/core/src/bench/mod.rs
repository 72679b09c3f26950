//! Benchmark circuits and the randomized obfuscation experiment.

mod circuits;
mod harness;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Counts, QuantumCircuit};

pub use circuits::{
    cut_value, gen_bv, gen_grover, gen_hhl, gen_hhl_2x2, gen_qaoa_maxcut, gen_qaoa_maxcut_with, gen_shor15,
    gen_shor15_with_phase_bits, grover_default_iterations, grover_success_probability, maxcut_brute_force,
    HhlSystem, QAOA_ANGLES, QAOA_EDGES, SHOR_PHASE_BITS,
};
pub use harness::{
    quantile, run_experiment, run_trial, run_trial_with_plan, write_trials_csv, Experiment, ExperimentSummary,
    TrialConfig, TrialResult, SOUNDNESS_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Plan,
    Obfuscate,
    Transpile,
    Simulate,
    Correct,
    Metrics,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Plan => "plan",
            Stage::Obfuscate => "obfuscate",
            Stage::Transpile => "transpile",
            Stage::Simulate => "simulate",
            Stage::Correct => "correct",
            Stage::Metrics => "metrics",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("invalid benchmark instance: {0}")]
    InvalidInstance(String),
    #[error("{stage} stage failed: {message}")]
    Stage { stage: Stage, message: String },
    #[error("trial {index}: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<BenchError>,
    },
    #[error("an experiment needs at least one trial")]
    NoTrials,
    #[error("unknown algorithm {0:?}; expected bv, grover, qaoa, shor or hhl")]
    UnknownAlgorithm(String),
}

impl BenchError {
    /// Wraps a stage failure, for use with `map_err`.
    pub(crate) fn at<E: fmt::Display>(stage: Stage) -> impl FnOnce(E) -> BenchError {
        move |e| BenchError::Stage {
            stage,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bv,
    Grover,
    Qaoa,
    Shor,
    Hhl,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Bv, Algorithm::Grover, Algorithm::Qaoa, Algorithm::Shor, Algorithm::Hhl];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bv => "bv",
            Algorithm::Grover => "grover",
            Algorithm::Qaoa => "qaoa",
            Algorithm::Shor => "shor",
            Algorithm::Hhl => "hhl",
        }
    }

    /// The instance used by the experiment harness.
    pub fn default_benchmark(self) -> Benchmark {
        match self {
            Algorithm::Bv => gen_bv("11010").expect("valid secret"),
            Algorithm::Grover => gen_grover("0110", grover_default_iterations(4)).expect("valid marked state"),
            Algorithm::Qaoa => gen_qaoa_maxcut(),
            Algorithm::Shor => gen_shor15(),
            Algorithm::Hhl => gen_hhl_2x2(),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| BenchError::UnknownAlgorithm(s.to_string()))
    }
}

/// How the expected answer of a benchmark is determined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrectOutput {
    /// The algorithm has a single deterministic answer.
    Known(String),
    /// Most frequent outcome of the unobfuscated circuit.
    Modal,
    /// Most frequent outcome other than all zeros (the trivial phase in
    /// order finding).
    ModalNonzero,
}

impl CorrectOutput {
    /// Resolves the policy against counts of the unobfuscated circuit. Ties
    /// go to the lexicographically smallest bitstring.
    pub fn resolve(&self, reference: &Counts) -> Option<String> {
        match self {
            CorrectOutput::Known(bits) => Some(bits.clone()),
            CorrectOutput::Modal => reference.mode().map(str::to_owned),
            CorrectOutput::ModalNonzero => reference.mode_where(|k| k.contains('1')).map(str::to_owned),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub algorithm: Algorithm,
    pub circuit: QuantumCircuit,
    pub correct: CorrectOutput,
}
