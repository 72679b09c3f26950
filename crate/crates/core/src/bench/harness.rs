use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BenchError, Benchmark, Stage};
use crate::circuit::QuantumCircuit;
use crate::correct::Corrector;
use crate::key;
use crate::metrics::{dfc, tvd};
use crate::obfuscate::{obfuscate, random_plan_on, GatePool, InsertionRecord};
use crate::rng::derive_seed;
use crate::sim::{circuit_probabilities, sample, ProbabilityVector};
use crate::transpile::{transpile_with, BasisSet};

/// Largest allowed entry-wise gap between the corrected and the original
/// distribution.
pub const SOUNDNESS_TOLERANCE: f64 = 1e-9;

const PLAN_STREAM: u64 = 0;
const SAMPLE_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub num_gates: usize,
    pub shots: u64,
    pub basis: BasisSet,
    pub optimize: bool,
}

impl Default for TrialConfig {
    /// Five encryptor gates, 1024 shots, default basis with optimisation.
    fn default() -> Self {
        TrialConfig {
            num_gates: 5,
            shots: 1024,
            basis: BasisSet::default(),
            optimize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: usize,
    pub tvd: f64,
    pub dfc: f64,
    pub key: String,
    pub seed: u64,
    /// Whether correcting the obfuscated distribution reproduced the original.
    pub sound: bool,
    pub correction_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub algorithm: String,
    pub trials: usize,
    pub shots: u64,
    pub num_gates: usize,
    pub correct_output: String,
    pub median_tvd: f64,
    pub median_dfc: f64,
    pub tvd_q1: f64,
    pub tvd_q3: f64,
    pub dfc_q1: f64,
    pub dfc_q3: f64,
    pub correction_soundness: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub summary: ExperimentSummary,
    pub trials: Vec<TrialResult>,
}

/// Unobfuscated reference, computed once per experiment.
struct Reference<'a> {
    circuit: &'a QuantumCircuit,
    probs: ProbabilityVector,
    measured: Vec<usize>,
}

impl<'a> Reference<'a> {
    fn new(circuit: &'a QuantumCircuit) -> Result<Self, BenchError> {
        Ok(Reference {
            circuit,
            probs: circuit_probabilities(circuit).map_err(BenchError::at(Stage::Simulate))?,
            measured: circuit.measurement_map().measured_qubits(),
        })
    }
}

fn trial_on(
    reference: &Reference<'_>,
    correct_output: &str,
    pool: &GatePool,
    config: &TrialConfig,
    plan: Option<&[InsertionRecord]>,
    trial_index: usize,
    seed: u64,
) -> Result<TrialResult, BenchError> {
    let drawn;
    let plan = match plan {
        Some(p) => p,
        None => {
            let plan_seed = derive_seed(seed, PLAN_STREAM);
            drawn = random_plan_on(pool, &reference.measured, config.num_gates, plan_seed)
                .map_err(BenchError::at(Stage::Plan))?;
            &drawn
        }
    };
    let (obfuscated, key) = obfuscate(reference.circuit, pool, plan).map_err(BenchError::at(Stage::Obfuscate))?;
    let compiled =
        transpile_with(&obfuscated, &config.basis, config.optimize).map_err(BenchError::at(Stage::Transpile))?;
    let obf_probs = circuit_probabilities(&compiled).map_err(BenchError::at(Stage::Simulate))?;

    // Both runs share one sampling seed so that identical distributions
    // give identical counts.
    let sample_seed = derive_seed(seed, SAMPLE_STREAM);
    let orig_counts = sample(&reference.probs, config.shots, sample_seed);
    let obf_counts = sample(&obf_probs, config.shots, sample_seed);
    let tvd = tvd(&orig_counts, &obf_counts).map_err(BenchError::at(Stage::Metrics))?;
    let dfc = dfc(&obf_counts, correct_output).map_err(BenchError::at(Stage::Metrics))?;

    let corrector =
        Corrector::new(&key, pool, &reference.circuit.measurement_map()).map_err(BenchError::at(Stage::Correct))?;
    let correction_error = corrector.correct_probabilities(&obf_probs).max_abs_diff(&reference.probs);
    Ok(TrialResult {
        trial_index,
        tvd,
        dfc,
        key: key::encode(&key),
        seed,
        sound: correction_error < SOUNDNESS_TOLERANCE,
        correction_error,
    })
}

/// One obfuscate, transpile, simulate, score and correct round with a random
/// plan over the measured qubits. Deterministic in `seed`.
pub fn run_trial(
    circuit: &QuantumCircuit,
    correct_output: &str,
    pool: &GatePool,
    config: &TrialConfig,
    trial_index: usize,
    seed: u64,
) -> Result<TrialResult, BenchError> {
    trial_on(&Reference::new(circuit)?, correct_output, pool, config, None, trial_index, seed)
}

/// [`run_trial`] with a fixed plan instead of a random one.
pub fn run_trial_with_plan(
    circuit: &QuantumCircuit,
    correct_output: &str,
    pool: &GatePool,
    config: &TrialConfig,
    plan: &[InsertionRecord],
    seed: u64,
) -> Result<TrialResult, BenchError> {
    trial_on(&Reference::new(circuit)?, correct_output, pool, config, Some(plan), 0, seed)
}

/// Quantile by linear interpolation between closest ranks.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Runs `trials` independent trials in parallel. Trial `i` uses seed
/// `derive_seed(master_seed, i)`; modal correct outputs are resolved by
/// sampling the unobfuscated circuit with `master_seed`.
pub fn run_experiment(
    benchmark: &Benchmark,
    trials: usize,
    pool: &GatePool,
    config: &TrialConfig,
    master_seed: u64,
) -> Result<Experiment, BenchError> {
    if trials == 0 {
        return Err(BenchError::NoTrials);
    }
    let reference = Reference::new(&benchmark.circuit)?;
    let baseline = sample(&reference.probs, config.shots, master_seed);
    let correct_output = benchmark
        .correct
        .resolve(&baseline)
        .ok_or_else(|| BenchError::InvalidInstance("no outcome to use as the correct output".into()))?;
    log::info!("{}: correct output {correct_output}", benchmark.algorithm);

    let results: Vec<TrialResult> = (0..trials)
        .into_par_iter()
        .map(|index| {
            trial_on(
                &reference,
                &correct_output,
                pool,
                config,
                None,
                index,
                derive_seed(master_seed, index as u64),
            )
            .map_err(|e| BenchError::Trial {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;

    let tvds = sorted(results.iter().map(|r| r.tvd));
    let dfcs = sorted(results.iter().map(|r| r.dfc));
    let summary = ExperimentSummary {
        algorithm: benchmark.algorithm.name().to_string(),
        trials,
        shots: config.shots,
        num_gates: config.num_gates,
        correct_output,
        median_tvd: quantile(&tvds, 0.5),
        median_dfc: quantile(&dfcs, 0.5),
        tvd_q1: quantile(&tvds, 0.25),
        tvd_q3: quantile(&tvds, 0.75),
        dfc_q1: quantile(&dfcs, 0.25),
        dfc_q3: quantile(&dfcs, 0.75),
        correction_soundness: results.iter().all(|r| r.sound),
    };
    Ok(Experiment {
        summary,
        trials: results,
    })
}

/// Per-trial CSV with columns `trial,tvd,dfc,key`, ordered by trial index.
pub fn write_trials_csv<W: Write>(out: W, trials: &[TrialResult]) -> csv::Result<()> {
    let mut rows: Vec<&TrialResult> = trials.iter().collect();
    rows.sort_by_key(|r| r.trial_index);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "tvd", "dfc", "key"])?;
    for r in rows {
        w.write_record([
            r.trial_index.to_string(),
            r.tvd.to_string(),
            r.dfc.to_string(),
            r.key.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
