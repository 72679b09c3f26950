use std::collections::{BTreeMap, HashMap};
use std::fmt::Display;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qcloak_core::bench::{self, Algorithm, TrialConfig};
use qcloak_core::circuit::{Counts, QuantumCircuit};
use qcloak_core::correct::Corrector;
use qcloak_core::obfuscate::{self as obf, InsertionRecord};
use qcloak_core::transpile::BasisSet;
use qcloak_core::{io, key, metrics, qasm, sim};

fn value_error<E: Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_counts(counts: HashMap<String, u64>) -> PyResult<Counts> {
    let width = counts.keys().next().map_or(0, String::len);
    Counts::from_pairs(width, counts).map_err(value_error)
}

fn from_counts(counts: &Counts) -> BTreeMap<String, u64> {
    counts.iter().map(|(k, n)| (k.to_string(), n)).collect()
}

/// A measured quantum circuit.
#[pyclass(name = "Circuit", frozen)]
struct PyCircuit(QuantumCircuit);

#[pymethods]
impl PyCircuit {
    /// Parses OpenQASM 2.0 source. All diagnostics are reported in one error.
    #[staticmethod]
    fn from_qasm(source: &str) -> PyResult<Self> {
        qasm::parse(source).map(PyCircuit).map_err(value_error)
    }

    fn to_qasm(&self) -> String {
        qasm::emit(&self.0)
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.0.num_qubits
    }

    #[getter]
    fn num_clbits(&self) -> usize {
        self.0.num_clbits()
    }

    #[getter]
    fn gate_count(&self) -> usize {
        self.0.gate_count()
    }

    /// Exact outcome distribution, indexed by the integer value of the bitstring.
    fn probabilities(&self) -> PyResult<Vec<f64>> {
        let probs = sim::circuit_probabilities(&self.0).map_err(value_error)?;
        Ok(probs.as_slice().to_vec())
    }

    #[pyo3(signature = (shots=1024, seed=0))]
    fn sample(&self, shots: u64, seed: u64) -> PyResult<BTreeMap<String, u64>> {
        let probs = sim::circuit_probabilities(&self.0).map_err(value_error)?;
        Ok(from_counts(&sim::sample(&probs, shots, seed)))
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(num_qubits={}, num_clbits={}, gates={})",
            self.0.num_qubits,
            self.0.num_clbits(),
            self.0.gate_count()
        )
    }
}

/// Indexed gates that encryptor insertions draw from.
#[pyclass(name = "GatePool", frozen)]
struct PyGatePool(obf::GatePool);

#[pymethods]
impl PyGatePool {
    #[staticmethod]
    fn canonical() -> Self {
        PyGatePool(obf::GatePool::canonical())
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::pool_from_json(text).map(PyGatePool).map_err(value_error)
    }

    fn to_json(&self) -> String {
        io::pool_to_json(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Appends encryptor gates. Returns the obfuscated circuit and the encoded key.
///
/// With `plan` given as `[(pool_index, [qubits...]), ...]` the insertions are
/// exactly those; otherwise `num_gates` are drawn on measured qubits from `seed`.
#[pyfunction]
#[pyo3(signature = (circuit, pool=None, num_gates=5, seed=0, plan=None))]
fn obfuscate(
    circuit: &PyCircuit,
    pool: Option<&PyGatePool>,
    num_gates: usize,
    seed: u64,
    plan: Option<Vec<(u32, Vec<usize>)>>,
) -> PyResult<(PyCircuit, String)> {
    let pool = pool.map_or_else(obf::GatePool::canonical, |p| p.0.clone());
    let plan = match plan {
        Some(records) => records.into_iter().map(|(i, q)| InsertionRecord::new(i, q)).collect(),
        None => {
            let measured = circuit.0.measurement_map().measured_qubits();
            obf::random_plan_on(&pool, &measured, num_gates, seed).map_err(value_error)?
        }
    };
    let (out, k) = obf::obfuscate(&circuit.0, &pool, &plan).map_err(value_error)?;
    Ok((PyCircuit(out), key::encode(&k)))
}

#[pyfunction]
#[pyo3(signature = (circuit, basis="cx,rz,rx,x,p", optimize=true))]
fn transpile(circuit: &PyCircuit, basis: &str, optimize: bool) -> PyResult<PyCircuit> {
    let basis: BasisSet = basis.parse().map_err(value_error)?;
    qcloak_core::transpile::transpile_with(&circuit.0, &basis, optimize)
        .map(PyCircuit)
        .map_err(value_error)
}

/// Maps counts measured on the obfuscated circuit back to the original outcomes.
#[pyfunction]
#[pyo3(signature = (counts, key_text, circuit, pool=None))]
fn correct(
    counts: HashMap<String, u64>,
    key_text: &str,
    circuit: &PyCircuit,
    pool: Option<&PyGatePool>,
) -> PyResult<BTreeMap<String, u64>> {
    let pool = pool.map_or_else(obf::GatePool::canonical, |p| p.0.clone());
    let k = key::decode(io::key_from_file_text(key_text), &pool, circuit.0.num_qubits).map_err(value_error)?;
    let corrector = Corrector::new(&k, &pool, &circuit.0.measurement_map()).map_err(value_error)?;
    let fixed = corrector.correct_counts(&to_counts(counts)?).map_err(value_error)?;
    Ok(from_counts(&fixed))
}

#[pyfunction]
fn tvd(a: HashMap<String, u64>, b: HashMap<String, u64>) -> PyResult<f64> {
    metrics::tvd(&to_counts(a)?, &to_counts(b)?).map_err(value_error)
}

#[pyfunction]
fn dfc(counts: HashMap<String, u64>, correct_output: &str) -> PyResult<f64> {
    metrics::dfc(&to_counts(counts)?, correct_output).map_err(value_error)
}

/// Runs the randomized experiment on a built-in benchmark and returns its summary.
#[pyfunction]
#[pyo3(signature = (algorithm, trials=100, shots=1024, num_gates=5, seed=0))]
fn run_experiment<'py>(
    py: Python<'py>,
    algorithm: &str,
    trials: usize,
    shots: u64,
    num_gates: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let algorithm: Algorithm = algorithm.parse().map_err(value_error)?;
    let config = TrialConfig { num_gates, shots, ..TrialConfig::default() };
    let benchmark = algorithm.default_benchmark();
    let pool = obf::GatePool::canonical();
    let e = py
        .detach(|| bench::run_experiment(&benchmark, trials, &pool, &config, seed))
        .map_err(value_error)?;
    let s = e.summary;
    let d = PyDict::new(py);
    d.set_item("algorithm", s.algorithm)?;
    d.set_item("trials", s.trials)?;
    d.set_item("shots", s.shots)?;
    d.set_item("num_gates", s.num_gates)?;
    d.set_item("correct_output", s.correct_output)?;
    d.set_item("median_tvd", s.median_tvd)?;
    d.set_item("median_dfc", s.median_dfc)?;
    d.set_item("tvd_iqr", (s.tvd_q1, s.tvd_q3))?;
    d.set_item("dfc_iqr", (s.dfc_q1, s.dfc_q3))?;
    d.set_item("correction_soundness", s.correction_soundness)?;
    let per_trial: Vec<(f64, f64, String)> = e.trials.into_iter().map(|t| (t.tvd, t.dfc, t.key)).collect();
    d.set_item("per_trial", per_trial)?;
    Ok(d)
}

#[pymodule]
fn qcloak(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyGatePool>()?;
    m.add_function(wrap_pyfunction!(obfuscate, m)?)?;
    m.add_function(wrap_pyfunction!(transpile, m)?)?;
    m.add_function(wrap_pyfunction!(correct, m)?)?;
    m.add_function(wrap_pyfunction!(tvd, m)?)?;
    m.add_function(wrap_pyfunction!(dfc, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
