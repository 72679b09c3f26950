//! Encryptor-gate pools, insertion plans, and the obfuscation pass itself.
//!
//! A [`GatePool`] fixes the index-to-gate mapping for a run. A plan is a list
//! of [`InsertionRecord`]s in insertion order; [`obfuscate`] appends the
//! planned gates ahead of the measurement block and returns the
//! [`ObfuscationKey`], which holds the same records most-recent-first.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{GateInstance, GateKind, MeasurementClass, QuantumCircuit};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoolError {
    #[error("duplicate pool index {0}")]
    DuplicateIndex(u32),
    #[error("unknown gate name {0:?}")]
    UnknownGate(String),
    #[error("Hadamard gates and their controlled variants are excluded from gate pools")]
    HadamardExcluded,
    #[error("gate {0} creates superposition and cannot be corrected classically")]
    Superposing(GateKind),
    #[error("gate {0} needs a fixed angle in the pool")]
    MissingAngle(GateKind),
    #[error("gate {0} takes no angle")]
    UnexpectedAngle(GateKind),
    #[error("gate pool is empty")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("unknown gate index {0}")]
    UnknownIndex(u32),
    #[error("gate index {index} expects {expected} qubit(s), got {found}")]
    ArityMismatch {
        index: u32,
        expected: usize,
        found: usize,
    },
    #[error("qubit {qubit} out of range for width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("duplicate operand qubit {0}")]
    DuplicateOperand(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("pool gate {kind} (index {index}) needs {arity} qubits but only {available} are available")]
    ArityExceedsWidth {
        index: u32,
        kind: GateKind,
        arity: usize,
        available: usize,
    },
    #[error(transparent)]
    Pool(#[from] PoolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub kind: GateKind,
    /// Fixed angle for parameterised phase kinds.
    pub angle: Option<f64>,
}

impl PoolEntry {
    pub fn new(kind: GateKind, angle: Option<f64>) -> Result<Self, PoolError> {
        if kind == GateKind::H {
            return Err(PoolError::HadamardExcluded);
        }
        if kind.class() == MeasurementClass::Superposing {
            return Err(PoolError::Superposing(kind));
        }
        match (kind.param_count(), angle) {
            (1, None) => Err(PoolError::MissingAngle(kind)),
            (0, Some(_)) => Err(PoolError::UnexpectedAngle(kind)),
            _ => Ok(PoolEntry { kind, angle }),
        }
    }

    pub fn instantiate(&self, qubits: Vec<usize>) -> GateInstance {
        GateInstance {
            kind: self.kind,
            params: self.angle.into_iter().collect(),
            qubits,
        }
    }
}

/// User-defined index-to-gate mapping. Never contains superposing gates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GatePool {
    entries: BTreeMap<u32, PoolEntry>,
}

impl GatePool {
    /// Builds a pool from `(index, gate name, optional angle)` triples.
    pub fn build<'a, I>(spec: I) -> Result<Self, PoolError>
    where
        I: IntoIterator<Item = (u32, &'a str, Option<f64>)>,
    {
        let mut entries = BTreeMap::new();
        for (index, name, angle) in spec {
            let kind =
                GateKind::from_name(name).ok_or_else(|| PoolError::UnknownGate(name.to_string()))?;
            let entry = PoolEntry::new(kind, angle)?;
            if entries.insert(index, entry).is_some() {
                return Err(PoolError::DuplicateIndex(index));
            }
        }
        Ok(GatePool { entries })
    }

    /// The six-gate pool `{0: X, 1: CNOT, 2: SWAP, 3: CCNOT, 4: CSWAP, 5: S}`.
    pub fn canonical() -> Self {
        GatePool::build([
            (0, "x", None),
            (1, "cx", None),
            (2, "swap", None),
            (3, "ccx", None),
            (4, "cswap", None),
            (5, "s", None),
        ])
        .expect("canonical pool is valid")
    }

    pub fn get(&self, index: u32) -> Option<&PoolEntry> {
        self.entries.get(&index)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &PoolEntry)> + '_ {
        self.entries.iter().map(|(&i, e)| (i, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.entries.values().map(|e| e.kind.arity()).max().unwrap_or(0)
    }

    /// Checks a record against this pool and a circuit width.
    pub fn check_record(&self, record: &InsertionRecord, width: usize) -> Result<&PoolEntry, RecordError> {
        let entry = self
            .get(record.gate_index)
            .ok_or(RecordError::UnknownIndex(record.gate_index))?;
        if record.qubits.len() != entry.kind.arity() {
            return Err(RecordError::ArityMismatch {
                index: record.gate_index,
                expected: entry.kind.arity(),
                found: record.qubits.len(),
            });
        }
        for (i, &q) in record.qubits.iter().enumerate() {
            if q >= width {
                return Err(RecordError::QubitOutOfRange { qubit: q, width });
            }
            if record.qubits[..i].contains(&q) {
                return Err(RecordError::DuplicateOperand(q));
            }
        }
        Ok(entry)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InsertionRecord {
    #[serde(rename = "index")]
    pub gate_index: u32,
    pub qubits: Vec<usize>,
}

impl InsertionRecord {
    pub fn new(gate_index: u32, qubits: impl Into<Vec<usize>>) -> Self {
        InsertionRecord {
            gate_index,
            qubits: qubits.into(),
        }
    }
}

/// Records in reverse insertion order: the most recently inserted gate first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ObfuscationKey {
    pub records: Vec<InsertionRecord>,
}

impl ObfuscationKey {
    pub fn from_plan(plan: &[InsertionRecord]) -> Self {
        ObfuscationKey {
            records: plan.iter().rev().cloned().collect(),
        }
    }

    /// The plan this key was produced from.
    pub fn insertion_order(&self) -> Vec<InsertionRecord> {
        self.records.iter().rev().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Draws `num_gates` records uniformly from `pool` with operands sampled
/// without replacement from `0..width`.
pub fn random_plan(
    pool: &GatePool,
    width: usize,
    num_gates: usize,
    seed: u64,
) -> Result<Vec<InsertionRecord>, PlanError> {
    let qubits: Vec<usize> = (0..width).collect();
    random_plan_on(pool, &qubits, num_gates, seed)
}

/// Like [`random_plan`], with operands drawn from an explicit qubit set.
pub fn random_plan_on(
    pool: &GatePool,
    qubits: &[usize],
    num_gates: usize,
    seed: u64,
) -> Result<Vec<InsertionRecord>, PlanError> {
    if pool.is_empty() {
        return Err(PlanError::Pool(PoolError::Empty));
    }
    if let Some((index, entry)) = pool.iter().find(|(_, e)| e.kind.arity() > qubits.len()) {
        return Err(PlanError::ArityExceedsWidth {
            index,
            kind: entry.kind,
            arity: entry.kind.arity(),
            available: qubits.len(),
        });
    }
    let choices: Vec<(u32, usize)> = pool.iter().map(|(i, e)| (i, e.kind.arity())).collect();
    let mut gen = rng::generator(seed);
    let plan = (0..num_gates)
        .map(|_| {
            let (gate_index, arity) = choices[gen.random_range(0..choices.len())];
            let operands = index::sample(&mut gen, qubits.len(), arity)
                .into_iter()
                .map(|i| qubits[i])
                .collect::<Vec<_>>();
            InsertionRecord::new(gate_index, operands)
        })
        .collect();
    Ok(plan)
}

/// Appends the planned gates, in plan order, just before the measurement
/// block. The input circuit is left untouched.
pub fn obfuscate(
    circuit: &QuantumCircuit,
    pool: &GatePool,
    plan: &[InsertionRecord],
) -> Result<(QuantumCircuit, ObfuscationKey), RecordError> {
    let mut out = circuit.clone();
    for record in plan {
        let entry = pool.check_record(record, circuit.num_qubits)?;
        out.push_gate(entry.instantiate(record.qubits.clone()))
            .expect("record checked against pool and width");
    }
    Ok((out, ObfuscationKey::from_plan(plan)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Operation;

    #[test]
    fn canonical_pool_contents() {
        let pool = GatePool::canonical();
        let kinds: Vec<_> = pool.iter().map(|(i, e)| (i, e.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (0, GateKind::X),
                (1, GateKind::Cx),
                (2, GateKind::Swap),
                (3, GateKind::Ccx),
                (4, GateKind::Cswap),
                (5, GateKind::S),
            ]
        );
        let by_alias_names = GatePool::build([
            (0, "X", None),
            (1, "CNOT", None),
            (2, "SWAP", None),
            (3, "CCNOT", None),
            (4, "CSWAP", None),
            (5, "S", None),
        ])
        .unwrap();
        assert_eq!(by_alias_names, pool);
    }

    #[test]
    fn pool_rejects_hadamard_and_rotations() {
        assert_eq!(GatePool::build([(0, "h", None)]), Err(PoolError::HadamardExcluded));
        assert_eq!(
            GatePool::build([(0, "rx", Some(0.1))]),
            Err(PoolError::Superposing(GateKind::Rx))
        );
    }

    #[test]
    fn pool_rejects_duplicates_and_unknowns() {
        assert_eq!(
            GatePool::build([(0, "x", None), (0, "z", None)]),
            Err(PoolError::DuplicateIndex(0))
        );
        assert_eq!(
            GatePool::build([(0, "v", None)]),
            Err(PoolError::UnknownGate("v".into()))
        );
        assert_eq!(
            GatePool::build([(0, "cp", None)]),
            Err(PoolError::MissingAngle(GateKind::Cp))
        );
        assert_eq!(
            GatePool::build([(0, "x", Some(1.0))]),
            Err(PoolError::UnexpectedAngle(GateKind::X))
        );
    }

    #[test]
    fn single_choice_plan() {
        let pool = GatePool::build([(0, "x", None)]).unwrap();
        let plan = random_plan(&pool, 1, 3, 99).unwrap();
        assert_eq!(plan, vec![InsertionRecord::new(0, [0]); 3]);
    }

    #[test]
    fn plan_is_valid_and_deterministic() {
        let pool = GatePool::canonical();
        let plan = random_plan(&pool, 5, 7, 1234).unwrap();
        assert_eq!(plan.len(), 7);
        for r in &plan {
            pool.check_record(r, 5).unwrap();
        }
        assert_eq!(plan, random_plan(&pool, 5, 7, 1234).unwrap());
    }

    #[test]
    fn plan_rejects_narrow_circuits() {
        let pool = GatePool::build([(4, "cswap", None)]).unwrap();
        assert!(matches!(
            random_plan(&pool, 2, 1, 0),
            Err(PlanError::ArityExceedsWidth { index: 4, arity: 3, available: 2, .. })
        ));
    }

    #[test]
    fn plan_on_subset_only_uses_subset() {
        let pool = GatePool::canonical();
        let plan = random_plan_on(&pool, &[1, 4, 6], 50, 3).unwrap();
        assert!(plan.iter().flat_map(|r| &r.qubits).all(|q| [1, 4, 6].contains(q)));
    }

    fn five_qubit_measured() -> QuantumCircuit {
        let mut c = QuantumCircuit::new(5).unwrap();
        c.push_gate(GateInstance::fixed(GateKind::H, &[0])).unwrap();
        c.measure_all();
        c
    }

    #[test]
    fn empty_plan_is_identity() {
        let c = five_qubit_measured();
        let (out, key) = obfuscate(&c, &GatePool::canonical(), &[]).unwrap();
        assert_eq!(out, c);
        assert!(key.is_empty());
    }

    #[test]
    fn single_record_inserts_before_measurements() {
        let c = five_qubit_measured();
        let plan = [InsertionRecord::new(0, [2])];
        let (out, key) = obfuscate(&c, &GatePool::canonical(), &plan).unwrap();
        assert_eq!(out.ops[1], Operation::Gate(GateInstance::fixed(GateKind::X, &[2])));
        assert_eq!(out.gate_count(), c.gate_count() + 1);
        assert_eq!(out.measurement_map(), c.measurement_map());
        assert_eq!(key.records, plan.to_vec());
    }

    #[test]
    fn key_is_plan_reversed() {
        let pool = GatePool::canonical();
        let plan = random_plan(&pool, 5, 9, 8).unwrap();
        let (out, key) = obfuscate(&five_qubit_measured(), &pool, &plan).unwrap();
        assert_eq!(key.insertion_order(), plan);
        assert_eq!(out.gate_count(), 1 + plan.len());
    }

    #[test]
    fn invalid_record_is_rejected() {
        let c = five_qubit_measured();
        let pool = GatePool::canonical();
        assert_eq!(
            obfuscate(&c, &pool, &[InsertionRecord::new(9, [0])]).unwrap_err(),
            RecordError::UnknownIndex(9)
        );
        assert_eq!(
            obfuscate(&c, &pool, &[InsertionRecord::new(1, [0, 0])]).unwrap_err(),
            RecordError::DuplicateOperand(0)
        );
        assert_eq!(
            obfuscate(&c, &pool, &[InsertionRecord::new(0, [5])]).unwrap_err(),
            RecordError::QubitOutOfRange { qubit: 5, width: 5 }
        );
    }
}
