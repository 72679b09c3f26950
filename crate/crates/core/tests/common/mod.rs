#![allow(dead_code)]

use std::f64::consts::TAU;

use qcloak_core::circuit::{GateInstance, GateKind, MeasurementClass, QuantumCircuit};
use qcloak_core::obfuscate::GatePool;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_gate(gen: &mut ChaCha8Rng, width: usize) -> GateInstance {
    let kinds: Vec<GateKind> = GateKind::ALL.into_iter().filter(|k| k.arity() <= width).collect();
    let kind = kinds[gen.random_range(0..kinds.len())];
    let mut qubits: Vec<usize> = (0..width).collect();
    qubits.shuffle(gen);
    qubits.truncate(kind.arity());
    let params = (0..kind.param_count()).map(|_| gen.random_range(-TAU..TAU)).collect();
    GateInstance::new(kind, qubits, params).unwrap()
}

/// Up to `max_gates` random gates, every qubit measured into a shuffled
/// classical bit.
pub fn random_circuit(gen: &mut ChaCha8Rng, width: usize, max_gates: usize) -> QuantumCircuit {
    let mut c = QuantumCircuit::new(width).unwrap();
    for _ in 0..gen.random_range(0..=max_gates) {
        let gate = random_gate(gen, width);
        c.push_gate(gate).unwrap();
    }
    let mut clbits: Vec<usize> = (0..width).collect();
    clbits.shuffle(gen);
    for (q, cb) in clbits.into_iter().enumerate() {
        c.push_measure(q, cb).unwrap();
    }
    c
}

/// A pool of 1 to 8 non-superposing gates that all fit on `width` qubits.
pub fn random_pool(gen: &mut ChaCha8Rng, width: usize) -> GatePool {
    let kinds: Vec<GateKind> = GateKind::ALL
        .into_iter()
        .filter(|k| k.class() != MeasurementClass::Superposing && k.arity() <= width)
        .collect();
    let size = gen.random_range(1..=8);
    let mut indices: Vec<u32> = (0..40).collect();
    indices.shuffle(gen);
    let names: Vec<(u32, GateKind, Option<f64>)> = indices[..size]
        .iter()
        .map(|&i| {
            let kind = kinds[gen.random_range(0..kinds.len())];
            let angle = (kind.param_count() == 1).then(|| gen.random_range(-TAU..TAU));
            (i, kind, angle)
        })
        .collect();
    GatePool::build(names.iter().map(|&(i, k, a)| (i, k.mnemonic(), a))).unwrap()
}
