//! Exact statevector simulation, Born-rule probabilities and seeded sampling.
//!
//! Basis index convention: bit `i` of an amplitude index is the state of
//! qubit `i`. Gates are applied in place by striding over the amplitude
//! array; no full `2^n x 2^n` matrix is ever built.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{validate, Counts, GateInstance, GateKind, MeasurementMap, QuantumCircuit};
use crate::rng;

/// Largest circuit width the simulator accepts.
pub const MAX_QUBITS: usize = 16;

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("circuit has {0} qubits; the simulator supports at most {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
}

type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn diag(a: Complex64, b: Complex64) -> Matrix2 {
    [[a, ZERO], [ZERO, b]]
}

/// Single-qubit matrix applied to the target of `kind` (controls excluded).
/// Returns `None` for the swap family.
fn target_matrix(kind: GateKind, params: &[f64]) -> Option<Matrix2> {
    use GateKind::*;
    let theta = params.first().copied().unwrap_or(0.0);
    let m = match kind {
        X | Cx | Ccx => [[ZERO, ONE], [ONE, ZERO]],
        Y | Cy => [[ZERO, -I], [I, ZERO]],
        Z | Cz => diag(ONE, -ONE),
        H => {
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        S | Cs => diag(ONE, I),
        Sdg => diag(ONE, -I),
        T => diag(ONE, Complex64::from_polar(1.0, FRAC_PI_4)),
        Tdg => diag(ONE, Complex64::from_polar(1.0, -FRAC_PI_4)),
        Rx => {
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ]
        }
        Ry => {
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ]
        }
        Rz => diag(
            Complex64::from_polar(1.0, -theta / 2.0),
            Complex64::from_polar(1.0, theta / 2.0),
        ),
        P | Cp => diag(ONE, Complex64::from_polar(1.0, theta)),
        Swap | Cswap => return None,
    };
    Some(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

impl Statevector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self, SimError> {
        if num_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits(num_qubits));
        }
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = ONE;
        Ok(Statevector {
            amplitudes,
            num_qubits,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, SimError> {
        let mut sv = Self::zero(num_qubits)?;
        sv.amplitudes[0] = ZERO;
        sv.amplitudes[index] = ONE;
        Ok(sv)
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Option<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return None;
        }
        let num_qubits = len.trailing_zeros() as usize;
        (num_qubits <= MAX_QUBITS).then_some(Statevector {
            amplitudes,
            num_qubits,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies one gate. Operands must be in range; the caller validates.
    pub fn apply(&mut self, gate: &GateInstance) {
        let controls = gate.controls();
        let control_mask = controls.iter().fold(0usize, |m, &c| m | (1 << c));
        match target_matrix(gate.kind, &gate.params) {
            Some(m) => {
                let target = *gate.qubits.last().expect("gate has a target");
                self.apply_controlled(control_mask, target, &m);
            }
            None => {
                let n = gate.qubits.len();
                self.apply_controlled_swap(control_mask, gate.qubits[n - 2], gate.qubits[n - 1]);
            }
        }
        debug_assert!(
            (self.norm_sqr() - 1.0).abs() < NORM_TOLERANCE,
            "norm drifted after {gate}"
        );
    }

    fn apply_controlled(&mut self, control_mask: usize, target: usize, m: &Matrix2) {
        let tbit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & tbit != 0 || i & control_mask != control_mask {
                continue;
            }
            let j = i | tbit;
            let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
            self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
            self.amplitudes[j] = m[1][0] * a + m[1][1] * b;
        }
    }

    fn apply_controlled_swap(&mut self, control_mask: usize, a: usize, b: usize) {
        let (abit, bbit) = (1usize << a, 1usize << b);
        for i in 0..self.amplitudes.len() {
            if i & abit != 0 && i & bbit == 0 && i & control_mask == control_mask {
                self.amplitudes.swap(i, i ^ abit ^ bbit);
            }
        }
    }
}

/// Returns `U_k ... U_1 |0...0>` for the circuit's gate list.
pub fn evolve(circuit: &QuantumCircuit) -> Result<Statevector, SimError> {
    if circuit.num_qubits > MAX_QUBITS {
        return Err(SimError::TooManyQubits(circuit.num_qubits));
    }
    let report = validate(circuit);
    if let Some(v) = report.first() {
        return Err(SimError::InvalidCircuit(v.to_string()));
    }
    let mut state = Statevector::zero(circuit.num_qubits)?;
    for gate in circuit.gates() {
        state.apply(gate);
    }
    Ok(state)
}

/// Dense unitary of a single gate acting on `arity` local qubits, where
/// operand `k` is local qubit `k`. Column `j` is the image of basis state `j`.
pub fn gate_unitary(kind: GateKind, params: &[f64]) -> Vec<Vec<Complex64>> {
    let arity = kind.arity();
    let local = GateInstance {
        kind,
        params: params.to_vec(),
        qubits: (0..arity).collect(),
    };
    let dim = 1 << arity;
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .map(|col| {
            let mut sv = Statevector::basis(arity, col).expect("small register");
            sv.apply(&local);
            sv.amplitudes
        })
        .collect();
    (0..dim).map(|row| columns.iter().map(|c| c[row]).collect()).collect()
}

/// Born-rule distribution over the measured classical bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Option<Self> {
        let ok = probs.len().is_power_of_two()
            && probs.iter().all(|p| *p >= 0.0 && p.is_finite())
            && (probs.iter().sum::<f64>() - 1.0).abs() < NORM_TOLERANCE;
        ok.then_some(ProbabilityVector { probs })
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        ProbabilityVector { probs }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// Number of classical bits covered.
    pub fn num_bits(&self) -> usize {
        self.probs.len().trailing_zeros() as usize
    }

    /// Largest absolute entry-wise difference; `INFINITY` if widths differ.
    pub fn max_abs_diff(&self, other: &ProbabilityVector) -> f64 {
        if self.probs.len() != other.probs.len() {
            return f64::INFINITY;
        }
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Marginal distribution of the measured qubits, indexed by classical-bit
/// value (classical bit `c` is bit `c` of the index).
pub fn probabilities(state: &Statevector, measurements: &MeasurementMap) -> ProbabilityVector {
    let routes: Vec<(usize, usize)> = measurements.pairs().collect();
    let mut probs = vec![0.0; 1 << measurements.num_clbits()];
    for (index, amp) in state.amplitudes.iter().enumerate() {
        let outcome = routes
            .iter()
            .fold(0usize, |acc, &(q, c)| acc | (((index >> q) & 1) << c));
        probs[outcome] += amp.norm_sqr();
    }
    ProbabilityVector { probs }
}

/// Simulates a circuit and returns the distribution over its measurement map.
pub fn circuit_probabilities(circuit: &QuantumCircuit) -> Result<ProbabilityVector, SimError> {
    Ok(probabilities(&evolve(circuit)?, &circuit.measurement_map()))
}

/// Multinomial draw of `shots` outcomes by inverse-CDF lookup. Deterministic in
/// `(probs, shots, seed)`; zero-probability outcomes never appear.
pub fn sample(probs: &ProbabilityVector, shots: u64, seed: u64) -> Counts {
    let width = probs.num_bits();
    let mut cdf = Vec::with_capacity(probs.probs.len());
    let mut acc = 0.0;
    for p in &probs.probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let last_positive = probs.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);

    let mut hits = vec![0u64; cdf.len()];
    let mut gen = rng::generator(seed);
    for _ in 0..shots {
        let u: f64 = gen.random::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(last_positive);
        hits[idx] += 1;
    }
    Counts::from_pairs(
        width,
        hits.iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &n)| (crate::circuit::format_bits(i as u64, width), n)),
    )
    .expect("sampled counts are well-formed")
}
