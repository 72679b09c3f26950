//! Generators for the five benchmark algorithms.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{Algorithm, BenchError, Benchmark, CorrectOutput};
use crate::circuit::{GateInstance, GateKind, QuantumCircuit};

use GateKind::*;

/// Thin wrapper that appends hard-coded gates without error plumbing.
struct Builder {
    circuit: QuantumCircuit,
}

impl Builder {
    fn new(num_qubits: usize) -> Self {
        Builder {
            circuit: QuantumCircuit::new(num_qubits).expect("non-empty register"),
        }
    }

    fn push(&mut self, gate: GateInstance) -> &mut Self {
        self.circuit.push_gate(gate).expect("generator emits valid gates");
        self
    }

    fn g(&mut self, kind: GateKind, qubits: &[usize]) -> &mut Self {
        self.push(GateInstance::fixed(kind, qubits))
    }

    fn r(&mut self, kind: GateKind, angle: f64, qubits: &[usize]) -> &mut Self {
        self.push(GateInstance::rotation(kind, angle, qubits))
    }

    fn each(&mut self, kind: GateKind, qubits: impl IntoIterator<Item = usize>) -> &mut Self {
        for q in qubits {
            self.g(kind, &[q]);
        }
        self
    }

    fn extend(&mut self, gates: impl IntoIterator<Item = GateInstance>) -> &mut Self {
        for gate in gates {
            self.push(gate);
        }
        self
    }

    /// Measures `qubits[i]` into classical bit `i`.
    fn measure(mut self, qubits: impl IntoIterator<Item = usize>) -> QuantumCircuit {
        for (clbit, q) in qubits.into_iter().enumerate() {
            self.circuit.push_measure(q, clbit).expect("fresh measurement");
        }
        self.circuit
    }
}

fn check_bits(bits: &str, range: std::ops::RangeInclusive<usize>, what: &str) -> Result<(), BenchError> {
    if !range.contains(&bits.len()) || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(BenchError::InvalidInstance(format!(
            "{what} must be a bitstring of length {}..={}, got {bits:?}",
            range.start(),
            range.end()
        )));
    }
    Ok(())
}

/// Bit `i` of a bitstring rendered with bit 0 rightmost.
fn bit(bits: &str, i: usize) -> bool {
    bits.as_bytes()[bits.len() - 1 - i] == b'1'
}

/// Inverse of a gate sequence.
pub(crate) fn inverse(gates: &[GateInstance]) -> Vec<GateInstance> {
    gates
        .iter()
        .rev()
        .map(|g| {
            let q = &g.qubits;
            match g.kind {
                S => GateInstance::fixed(Sdg, q),
                Sdg => GateInstance::fixed(S, q),
                T => GateInstance::fixed(Tdg, q),
                Tdg => GateInstance::fixed(T, q),
                Cs => GateInstance::rotation(Cp, -FRAC_PI_2, q),
                k if k.param_count() == 1 => GateInstance::rotation(k, -g.params[0], q),
                _ => g.clone(),
            }
        })
        .collect()
}

/// Inverse quantum Fourier transform on `qubits`, where `qubits[0]` holds the
/// least significant bit of the phase register.
pub(crate) fn inverse_qft(qubits: &[usize]) -> Vec<GateInstance> {
    let n = qubits.len();
    let mut gates = Vec::new();
    for i in 0..n / 2 {
        gates.push(GateInstance::fixed(Swap, &[qubits[i], qubits[n - 1 - i]]));
    }
    for j in 0..n {
        for m in 0..j {
            let angle = -PI / f64::powi(2.0, (j - m) as i32);
            gates.push(GateInstance::rotation(Cp, angle, &[qubits[m], qubits[j]]));
        }
        gates.push(GateInstance::fixed(H, &[qubits[j]]));
    }
    gates
}

/// Bernstein-Vazirani for a secret of 1 to 12 bits. Data qubits `0..n`,
/// phase-kickback ancilla at `n`.
pub fn gen_bv(secret: &str) -> Result<Benchmark, BenchError> {
    check_bits(secret, 1..=12, "BV secret")?;
    let n = secret.len();
    let mut b = Builder::new(n + 1);
    b.g(X, &[n]).each(H, 0..=n);
    for i in (0..n).filter(|&i| bit(secret, i)) {
        b.g(Cx, &[i, n]);
    }
    b.each(H, 0..n);
    Ok(Benchmark {
        algorithm: Algorithm::Bv,
        circuit: b.measure(0..n),
        correct: CorrectOutput::Known(secret.to_string()),
    })
}

/// Iteration count maximising the marked-state probability:
/// `round(pi / (4 theta) - 1/2)` with `theta = asin(2^(-n/2))`.
pub fn grover_default_iterations(n: usize) -> usize {
    let theta = (0.5f64).powf(n as f64 / 2.0).asin();
    (PI / (4.0 * theta) - 0.5).round() as usize
}

/// Closed-form success probability `sin^2((2k+1) theta)`.
pub fn grover_success_probability(n: usize, iterations: usize) -> f64 {
    let theta = (0.5f64).powf(n as f64 / 2.0).asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

/// Phase flip of `|1...1>` on `qubits` (2 to 4 of them). The 4-qubit case
/// borrows `ancilla`, returned clean.
fn multi_controlled_z(qubits: &[usize], ancilla: Option<usize>) -> Vec<GateInstance> {
    let f = GateInstance::fixed;
    match *qubits {
        [a, b] => vec![f(Cz, &[a, b])],
        [a, b, c] => vec![f(H, &[c]), f(Ccx, &[a, b, c]), f(H, &[c])],
        [a, b, c, d] => {
            let anc = ancilla.expect("4-qubit phase flip needs an ancilla");
            vec![
                f(Ccx, &[a, b, anc]),
                f(H, &[d]),
                f(Ccx, &[anc, c, d]),
                f(H, &[d]),
                f(Ccx, &[a, b, anc]),
            ]
        }
        _ => unreachable!("grover register size checked by caller"),
    }
}

/// Grover search over 2 to 4 qubits for `marked`. Four-qubit instances use
/// one extra ancilla qubit, left unmeasured.
pub fn gen_grover(marked: &str, iterations: usize) -> Result<Benchmark, BenchError> {
    check_bits(marked, 2..=4, "Grover marked state")?;
    let n = marked.len();
    let ancilla = (n == 4).then_some(n);
    let data: Vec<usize> = (0..n).collect();
    let zeros: Vec<usize> = data.iter().copied().filter(|&i| !bit(marked, i)).collect();
    let mcz = multi_controlled_z(&data, ancilla);

    let mut b = Builder::new(n + usize::from(ancilla.is_some()));
    b.each(H, 0..n);
    for _ in 0..iterations {
        b.each(X, zeros.iter().copied())
            .extend(mcz.iter().cloned())
            .each(X, zeros.iter().copied());
        b.each(H, 0..n)
            .each(X, 0..n)
            .extend(mcz.iter().cloned())
            .each(X, 0..n)
            .each(H, 0..n);
    }
    Ok(Benchmark {
        algorithm: Algorithm::Grover,
        circuit: b.measure(0..n),
        correct: CorrectOutput::Known(marked.to_string()),
    })
}

/// Five-vertex MaxCut instance. Maximum cut 4; the optimal partitions include
/// `{0,2,3} | {1,4}`.
pub const QAOA_EDGES: [(usize, usize); 5] = [(0, 1), (0, 2), (0, 4), (1, 2), (3, 4)];

/// Two-layer `(gamma, beta)` angles maximising the expected cut on
/// [`QAOA_EDGES`].
pub const QAOA_ANGLES: [(f64, f64); 2] = [
    (-0.3043949148726589, -2.661442900776474),
    (2.5278601055752787, -1.3319953038881243),
];

/// Cut size of an assignment whose bit `v` gives the side of vertex `v`.
pub fn cut_value(edges: &[(usize, usize)], assignment: u64) -> usize {
    edges
        .iter()
        .filter(|&&(a, b)| (assignment >> a) & 1 != (assignment >> b) & 1)
        .count()
}

/// Exhaustive MaxCut: the best cut size and every assignment achieving it.
pub fn maxcut_brute_force(num_vertices: usize, edges: &[(usize, usize)]) -> (usize, Vec<u64>) {
    let values: Vec<usize> = (0..1u64 << num_vertices).map(|x| cut_value(edges, x)).collect();
    let best = values.iter().copied().max().unwrap_or(0);
    let optima = (0..1u64 << num_vertices).filter(|&x| values[x as usize] == best).collect();
    (best, optima)
}

/// QAOA MaxCut ansatz on [`QAOA_EDGES`] with [`QAOA_ANGLES`].
pub fn gen_qaoa_maxcut() -> Benchmark {
    gen_qaoa_maxcut_with(&QAOA_EDGES, &QAOA_ANGLES).expect("fixed instance is valid")
}

/// QAOA on an arbitrary 5-vertex graph: a Hadamard layer, then per layer an
/// `exp(-i gamma Z_a Z_b)` block per edge and an `RX(2 beta)` mixer.
pub fn gen_qaoa_maxcut_with(edges: &[(usize, usize)], layers: &[(f64, f64)]) -> Result<Benchmark, BenchError> {
    const N: usize = 5;
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= N || b >= N || a == b) {
        return Err(BenchError::InvalidInstance(format!("edge ({a},{b}) is not valid on {N} vertices")));
    }
    let mut b = Builder::new(N);
    b.each(H, 0..N);
    for &(gamma, beta) in layers {
        for &(u, v) in edges {
            b.g(Cx, &[u, v]).r(Rz, 2.0 * gamma, &[v]).g(Cx, &[u, v]);
        }
        for q in 0..N {
            b.r(Rx, 2.0 * beta, &[q]);
        }
    }
    Ok(Benchmark {
        algorithm: Algorithm::Qaoa,
        circuit: b.measure(0..N),
        correct: CorrectOutput::Modal,
    })
}

/// Default phase-register size for the Shor instance.
pub const SHOR_PHASE_BITS: usize = 6;

/// Controlled multiplication by 7 mod 15 on a 4-qubit target (least
/// significant qubit first): rotate right (multiply by 8), then complement.
fn controlled_mul7(control: usize, t: [usize; 4]) -> Vec<GateInstance> {
    let f = GateInstance::fixed;
    let mut gates = vec![
        f(Cswap, &[control, t[0], t[1]]),
        f(Cswap, &[control, t[1], t[2]]),
        f(Cswap, &[control, t[2], t[3]]),
    ];
    gates.extend(t.iter().map(|&q| f(Cx, &[control, q])));
    gates
}

/// Controlled multiplication by 4 mod 15: rotate by two places.
fn controlled_mul4(control: usize, t: [usize; 4]) -> Vec<GateInstance> {
    let f = GateInstance::fixed;
    vec![f(Cswap, &[control, t[0], t[2]]), f(Cswap, &[control, t[1], t[3]])]
}

/// Order finding for `a = 7`, `N = 15` with [`SHOR_PHASE_BITS`] counting qubits.
pub fn gen_shor15() -> Benchmark {
    gen_shor15_with_phase_bits(SHOR_PHASE_BITS).expect("default instance is valid")
}

/// Order finding for `a = 7`, `N = 15` with `phase_bits` counting qubits
/// (2 to 8) followed by a 4-qubit work register initialised to `|1>`.
/// Only the counting register is measured.
pub fn gen_shor15_with_phase_bits(phase_bits: usize) -> Result<Benchmark, BenchError> {
    if !(2..=8).contains(&phase_bits) {
        return Err(BenchError::InvalidInstance(format!(
            "Shor phase register must have 2..=8 qubits, got {phase_bits}"
        )));
    }
    let k = phase_bits;
    let target = [k, k + 1, k + 2, k + 3];
    let counting: Vec<usize> = (0..k).collect();
    let mut b = Builder::new(k + 4);
    b.g(X, &[target[0]]).each(H, 0..k);
    // 7^(2^j) mod 15 is 7, 4, then 1 for every higher power.
    b.extend(controlled_mul7(0, target));
    b.extend(controlled_mul4(1, target));
    b.extend(inverse_qft(&counting));
    Ok(Benchmark {
        algorithm: Algorithm::Shor,
        circuit: b.measure(0..k),
        correct: CorrectOutput::ModalNonzero,
    })
}

/// A 2x2 system `A = [[d, o], [o, d]]`, `b = |rhs>`, restricted to positive
/// eigenvalues `d + o`, `d - o` with ratio 1 or 2 so that two clock qubits
/// represent them exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhlSystem {
    pub diagonal: f64,
    pub off_diagonal: f64,
    pub rhs: usize,
}

impl HhlSystem {
    /// `A = [[1, -1/3], [-1/3, 1]]`, `b = (0, 1)`.
    pub const DEFAULT: HhlSystem = HhlSystem {
        diagonal: 1.0,
        off_diagonal: -1.0 / 3.0,
        rhs: 1,
    };

    fn eigenvalues(&self) -> (f64, f64) {
        let (a, b) = (self.diagonal + self.off_diagonal, self.diagonal - self.off_diagonal);
        (a.min(b), a.max(b))
    }

    /// Classical solution of `A x = b`.
    pub fn solve(&self) -> [f64; 2] {
        let (d, o) = (self.diagonal, self.off_diagonal);
        let det = d * d - o * o;
        let b = if self.rhs == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
        [(d * b[0] - o * b[1]) / det, (d * b[1] - o * b[0]) / det]
    }

    fn check(&self) -> Result<(), BenchError> {
        let (lo, hi) = self.eigenvalues();
        let ratio = hi / lo;
        let ok = lo > 0.0 && ((ratio - 1.0).abs() < 1e-12 || (ratio - 2.0).abs() < 1e-12) && self.rhs < 2;
        if ok {
            Ok(())
        } else {
            Err(BenchError::InvalidInstance(format!(
                "HHL system needs positive eigenvalues with ratio 1 or 2 and rhs 0 or 1, got {self:?}"
            )))
        }
    }
}

/// `RY`, `RZ` controlled by one qubit via the two-CX construction.
fn controlled_rotation(kind: GateKind, theta: f64, control: usize, target: usize) -> Vec<GateInstance> {
    vec![
        GateInstance::rotation(kind, theta / 2.0, &[target]),
        GateInstance::fixed(Cx, &[control, target]),
        GateInstance::rotation(kind, -theta / 2.0, &[target]),
        GateInstance::fixed(Cx, &[control, target]),
    ]
}

/// HHL for the default system. Qubit 0 holds the solution, 1 and 2 the
/// eigenvalue clock, 3 the inversion ancilla; all four are measured.
pub fn gen_hhl_2x2() -> Benchmark {
    gen_hhl(&HhlSystem::DEFAULT).expect("default system is valid")
}

pub fn gen_hhl(system: &HhlSystem) -> Result<Benchmark, BenchError> {
    system.check()?;
    let (sol, clock, anc) = (0, [1, 2], 3);
    let (lambda_min, _) = system.eigenvalues();
    // Evolution time placing lambda_min on clock value 1 and 2*lambda_min on 2.
    let t = PI / (2.0 * lambda_min);

    // exp(i A t) = exp(i d t) * RX(-2 o t); U^(2^j) controlled on clock[j].
    let mut qpe = Vec::new();
    for (j, &c) in clock.iter().enumerate() {
        let scale = f64::from(1u32 << j);
        qpe.push(GateInstance::rotation(P, system.diagonal * t * scale, &[c]));
        let theta = -2.0 * system.off_diagonal * t * scale;
        qpe.push(GateInstance::fixed(H, &[sol]));
        qpe.extend(controlled_rotation(Rz, theta, c, sol));
        qpe.push(GateInstance::fixed(H, &[sol]));
    }
    qpe.extend(inverse_qft(&clock));

    let mut b = Builder::new(4);
    if system.rhs == 1 {
        b.g(X, &[sol]);
    }
    b.each(H, clock);
    b.extend(qpe.iter().cloned());
    // Ancilla amplitude 1/lambda on clock values 1 and 2.
    b.extend(controlled_rotation(Ry, PI, clock[0], anc));
    b.extend(controlled_rotation(Ry, PI / 3.0, clock[1], anc));
    b.extend(inverse(&qpe));
    b.each(H, clock);
    Ok(Benchmark {
        algorithm: Algorithm::Hhl,
        circuit: b.measure([sol, clock[0], clock[1], anc]),
        correct: CorrectOutput::Modal,
    })
}
