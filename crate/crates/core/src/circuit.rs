//! Circuit intermediate representation shared by every pass.
//!
//! A [`QuantumCircuit`] is an ordered list of [`Operation`]s over `num_qubits`
//! qubits. Well-formed circuits keep all measurements in a terminal block;
//! [`validate`] reports every way a circuit can fail that rule or the operand
//! invariants, and the constructors in this module refuse to build circuits
//! that would violate them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How a gate acts on computational-basis measurement statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementClass {
    /// Unitary is a permutation matrix up to per-entry phases.
    BasisPermuting,
    /// Unitary is diagonal.
    PhaseOnly,
    /// Creates superposition from basis states.
    Superposing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    P,
    Cx,
    Cy,
    Cz,
    Cp,
    Cs,
    Swap,
    Ccx,
    Cswap,
}

impl GateKind {
    pub const ALL: [GateKind; 20] = [
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::P,
        GateKind::Cx,
        GateKind::Cy,
        GateKind::Cz,
        GateKind::Cp,
        GateKind::Cs,
        GateKind::Swap,
        GateKind::Ccx,
        GateKind::Cswap,
    ];

    pub fn arity(self) -> usize {
        use GateKind::*;
        match self {
            X | Y | Z | H | S | Sdg | T | Tdg | Rx | Ry | Rz | P => 1,
            Cx | Cy | Cz | Cp | Cs | Swap => 2,
            Ccx | Cswap => 3,
        }
    }

    pub fn param_count(self) -> usize {
        use GateKind::*;
        match self {
            Rx | Ry | Rz | P | Cp => 1,
            _ => 0,
        }
    }

    /// Number of leading operands that act as controls.
    pub fn num_controls(self) -> usize {
        use GateKind::*;
        match self {
            Cx | Cy | Cz | Cp | Cs | Cswap => 1,
            Ccx => 2,
            _ => 0,
        }
    }

    pub fn class(self) -> MeasurementClass {
        use GateKind::*;
        match self {
            X | Y | Cx | Cy | Swap | Ccx | Cswap => MeasurementClass::BasisPermuting,
            Z | S | Sdg | T | Tdg | Rz | P | Cz | Cp | Cs => MeasurementClass::PhaseOnly,
            H | Rx | Ry => MeasurementClass::Superposing,
        }
    }

    /// Lowercase OpenQASM 2.0 mnemonic.
    pub fn mnemonic(self) -> &'static str {
        use GateKind::*;
        match self {
            X => "x",
            Y => "y",
            Z => "z",
            H => "h",
            S => "s",
            Sdg => "sdg",
            T => "t",
            Tdg => "tdg",
            Rx => "rx",
            Ry => "ry",
            Rz => "rz",
            P => "p",
            Cx => "cx",
            Cy => "cy",
            Cz => "cz",
            Cp => "cp",
            Cs => "cs",
            Swap => "swap",
            Ccx => "ccx",
            Cswap => "cswap",
        }
    }

    /// Resolves a gate name, case-insensitively, including the common
    /// aliases (`cnot`, `ccnot`, `toffoli`, `fredkin`, `u1`, `cu1`).
    pub fn from_name(name: &str) -> Option<GateKind> {
        let lower = name.to_ascii_lowercase();
        let kind = match lower.as_str() {
            "cnot" => GateKind::Cx,
            "ccnot" | "toffoli" => GateKind::Ccx,
            "fredkin" => GateKind::Cswap,
            "u1" | "phase" => GateKind::P,
            "cu1" | "cphase" => GateKind::Cp,
            other => return GateKind::ALL.into_iter().find(|k| k.mnemonic() == other),
        };
        Some(kind)
    }

    pub fn is_self_inverse(self) -> bool {
        use GateKind::*;
        matches!(self, X | Y | Z | H | Cx | Cy | Cz | Swap | Ccx | Cswap)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

pub fn classify(kind: GateKind) -> MeasurementClass {
    kind.class()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("circuit must have at least one qubit")]
    NoQubits,
    #[error("qubit index {qubit} out of range for {width}-qubit circuit")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("duplicate qubit {qubit} in operand list")]
    DuplicateQubit { qubit: usize },
    #[error("gate {kind} expects {expected} qubit(s), got {found}")]
    ArityMismatch {
        kind: GateKind,
        expected: usize,
        found: usize,
    },
    #[error("gate {kind} expects {expected} parameter(s), got {found}")]
    ParamMismatch {
        kind: GateKind,
        expected: usize,
        found: usize,
    },
    #[error("qubit {qubit} is already measured")]
    QubitRemeasured { qubit: usize },
    #[error("classical bit {clbit} is already written")]
    ClbitReused { clbit: usize },
}

/// A gate applied to concrete qubits. Controls come first; for SWAP and
/// CSWAP the exchanged pair is the final two operands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateInstance {
    pub kind: GateKind,
    pub params: Vec<f64>,
    pub qubits: Vec<usize>,
}

impl GateInstance {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<f64>) -> Result<Self, CircuitError> {
        let gate = GateInstance { kind, params, qubits };
        gate.check_shape()?;
        Ok(gate)
    }

    /// Builds a parameterless gate. Panics on malformed operands; intended for
    /// hard-coded circuits.
    pub fn fixed(kind: GateKind, qubits: &[usize]) -> Self {
        Self::new(kind, qubits.to_vec(), Vec::new()).expect("well-formed fixed gate")
    }

    /// Builds a one-angle gate. Panics on malformed operands.
    pub fn rotation(kind: GateKind, angle: f64, qubits: &[usize]) -> Self {
        Self::new(kind, qubits.to_vec(), vec![angle]).expect("well-formed rotation gate")
    }

    pub fn angle(&self) -> Option<f64> {
        self.params.first().copied()
    }

    pub fn controls(&self) -> &[usize] {
        &self.qubits[..self.kind.num_controls()]
    }

    pub fn targets(&self) -> &[usize] {
        &self.qubits[self.kind.num_controls()..]
    }

    fn check_shape(&self) -> Result<(), CircuitError> {
        if self.qubits.len() != self.kind.arity() {
            return Err(CircuitError::ArityMismatch {
                kind: self.kind,
                expected: self.kind.arity(),
                found: self.qubits.len(),
            });
        }
        if self.params.len() != self.kind.param_count() {
            return Err(CircuitError::ParamMismatch {
                kind: self.kind,
                expected: self.kind.param_count(),
                found: self.params.len(),
            });
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if self.qubits[..i].contains(q) {
                return Err(CircuitError::DuplicateQubit { qubit: *q });
            }
        }
        Ok(())
    }

    pub fn check(&self, width: usize) -> Result<(), CircuitError> {
        self.check_shape()?;
        if let Some(&qubit) = self.qubits.iter().find(|&&q| q >= width) {
            return Err(CircuitError::QubitOutOfRange { qubit, width });
        }
        Ok(())
    }
}

impl fmt::Display for GateInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(a) = self.angle() {
            write!(f, "({a})")?;
        }
        write!(f, "@{:?}", self.qubits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub qubit: usize,
    pub clbit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Operation {
    Gate(GateInstance),
    Measure(Measurement),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumCircuit {
    pub num_qubits: usize,
    pub ops: Vec<Operation>,
}

impl QuantumCircuit {
    pub fn new(num_qubits: usize) -> Result<Self, CircuitError> {
        if num_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        Ok(QuantumCircuit {
            num_qubits,
            ops: Vec::new(),
        })
    }

    pub fn gates(&self) -> impl Iterator<Item = &GateInstance> + '_ {
        self.ops.iter().filter_map(|op| match op {
            Operation::Gate(g) => Some(g),
            Operation::Measure(_) => None,
        })
    }

    pub fn measurements(&self) -> impl Iterator<Item = &Measurement> + '_ {
        self.ops.iter().filter_map(|op| match op {
            Operation::Measure(m) => Some(m),
            Operation::Gate(_) => None,
        })
    }

    pub fn gate_count(&self) -> usize {
        self.gates().count()
    }

    pub fn num_clbits(&self) -> usize {
        self.measurements().count()
    }

    pub fn measurement_map(&self) -> MeasurementMap {
        MeasurementMap::from_measurements(self.num_qubits, self.measurements().copied())
    }

    /// Index of the first measurement, i.e. where new gates are inserted.
    fn insertion_point(&self) -> usize {
        self.ops
            .iter()
            .position(|op| matches!(op, Operation::Measure(_)))
            .unwrap_or(self.ops.len())
    }

    /// Inserts `gate` immediately before the measurement block.
    pub fn push_gate(&mut self, gate: GateInstance) -> Result<(), CircuitError> {
        gate.check(self.num_qubits)?;
        let at = self.insertion_point();
        self.ops.insert(at, Operation::Gate(gate));
        Ok(())
    }

    pub fn append_gate(&self, gate: GateInstance) -> Result<QuantumCircuit, CircuitError> {
        let mut out = self.clone();
        out.push_gate(gate)?;
        Ok(out)
    }

    /// Adds a measurement at the end of the measurement block.
    pub fn push_measure(&mut self, qubit: usize, clbit: usize) -> Result<(), CircuitError> {
        if qubit >= self.num_qubits {
            return Err(CircuitError::QubitOutOfRange {
                qubit,
                width: self.num_qubits,
            });
        }
        for m in self.measurements() {
            if m.qubit == qubit {
                return Err(CircuitError::QubitRemeasured { qubit });
            }
            if m.clbit == clbit {
                return Err(CircuitError::ClbitReused { clbit });
            }
        }
        self.ops.push(Operation::Measure(Measurement { qubit, clbit }));
        Ok(())
    }

    /// Measures every qubit into the classical bit with the same index.
    pub fn measure_all(&mut self) {
        for q in 0..self.num_qubits {
            self.push_measure(q, q).expect("fresh measurement");
        }
    }

    /// Same circuit with its gate list replaced; the measurement block is kept.
    pub fn with_gates(&self, gates: Vec<GateInstance>) -> QuantumCircuit {
        let mut ops: Vec<Operation> = gates.into_iter().map(Operation::Gate).collect();
        ops.extend(self.measurements().copied().map(Operation::Measure));
        QuantumCircuit {
            num_qubits: self.num_qubits,
            ops,
        }
    }
}

/// Routing from qubits to classical bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementMap {
    qubit_to_clbit: Vec<Option<usize>>,
    num_clbits: usize,
}

impl MeasurementMap {
    pub fn from_measurements(
        num_qubits: usize,
        measurements: impl IntoIterator<Item = Measurement>,
    ) -> Self {
        let mut qubit_to_clbit = vec![None; num_qubits];
        let mut num_clbits = 0;
        for m in measurements {
            if m.qubit < num_qubits {
                qubit_to_clbit[m.qubit] = Some(m.clbit);
                num_clbits += 1;
            }
        }
        MeasurementMap {
            qubit_to_clbit,
            num_clbits,
        }
    }

    /// Every qubit measured into the classical bit of the same index.
    pub fn identity(num_qubits: usize) -> Self {
        MeasurementMap {
            qubit_to_clbit: (0..num_qubits).map(Some).collect(),
            num_clbits: num_qubits,
        }
    }

    pub fn clbit(&self, qubit: usize) -> Option<usize> {
        self.qubit_to_clbit.get(qubit).copied().flatten()
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_to_clbit.len()
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    /// `(qubit, clbit)` pairs in qubit order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.qubit_to_clbit
            .iter()
            .enumerate()
            .filter_map(|(q, c)| c.map(|c| (q, c)))
    }

    pub fn measured_qubits(&self) -> Vec<usize> {
        self.pairs().map(|(q, _)| q).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NoQubits,
    QubitOutOfRange,
    DuplicateQubit,
    ArityMismatch,
    ParamMismatch,
    TerminalMeasurement,
    QubitRemeasured,
    ClbitReuse,
    NonContiguousClbits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Index into `QuantumCircuit::ops`, when the violation is tied to one op.
    pub position: Option<usize>,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some(p) => write!(f, "op {p}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Lists every invariant violation; an empty list means the circuit is valid.
pub fn validate(circuit: &QuantumCircuit) -> Vec<Violation> {
    let mut report = Vec::new();
    let mut push = |position, kind, message: String| {
        report.push(Violation {
            position,
            kind,
            message,
        })
    };
    if circuit.num_qubits == 0 {
        push(None, ViolationKind::NoQubits, "circuit has no qubits".into());
    }

    let mut seen_measure = false;
    let mut measured_qubits = BTreeMap::new();
    let mut written_clbits = BTreeMap::new();
    for (pos, op) in circuit.ops.iter().enumerate() {
        match op {
            Operation::Gate(g) => {
                if seen_measure {
                    push(
                        Some(pos),
                        ViolationKind::TerminalMeasurement,
                        format!("terminal measurement: gate {g} follows a measurement"),
                    );
                }
                if let Err(e) = g.check(circuit.num_qubits) {
                    let kind = match e {
                        CircuitError::QubitOutOfRange { .. } => ViolationKind::QubitOutOfRange,
                        CircuitError::DuplicateQubit { .. } => ViolationKind::DuplicateQubit,
                        CircuitError::ArityMismatch { .. } => ViolationKind::ArityMismatch,
                        _ => ViolationKind::ParamMismatch,
                    };
                    push(Some(pos), kind, e.to_string());
                }
            }
            Operation::Measure(m) => {
                seen_measure = true;
                if m.qubit >= circuit.num_qubits {
                    push(
                        Some(pos),
                        ViolationKind::QubitOutOfRange,
                        format!("measured qubit {} out of range", m.qubit),
                    );
                }
                if measured_qubits.insert(m.qubit, pos).is_some() {
                    push(
                        Some(pos),
                        ViolationKind::QubitRemeasured,
                        format!("qubit {} measured more than once", m.qubit),
                    );
                }
                if written_clbits.insert(m.clbit, pos).is_some() {
                    push(
                        Some(pos),
                        ViolationKind::ClbitReuse,
                        format!("classical bit reuse: c[{}] written twice", m.clbit),
                    );
                }
            }
        }
    }
    if let Some((&max, _)) = written_clbits.last_key_value() {
        if max + 1 != written_clbits.len() {
            push(
                None,
                ViolationKind::NonContiguousClbits,
                format!(
                    "classical bits are not contiguous from 0 ({} bits written, highest c[{max}])",
                    written_clbits.len()
                ),
            );
        }
    }
    report
}

/// Renders `value` as a bitstring of `width` characters with bit 0 rightmost.
pub fn format_bits(value: u64, width: usize) -> String {
    (0..width)
        .rev()
        .map(|i| if (value >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`format_bits`]. Returns `None` for non-binary characters or
/// strings wider than 64 bits.
pub fn parse_bits(bits: &str) -> Option<u64> {
    if bits.len() > 64 {
        return None;
    }
    bits.bytes().try_fold(0u64, |acc, b| match b {
        b'0' => Some(acc << 1),
        b'1' => Some((acc << 1) | 1),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountsError {
    #[error("bitstring {0:?} contains characters other than '0' and '1'")]
    NotBinary(String),
    #[error("bitstring {key:?} has length {found}, expected {expected}")]
    WidthMismatch {
        key: String,
        expected: usize,
        found: usize,
    },
    #[error("counts sum to {sum} but shots is {shots}")]
    ShotsMismatch { sum: u64, shots: u64 },
}

/// Histogram of measured bitstrings. Keys render classical bit 0 rightmost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CountsRepr", into = "CountsRepr")]
pub struct Counts {
    entries: BTreeMap<String, u64>,
    shots: u64,
    width: usize,
}

#[derive(Serialize, Deserialize)]
struct CountsRepr {
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl TryFrom<CountsRepr> for Counts {
    type Error = CountsError;

    fn try_from(repr: CountsRepr) -> Result<Self, Self::Error> {
        let width = repr.counts.keys().next().map_or(0, String::len);
        Counts::new(repr.counts, repr.shots, width)
    }
}

impl From<Counts> for CountsRepr {
    fn from(c: Counts) -> Self {
        CountsRepr {
            shots: c.shots,
            counts: c.entries,
        }
    }
}

impl Counts {
    pub fn new(
        entries: BTreeMap<String, u64>,
        shots: u64,
        width: usize,
    ) -> Result<Self, CountsError> {
        let mut sum = 0u64;
        for (key, &n) in &entries {
            if !key.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(CountsError::NotBinary(key.clone()));
            }
            if key.len() != width {
                return Err(CountsError::WidthMismatch {
                    key: key.clone(),
                    expected: width,
                    found: key.len(),
                });
            }
            sum += n;
        }
        if sum != shots {
            return Err(CountsError::ShotsMismatch { sum, shots });
        }
        Ok(Counts {
            entries,
            shots,
            width,
        })
    }

    /// Builds counts from `(key, count)` pairs, summing duplicate keys and
    /// taking shots as the total.
    pub fn from_pairs<I, S>(width: usize, pairs: I) -> Result<Self, CountsError>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut entries = BTreeMap::new();
        for (k, n) in pairs {
            *entries.entry(k.into()).or_insert(0) += n;
        }
        let shots = entries.values().sum();
        Counts::new(entries, shots, width)
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    /// Number of classical bits in every key.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, bits: &str) -> u64 {
        self.entries.get(bits).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Most frequent key; ties resolve to the lexicographically smallest key.
    pub fn mode(&self) -> Option<&str> {
        self.mode_where(|_| true)
    }

    /// Most frequent key satisfying `keep`, with the same tie rule as [`Counts::mode`].
    pub fn mode_where(&self, keep: impl Fn(&str) -> bool) -> Option<&str> {
        let mut best: Option<(&str, u64)> = None;
        for (k, v) in self.iter().filter(|(k, _)| keep(k)) {
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((k, v));
            }
        }
        best.map(|(k, _)| k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_matches_table() {
        assert_eq!(classify(GateKind::X), MeasurementClass::BasisPermuting);
        assert_eq!(classify(GateKind::S), MeasurementClass::PhaseOnly);
        assert_eq!(classify(GateKind::H), MeasurementClass::Superposing);
        let permuting = GateKind::ALL
            .iter()
            .filter(|k| k.class() == MeasurementClass::BasisPermuting)
            .count();
        let phase = GateKind::ALL
            .iter()
            .filter(|k| k.class() == MeasurementClass::PhaseOnly)
            .count();
        assert_eq!((permuting, phase), (7, 10));
    }

    #[test]
    fn names_resolve_with_aliases() {
        assert_eq!(GateKind::from_name("CNOT"), Some(GateKind::Cx));
        assert_eq!(GateKind::from_name("CCNOT"), Some(GateKind::Ccx));
        assert_eq!(GateKind::from_name("u1"), Some(GateKind::P));
        assert_eq!(GateKind::from_name("sdg"), Some(GateKind::Sdg));
        assert_eq!(GateKind::from_name("v"), None);
        for k in GateKind::ALL {
            assert_eq!(GateKind::from_name(k.mnemonic()), Some(k));
        }
    }

    #[test]
    fn append_to_empty_circuit() {
        let c = QuantumCircuit::new(1).unwrap();
        let c = c.append_gate(GateInstance::fixed(GateKind::X, &[0])).unwrap();
        assert_eq!(c.gate_count(), 1);
        assert_eq!(c.num_clbits(), 0);
    }

    #[test]
    fn append_goes_before_measurements() {
        let mut c = QuantumCircuit::new(2).unwrap();
        c.push_gate(GateInstance::fixed(GateKind::H, &[0])).unwrap();
        c.measure_all();
        let out = c.append_gate(GateInstance::fixed(GateKind::Cx, &[0, 1])).unwrap();
        assert_eq!(out.ops.len(), 4);
        assert_eq!(out.ops[0], c.ops[0]);
        assert!(matches!(&out.ops[1], Operation::Gate(g) if g.kind == GateKind::Cx));
        assert_eq!(&out.ops[2..], &c.ops[1..]);
        assert!(validate(&out).is_empty());
    }

    #[test]
    fn append_rejects_bad_operands() {
        let c = QuantumCircuit::new(3).unwrap();
        let dup = GateInstance {
            kind: GateKind::Swap,
            params: vec![],
            qubits: vec![2, 2],
        };
        assert_eq!(
            c.append_gate(dup),
            Err(CircuitError::DuplicateQubit { qubit: 2 })
        );
        let far = GateInstance {
            kind: GateKind::X,
            params: vec![],
            qubits: vec![3],
        };
        assert!(matches!(
            c.append_gate(far),
            Err(CircuitError::QubitOutOfRange { qubit: 3, width: 3 })
        ));
        assert!(matches!(
            GateInstance::new(GateKind::Cx, vec![0], vec![]),
            Err(CircuitError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn validate_flags_gate_after_measurement() {
        let mut c = QuantumCircuit::new(1).unwrap();
        c.measure_all();
        c.ops.push(Operation::Gate(GateInstance::fixed(GateKind::X, &[0])));
        let report = validate(&c);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].kind, ViolationKind::TerminalMeasurement);
        assert!(report[0].message.contains("terminal measurement"));
        assert_eq!(report[0].position, Some(1));
    }

    #[test]
    fn validate_flags_clbit_reuse() {
        let mut c = QuantumCircuit::new(2).unwrap();
        c.ops.push(Operation::Measure(Measurement { qubit: 0, clbit: 0 }));
        c.ops.push(Operation::Measure(Measurement { qubit: 1, clbit: 0 }));
        let report = validate(&c);
        assert!(report
            .iter()
            .any(|v| v.kind == ViolationKind::ClbitReuse && v.message.contains("classical bit reuse")));
    }

    #[test]
    fn validate_flags_gaps_in_clbits() {
        let mut c = QuantumCircuit::new(2).unwrap();
        c.push_measure(0, 1).unwrap();
        assert_eq!(validate(&c)[0].kind, ViolationKind::NonContiguousClbits);
    }

    #[test]
    fn bit_rendering_puts_bit_zero_right() {
        assert_eq!(format_bits(0b00100, 5), "00100");
        assert_eq!(format_bits(1, 3), "001");
        assert_eq!(parse_bits("110"), Some(6));
        assert_eq!(parse_bits("1x"), None);
    }

    #[test]
    fn counts_reject_inconsistent_shots() {
        let mut e = BTreeMap::new();
        e.insert("01".to_string(), 3);
        assert!(matches!(
            Counts::new(e.clone(), 4, 2),
            Err(CountsError::ShotsMismatch { .. })
        ));
        e.insert("1".to_string(), 1);
        assert!(matches!(
            Counts::new(e, 4, 2),
            Err(CountsError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn counts_json_shape() {
        let c = Counts::from_pairs(2, [("01", 3u64), ("10", 1)]).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"shots":4,"counts":{"01":3,"10":1}}"#);
        let back: Counts = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<Counts>(r#"{"shots":5,"counts":{"01":3}}"#).is_err());
    }

    #[test]
    fn mode_breaks_ties_lexicographically() {
        let c = Counts::from_pairs(2, [("11", 5u64), ("01", 5), ("00", 1)]).unwrap();
        assert_eq!(c.mode(), Some("01"));
        assert_eq!(c.mode_where(|k| k != "01"), Some("11"));
    }
}
