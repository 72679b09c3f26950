//! A stand-in for an untrusted third-party compiler: basis decomposition
//! followed by peephole optimisation. Qubit routing is not modelled; every
//! pair of qubits is assumed connected.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::{GateInstance, GateKind, QuantumCircuit};

const ANGLE_EPS: f64 = 1e-12;
const MAX_REWRITE_DEPTH: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranspileError {
    #[error("basis {{{basis}}} cannot express gate {kind}")]
    NonUniversalBasis { basis: String, kind: GateKind },
    #[error("unknown basis gate {0:?}")]
    UnknownGate(String),
}

/// Gate kinds the target device executes natively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSet {
    allowed: BTreeSet<GateKind>,
}

impl Default for BasisSet {
    /// `{cx, rz, rx, x, p}`.
    fn default() -> Self {
        BasisSet::new([GateKind::Cx, GateKind::Rz, GateKind::Rx, GateKind::X, GateKind::P])
    }
}

impl BasisSet {
    pub fn new(kinds: impl IntoIterator<Item = GateKind>) -> Self {
        BasisSet {
            allowed: kinds.into_iter().collect(),
        }
    }

    pub fn contains(&self, kind: GateKind) -> bool {
        self.allowed.contains(&kind)
    }
}

impl FromStr for BasisSet {
    type Err = TranspileError;

    /// Parses a comma-separated list of gate names, e.g. `cx,rz,rx,x,p`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(str::trim)
            .filter(|n| !n.is_empty())
            .map(|n| GateKind::from_name(n).ok_or_else(|| TranspileError::UnknownGate(n.to_string())))
            .collect::<Result<BTreeSet<_>, _>>()
            .map(|allowed| BasisSet { allowed })
    }
}

impl fmt::Display for BasisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.allowed.iter().map(|k| k.mnemonic()).collect();
        f.write_str(&names.join(","))
    }
}

fn g(kind: GateKind, qubits: &[usize]) -> GateInstance {
    GateInstance::fixed(kind, qubits)
}

fn r(kind: GateKind, angle: f64, qubits: &[usize]) -> GateInstance {
    GateInstance::rotation(kind, angle, qubits)
}

/// One rewrite step, in time order. Returns `None` for kinds with no rule
/// (only reachable when the basis lacks the rule's building blocks).
fn expand(gate: &GateInstance, basis: &BasisSet) -> Option<Vec<GateInstance>> {
    use GateKind::*;
    let q = &gate.qubits;
    let theta = gate.angle().unwrap_or(0.0);
    let seq = match gate.kind {
        X => vec![r(Rx, PI, q)],
        // Y = i X Z
        Y => vec![g(Z, q), g(X, q)],
        Z => vec![r(P, PI, q)],
        S => vec![r(P, FRAC_PI_2, q)],
        Sdg => vec![r(P, -FRAC_PI_2, q)],
        T => vec![r(P, FRAC_PI_4, q)],
        Tdg => vec![r(P, -FRAC_PI_4, q)],
        P if basis.contains(Rz) => vec![r(Rz, theta, q)],
        Rz if basis.contains(P) => vec![r(P, theta, q)],
        P | Rz => return None,
        H => vec![r(Rz, FRAC_PI_2, q), r(Rx, FRAC_PI_2, q), r(Rz, FRAC_PI_2, q)],
        Ry => vec![r(Rz, -FRAC_PI_2, q), r(Rx, theta, q), r(Rz, FRAC_PI_2, q)],
        Rx if basis.contains(H) => vec![g(H, q), r(Rz, theta, q), g(H, q)],
        Rx => return None,
        Cx if basis.contains(Cz) => vec![g(H, &q[1..]), g(Cz, q), g(H, &q[1..])],
        Cx => return None,
        Cy => vec![g(Sdg, &q[1..]), g(Cx, q), g(S, &q[1..])],
        Cz => vec![r(Cp, PI, q)],
        Cs => vec![r(Cp, FRAC_PI_2, q)],
        Cp => {
            let (c, t) = (q[0], q[1]);
            vec![
                r(P, theta / 2.0, &[c]),
                g(Cx, &[c, t]),
                r(P, -theta / 2.0, &[t]),
                g(Cx, &[c, t]),
                r(P, theta / 2.0, &[t]),
            ]
        }
        Swap => {
            let (a, b) = (q[0], q[1]);
            vec![g(Cx, &[a, b]), g(Cx, &[b, a]), g(Cx, &[a, b])]
        }
        Ccx => {
            let (a, b, t) = (q[0], q[1], q[2]);
            vec![
                g(H, &[t]),
                g(Cx, &[b, t]),
                g(Tdg, &[t]),
                g(Cx, &[a, t]),
                g(T, &[t]),
                g(Cx, &[b, t]),
                g(Tdg, &[t]),
                g(Cx, &[a, t]),
                g(T, &[b]),
                g(T, &[t]),
                g(H, &[t]),
                g(Cx, &[a, b]),
                g(T, &[a]),
                g(Tdg, &[b]),
                g(Cx, &[a, b]),
            ]
        }
        Cswap => {
            let (c, a, b) = (q[0], q[1], q[2]);
            vec![g(Cx, &[b, a]), g(Ccx, &[c, a, b]), g(Cx, &[b, a])]
        }
    };
    Some(seq)
}

fn lower(
    gate: &GateInstance,
    basis: &BasisSet,
    depth: usize,
    out: &mut Vec<GateInstance>,
) -> Result<(), TranspileError> {
    if basis.contains(gate.kind) {
        out.push(gate.clone());
        return Ok(());
    }
    let fail = || TranspileError::NonUniversalBasis {
        basis: basis.to_string(),
        kind: gate.kind,
    };
    if depth >= MAX_REWRITE_DEPTH {
        return Err(fail());
    }
    let seq = expand(gate, basis).ok_or_else(fail)?;
    for step in &seq {
        lower(step, basis, depth + 1, out).map_err(|_| fail())?;
    }
    Ok(())
}

/// Rewrites every gate outside `basis` into basis gates. Measurements are
/// carried over unchanged; global phase is not preserved.
pub fn decompose(circuit: &QuantumCircuit, basis: &BasisSet) -> Result<QuantumCircuit, TranspileError> {
    let mut gates = Vec::new();
    for gate in circuit.gates() {
        lower(gate, basis, 0, &mut gates)?;
    }
    Ok(circuit.with_gates(gates))
}

/// Operands up to the symmetries of the gate, for cancellation matching.
fn canonical_operands(gate: &GateInstance) -> Vec<usize> {
    use GateKind::*;
    let mut q = gate.qubits.clone();
    match gate.kind {
        Cz | Cp | Cs | Swap => q.sort_unstable(),
        Ccx => q[..2].sort_unstable(),
        Cswap => q[1..].sort_unstable(),
        _ => {}
    }
    q
}

fn is_mergeable(kind: GateKind) -> bool {
    matches!(kind, GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::P | GateKind::Cp)
}

fn reduce_angle(theta: f64) -> Option<f64> {
    let t = theta.rem_euclid(TAU);
    (t > ANGLE_EPS && TAU - t > ANGLE_EPS).then_some(t)
}

/// One left-to-right sweep. Returns the new gate list and whether anything changed.
fn sweep(gates: &[GateInstance]) -> (Vec<GateInstance>, bool) {
    let mut out: Vec<GateInstance> = Vec::with_capacity(gates.len());
    let mut changed = false;
    for gate in gates {
        if is_mergeable(gate.kind) && reduce_angle(gate.angle().unwrap_or(0.0)).is_none() {
            changed = true;
            continue;
        }
        // The predecessor must be the last gate on every one of our qubits.
        let last_on = |q: usize| out.iter().rposition(|p| p.qubits.contains(&q));
        let pred = last_on(gate.qubits[0]).filter(|&j| {
            gate.qubits[1..].iter().all(|&q| last_on(q) == Some(j))
                && out[j].kind == gate.kind
                && canonical_operands(&out[j]) == canonical_operands(gate)
        });
        match pred {
            Some(j) if gate.kind.is_self_inverse() => {
                out.remove(j);
                changed = true;
            }
            Some(j) if is_mergeable(gate.kind) => {
                let sum = out[j].params[0] + gate.params[0];
                match reduce_angle(sum) {
                    Some(t) => out[j].params[0] = t,
                    None => {
                        out.remove(j);
                    }
                }
                changed = true;
            }
            _ => out.push(gate.clone()),
        }
    }
    (out, changed)
}

/// Cancels adjacent self-inverse pairs and merges adjacent same-axis
/// rotations until nothing changes. Never increases the gate count.
pub fn peephole_optimize(circuit: &QuantumCircuit) -> QuantumCircuit {
    let mut gates: Vec<GateInstance> = circuit.gates().cloned().collect();
    loop {
        let (next, changed) = sweep(&gates);
        gates = next;
        if !changed {
            break;
        }
    }
    circuit.with_gates(gates)
}

/// `decompose` then, when `optimize` is set, `peephole_optimize`.
pub fn transpile_with(
    circuit: &QuantumCircuit,
    basis: &BasisSet,
    optimize: bool,
) -> Result<QuantumCircuit, TranspileError> {
    let lowered = decompose(circuit, basis)?;
    Ok(if optimize {
        peephole_optimize(&lowered)
    } else {
        lowered
    })
}

pub fn transpile(circuit: &QuantumCircuit, basis: &BasisSet) -> Result<QuantumCircuit, TranspileError> {
    transpile_with(circuit, basis, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{format_bits, MeasurementMap};
    use crate::sim::{circuit_probabilities, probabilities, Statevector};

    fn circuit(n: usize, gates: Vec<GateInstance>) -> QuantumCircuit {
        let mut c = QuantumCircuit::new(n).unwrap();
        for gate in gates {
            c.push_gate(gate).unwrap();
        }
        c.measure_all();
        c
    }

    #[test]
    fn basis_parses_and_prints() {
        let b: BasisSet = "cx, rz,rx,x,p".parse().unwrap();
        assert_eq!(b, BasisSet::default());
        assert_eq!(b.to_string(), "x,rx,rz,p,cx");
        assert!(matches!("cx,foo".parse::<BasisSet>(), Err(TranspileError::UnknownGate(_))));
    }

    #[test]
    fn basis_circuit_unchanged() {
        let c = circuit(3, vec![g(GateKind::Cx, &[0, 1]), g(GateKind::Cx, &[1, 2]), g(GateKind::Cx, &[0, 2])]);
        assert_eq!(decompose(&c, &BasisSet::default()).unwrap(), c);
        assert_eq!(transpile(&c, &BasisSet::default()).unwrap(), c);
    }

    #[test]
    fn swap_is_three_cnots() {
        let c = circuit(2, vec![g(GateKind::Swap, &[0, 1])]);
        let d = decompose(&c, &BasisSet::default()).unwrap();
        let gates: Vec<_> = d.gates().cloned().collect();
        assert_eq!(
            gates,
            vec![g(GateKind::Cx, &[0, 1]), g(GateKind::Cx, &[1, 0]), g(GateKind::Cx, &[0, 1])]
        );
    }

    #[test]
    fn toffoli_decomposition_matches_on_every_basis_input() {
        // Oracle: for each basis input, simulate CCX directly and the
        // decomposed network, and compare the resulting distributions.
        let basis = BasisSet::default();
        let ccx = g(GateKind::Ccx, &[0, 1, 2]);
        let lowered = decompose(&circuit(3, vec![ccx.clone()]), &basis).unwrap();
        assert_eq!(lowered.gates().filter(|g| g.kind == GateKind::Cx).count(), 6);
        for input in 0..8 {
            let mut direct = Statevector::basis(3, input).unwrap();
            direct.apply(&ccx);
            let mut net = Statevector::basis(3, input).unwrap();
            for gate in lowered.gates() {
                net.apply(gate);
            }
            let map = MeasurementMap::identity(3);
            let pd = probabilities(&direct, &map);
            let pn = probabilities(&net, &map);
            assert!(pd.max_abs_diff(&pn) < 1e-12, "input {}", format_bits(input as u64, 3));
        }
    }

    #[test]
    fn every_kind_decomposes_faithfully() {
        let basis = BasisSet::default();
        for kind in GateKind::ALL {
            let qubits: Vec<usize> = [1, 2, 0][..kind.arity()].to_vec();
            let gate = GateInstance::new(kind, qubits, vec![0.83; kind.param_count()]).unwrap();
            let c = circuit(
                3,
                vec![
                    g(GateKind::H, &[0]),
                    r(GateKind::Ry, 1.1, &[1]),
                    r(GateKind::Rx, 0.4, &[2]),
                    g(GateKind::Cx, &[0, 2]),
                    gate,
                    g(GateKind::H, &[1]),
                    g(GateKind::H, &[2]),
                ],
            );
            let d = decompose(&c, &basis).unwrap();
            assert!(d.gates().all(|g| basis.contains(g.kind)), "{kind}");
            let diff = circuit_probabilities(&c)
                .unwrap()
                .max_abs_diff(&circuit_probabilities(&d).unwrap());
            assert!(diff < 1e-9, "{kind}: {diff}");
        }
    }

    #[test]
    fn missing_building_blocks_is_an_error() {
        let c = circuit(2, vec![g(GateKind::H, &[0])]);
        let no_rx: BasisSet = "cx,rz,p".parse().unwrap();
        assert!(matches!(
            decompose(&c, &no_rx),
            Err(TranspileError::NonUniversalBasis { kind: GateKind::H, .. })
        ));
        let c = circuit(2, vec![g(GateKind::Swap, &[0, 1])]);
        let no_cx: BasisSet = "rz,rx".parse().unwrap();
        assert!(decompose(&c, &no_cx).is_err());
    }

    #[test]
    fn alternative_basis_with_cz() {
        let basis: BasisSet = "cz,h,rz,x".parse().unwrap();
        let c = circuit(3, vec![g(GateKind::H, &[0]), g(GateKind::Ccx, &[0, 1, 2]), g(GateKind::Cy, &[2, 1])]);
        let d = decompose(&c, &basis).unwrap();
        assert!(d.gates().all(|g| basis.contains(g.kind)));
        let diff = circuit_probabilities(&c)
            .unwrap()
            .max_abs_diff(&circuit_probabilities(&d).unwrap());
        assert!(diff < 1e-9);
    }

    #[test]
    fn self_inverse_pair_cancels() {
        let c = circuit(1, vec![g(GateKind::X, &[0]), g(GateKind::X, &[0])]);
        assert_eq!(peephole_optimize(&c).gate_count(), 0);
    }

    #[test]
    fn opposite_rotations_vanish() {
        let c = circuit(1, vec![r(GateKind::Rz, 0.3, &[0]), r(GateKind::Rz, -0.3, &[0])]);
        assert_eq!(peephole_optimize(&c).gate_count(), 0);
    }

    #[test]
    fn rotations_merge_modulo_tau() {
        let c = circuit(1, vec![r(GateKind::P, 5.0, &[0]), r(GateKind::P, 2.0, &[0])]);
        let o = peephole_optimize(&c);
        let gates: Vec<_> = o.gates().collect();
        assert_eq!(gates.len(), 1);
        assert!((gates[0].params[0] - (7.0 - TAU)).abs() < 1e-12);
    }

    #[test]
    fn cancellation_needs_true_adjacency() {
        // CX(0,1) . X(1) . CX(0,1) must not cancel.
        let c = circuit(2, vec![g(GateKind::Cx, &[0, 1]), g(GateKind::X, &[1]), g(GateKind::Cx, &[0, 1])]);
        assert_eq!(peephole_optimize(&c).gate_count(), 3);
        // A gate on an unrelated qubit in between does not block it.
        let c = circuit(3, vec![g(GateKind::Cx, &[0, 1]), g(GateKind::X, &[2]), g(GateKind::Cx, &[0, 1])]);
        assert_eq!(peephole_optimize(&c).gate_count(), 1);
        // Reversed CX is a different gate.
        let c = circuit(2, vec![g(GateKind::Cx, &[0, 1]), g(GateKind::Cx, &[1, 0])]);
        assert_eq!(peephole_optimize(&c).gate_count(), 2);
        // SWAP is symmetric.
        let c = circuit(2, vec![g(GateKind::Swap, &[0, 1]), g(GateKind::Swap, &[1, 0])]);
        assert_eq!(peephole_optimize(&c).gate_count(), 0);
    }

    #[test]
    fn cascading_cancellation_reaches_fixpoint() {
        let c = circuit(
            2,
            vec![
                g(GateKind::X, &[0]),
                g(GateKind::Cx, &[0, 1]),
                g(GateKind::Cx, &[0, 1]),
                g(GateKind::X, &[0]),
            ],
        );
        let o = peephole_optimize(&c);
        assert_eq!(o.gate_count(), 0);
        assert_eq!(peephole_optimize(&o), o);
    }
}
