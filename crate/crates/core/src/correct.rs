//! Classical correction of measured outputs.
//!
//! Each key record maps to a [`ClassicalOp`] acting on classical bit
//! positions. Applying the ops front to back (most recent insertion first)
//! undoes the encryptor layer's effect on computational-basis outcomes.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::circuit::{format_bits, Counts, GateKind, MeasurementClass, MeasurementMap};
use crate::obfuscate::{GatePool, ObfuscationKey, RecordError};
use crate::sim::ProbabilityVector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorrectionError {
    #[error("gate {0} creates superposition and has no classical equivalent")]
    Superposing(GateKind),
    #[error("control qubit {qubit} of {kind} is never measured, so its condition is unknowable")]
    UnmeasuredControl { kind: GateKind, qubit: usize },
    #[error("{kind} exchanges measured qubit {measured} with unmeasured qubit {unmeasured}")]
    HalfMeasuredSwap {
        kind: GateKind,
        measured: usize,
        unmeasured: usize,
    },
    #[error("gate {kind} expects {expected} operand(s), got {found}")]
    OperandCount {
        kind: GateKind,
        expected: usize,
        found: usize,
    },
    #[error("key record {position}: {source}")]
    Record {
        position: usize,
        #[source]
        source: RecordError,
    },
    #[error("bitstring {bits:?} does not match {width} classical bits")]
    BadBitstring { bits: String, width: usize },
}

/// Measurement-level equivalent of an encryptor gate. Positions are
/// classical bit indices; every variant is an involution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassicalOp {
    Identity,
    Flip { target: usize },
    CondFlip { controls: Vec<usize>, target: usize },
    Swap { a: usize, b: usize },
    CondSwap { control: usize, a: usize, b: usize },
}

impl ClassicalOp {
    /// Applies the op to a bit vector indexed by classical bit.
    pub fn apply_bits(&self, bits: &mut [bool]) {
        match self {
            ClassicalOp::Identity => {}
            ClassicalOp::Flip { target } => bits[*target] = !bits[*target],
            ClassicalOp::CondFlip { controls, target } => {
                if controls.iter().all(|&c| bits[c]) {
                    bits[*target] = !bits[*target];
                }
            }
            ClassicalOp::Swap { a, b } => bits.swap(*a, *b),
            ClassicalOp::CondSwap { control, a, b } => {
                if bits[*control] {
                    bits.swap(*a, *b);
                }
            }
        }
    }

    /// Applies the op to an outcome index (classical bit `c` is bit `c`).
    pub fn apply_index(&self, x: u64) -> u64 {
        let bit = |i: usize| (x >> i) & 1 == 1;
        let swap = |x: u64, a: usize, b: usize| {
            if bit(a) != bit(b) {
                x ^ (1 << a) ^ (1 << b)
            } else {
                x
            }
        };
        match self {
            ClassicalOp::Identity => x,
            ClassicalOp::Flip { target } => x ^ (1 << target),
            ClassicalOp::CondFlip { controls, target } => {
                if controls.iter().all(|&c| bit(c)) {
                    x ^ (1 << target)
                } else {
                    x
                }
            }
            ClassicalOp::Swap { a, b } => swap(x, *a, *b),
            ClassicalOp::CondSwap { control, a, b } => {
                if bit(*control) {
                    swap(x, *a, *b)
                } else {
                    x
                }
            }
        }
    }
}

/// Translates a gate on `operands` (controls first) into the classical op on
/// measured bit positions.
///
/// A record whose affected qubits are all unmeasured degrades to
/// [`ClassicalOp::Identity`]. A record that reads an unmeasured qubit into a
/// measured one cannot be corrected and is rejected.
pub fn classical_equivalent(
    kind: GateKind,
    operands: &[usize],
    map: &MeasurementMap,
) -> Result<ClassicalOp, CorrectionError> {
    if operands.len() != kind.arity() {
        return Err(CorrectionError::OperandCount {
            kind,
            expected: kind.arity(),
            found: operands.len(),
        });
    }
    match kind.class() {
        MeasurementClass::Superposing => return Err(CorrectionError::Superposing(kind)),
        MeasurementClass::PhaseOnly => return Ok(ClassicalOp::Identity),
        MeasurementClass::BasisPermuting => {}
    }

    let (controls, targets) = operands.split_at(kind.num_controls());
    let degrade = |qubits: &[usize]| {
        log::info!("{kind} on unmeasured qubit(s) {qubits:?} needs no correction");
        Ok(ClassicalOp::Identity)
    };
    let routed_controls = |controls: &[usize]| {
        controls
            .iter()
            .map(|&q| {
                map.clbit(q)
                    .ok_or(CorrectionError::UnmeasuredControl { kind, qubit: q })
            })
            .collect::<Result<Vec<_>, _>>()
    };

    match kind {
        GateKind::X | GateKind::Y | GateKind::Cx | GateKind::Cy | GateKind::Ccx => {
            let Some(target) = map.clbit(targets[0]) else {
                return degrade(targets);
            };
            let controls = routed_controls(controls)?;
            Ok(if controls.is_empty() {
                ClassicalOp::Flip { target }
            } else {
                ClassicalOp::CondFlip { controls, target }
            })
        }
        GateKind::Swap | GateKind::Cswap => {
            let (qa, qb) = (targets[0], targets[1]);
            let (a, b) = match (map.clbit(qa), map.clbit(qb)) {
                (None, None) => return degrade(targets),
                (Some(a), Some(b)) => (a.min(b), a.max(b)),
                (Some(_), None) => {
                    return Err(CorrectionError::HalfMeasuredSwap {
                        kind,
                        measured: qa,
                        unmeasured: qb,
                    })
                }
                (None, Some(_)) => {
                    return Err(CorrectionError::HalfMeasuredSwap {
                        kind,
                        measured: qb,
                        unmeasured: qa,
                    })
                }
            };
            Ok(match routed_controls(controls)?.as_slice() {
                [] => ClassicalOp::Swap { a, b },
                [control] => ClassicalOp::CondSwap {
                    control: *control,
                    a,
                    b,
                },
                _ => unreachable!("swap family has at most one control"),
            })
        }
        _ => unreachable!("every basis-permuting kind is handled above"),
    }
}

/// A key compiled against a pool and measurement map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corrector {
    ops: Vec<ClassicalOp>,
    width: usize,
}

impl Corrector {
    pub fn new(
        key: &ObfuscationKey,
        pool: &GatePool,
        map: &MeasurementMap,
    ) -> Result<Self, CorrectionError> {
        let ops = key
            .records
            .iter()
            .enumerate()
            .map(|(position, r)| {
                let entry = pool
                    .check_record(r, map.num_qubits())
                    .map_err(|source| CorrectionError::Record { position, source })?;
                classical_equivalent(entry.kind, &r.qubits, map)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Corrector {
            ops,
            width: map.num_clbits(),
        })
    }

    pub fn ops(&self) -> &[ClassicalOp] {
        &self.ops
    }

    pub fn apply_index(&self, x: u64) -> u64 {
        self.ops.iter().fold(x, |acc, op| op.apply_index(acc))
    }

    pub fn correct_bitstring(&self, bits: &str) -> Result<String, CorrectionError> {
        if bits.len() != self.width || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(CorrectionError::BadBitstring {
                bits: bits.to_string(),
                width: self.width,
            });
        }
        // Index by classical bit: bit 0 is the last character.
        let mut v: Vec<bool> = bits.bytes().rev().map(|b| b == b'1').collect();
        for op in &self.ops {
            op.apply_bits(&mut v);
        }
        Ok(v.iter().rev().map(|&b| if b { '1' } else { '0' }).collect())
    }

    pub fn correct_counts(&self, counts: &Counts) -> Result<Counts, CorrectionError> {
        let mut out: BTreeMap<String, u64> = BTreeMap::new();
        for (k, n) in counts.iter() {
            *out.entry(self.correct_bitstring(k)?).or_insert(0) += n;
        }
        Ok(Counts::new(out, counts.shots(), self.width).expect("correction preserves totals"))
    }

    /// Pushes a distribution through the correction map.
    pub fn correct_probabilities(&self, probs: &ProbabilityVector) -> ProbabilityVector {
        let src = probs.as_slice();
        let mut out = vec![0.0; src.len()];
        for (x, p) in src.iter().enumerate() {
            out[self.apply_index(x as u64) as usize] += p;
        }
        ProbabilityVector::from_raw(out)
    }

    /// Whether the composite map is a bijection on all `2^width` outcomes.
    pub fn is_bijective(&self) -> bool {
        let n = 1u64 << self.width;
        let mut seen = vec![false; n as usize];
        (0..n).all(|x| !std::mem::replace(&mut seen[self.apply_index(x) as usize], true))
    }
}

pub fn correct_bitstring(
    bits: &str,
    key: &ObfuscationKey,
    pool: &GatePool,
    map: &MeasurementMap,
) -> Result<String, CorrectionError> {
    Corrector::new(key, pool, map)?.correct_bitstring(bits)
}

pub fn correct_counts(
    counts: &Counts,
    key: &ObfuscationKey,
    pool: &GatePool,
    map: &MeasurementMap,
) -> Result<Counts, CorrectionError> {
    Corrector::new(key, pool, map)?.correct_counts(counts)
}

/// Renders an outcome index with the counts key convention.
pub fn outcome_key(index: u64, width: usize) -> String {
    format_bits(index, width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Measurement;
    use crate::obfuscate::InsertionRecord;

    fn key(records: &[(u32, &[usize])]) -> ObfuscationKey {
        ObfuscationKey {
            records: records
                .iter()
                .map(|(i, q)| InsertionRecord::new(*i, q.to_vec()))
                .collect(),
        }
    }

    #[test]
    fn case_study_equivalents() {
        let map = MeasurementMap::identity(5);
        assert_eq!(
            classical_equivalent(GateKind::S, &[1], &map),
            Ok(ClassicalOp::Identity)
        );
        assert_eq!(
            classical_equivalent(GateKind::Ccx, &[1, 4, 3], &map),
            Ok(ClassicalOp::CondFlip {
                controls: vec![1, 4],
                target: 3
            })
        );
        assert_eq!(
            classical_equivalent(GateKind::Swap, &[2, 1], &map),
            Ok(ClassicalOp::Swap { a: 1, b: 2 })
        );
        assert_eq!(
            classical_equivalent(GateKind::Cx, &[2, 3], &map),
            Ok(ClassicalOp::CondFlip {
                controls: vec![2],
                target: 3
            })
        );
        assert_eq!(
            classical_equivalent(GateKind::Y, &[0], &map),
            Ok(ClassicalOp::Flip { target: 0 })
        );
        assert_eq!(
            classical_equivalent(GateKind::Cswap, &[0, 4, 2], &map),
            Ok(ClassicalOp::CondSwap {
                control: 0,
                a: 2,
                b: 4
            })
        );
        assert_eq!(
            classical_equivalent(GateKind::H, &[0], &map),
            Err(CorrectionError::Superposing(GateKind::H))
        );
    }

    #[test]
    fn routes_through_measurement_map() {
        // qubit 2 -> c0, qubit 0 -> c1; qubit 1 unmeasured.
        let map = MeasurementMap::from_measurements(
            3,
            [
                Measurement { qubit: 2, clbit: 0 },
                Measurement { qubit: 0, clbit: 1 },
            ],
        );
        assert_eq!(
            classical_equivalent(GateKind::Cx, &[0, 2], &map),
            Ok(ClassicalOp::CondFlip {
                controls: vec![1],
                target: 0
            })
        );
        assert_eq!(
            classical_equivalent(GateKind::Cx, &[0, 1], &map),
            Ok(ClassicalOp::Identity)
        );
        assert_eq!(
            classical_equivalent(GateKind::Cx, &[1, 0], &map),
            Err(CorrectionError::UnmeasuredControl {
                kind: GateKind::Cx,
                qubit: 1
            })
        );
        assert!(matches!(
            classical_equivalent(GateKind::Swap, &[0, 1], &map),
            Err(CorrectionError::HalfMeasuredSwap { measured: 0, unmeasured: 1, .. })
        ));
    }

    #[test]
    fn both_swapped_unmeasured_is_identity() {
        let map = MeasurementMap::from_measurements(3, [Measurement { qubit: 0, clbit: 0 }]);
        assert_eq!(
            classical_equivalent(GateKind::Swap, &[1, 2], &map),
            Ok(ClassicalOp::Identity)
        );
        assert_eq!(
            classical_equivalent(GateKind::Cswap, &[0, 1, 2], &map),
            Ok(ClassicalOp::Identity)
        );
    }

    #[test]
    fn bitstring_corrections() {
        let pool = GatePool::canonical();
        let map = MeasurementMap::identity(5);
        assert_eq!(
            correct_bitstring("01101", &ObfuscationKey::default(), &pool, &map).unwrap(),
            "01101"
        );
        assert_eq!(
            correct_bitstring("00000", &key(&[(0, &[2])]), &pool, &map).unwrap(),
            "00100"
        );
        assert!(matches!(
            correct_bitstring("0000", &key(&[(0, &[2])]), &pool, &map),
            Err(CorrectionError::BadBitstring { .. })
        ));
    }

    #[test]
    fn counts_corrections() {
        let pool = GatePool::canonical();
        let map = MeasurementMap::identity(5);
        let counts = Counts::from_pairs(5, [("00100", 1024u64)]).unwrap();
        let fixed = correct_counts(&counts, &key(&[(0, &[2])]), &pool, &map).unwrap();
        assert_eq!(fixed, Counts::from_pairs(5, [("00000", 1024u64)]).unwrap());

        let mixed = Counts::from_pairs(5, [("00100", 500u64), ("11111", 24), ("01010", 500)]).unwrap();
        let phase_only = key(&[(5, &[0]), (5, &[3])]);
        assert_eq!(correct_counts(&mixed, &phase_only, &pool, &map).unwrap(), mixed);
    }

    #[test]
    fn case_study_steps_in_order() {
        // Walk the seven decryption steps on one concrete outcome by hand.
        let k = key(&[
            (2, &[2, 1]),
            (5, &[1]),
            (2, &[2, 3]),
            (3, &[1, 4, 3]),
            (2, &[3, 0]),
            (5, &[1]),
            (1, &[2, 3]),
        ]);
        let c = Corrector::new(&k, &GatePool::canonical(), &MeasurementMap::identity(5)).unwrap();
        // "10110": b4=1 b3=0 b2=1 b1=1 b0=0
        // 1. swap b1,b2 (both 1)          -> 10110
        // 2. identity
        // 3. swap b2,b3                   -> 11010
        // 4. b1 and b4 set, flip b3       -> 10010
        // 5. swap b3,b0 (both 0)          -> 10010
        // 6. identity
        // 7. b2 clear, no flip            -> 10010
        assert_eq!(c.correct_bitstring("10110").unwrap(), "10010");
        assert!(c.is_bijective());
    }
}
