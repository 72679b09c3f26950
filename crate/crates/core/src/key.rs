//! Text codec for obfuscation keys.
//!
//! Grammar (no whitespace, decimal integers without leading zeros):
//!
//! ```text
//! key    := "" | record ("@" record)*
//! record := index "#" qubit ("|" qubit)*
//! ```

use thiserror::Error;

use crate::obfuscate::{GatePool, InsertionRecord, ObfuscationKey, RecordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyError {
    #[error("key syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("key record {position}: {source}")]
    Record {
        position: usize,
        #[source]
        source: RecordError,
    },
}

pub fn encode(key: &ObfuscationKey) -> String {
    key.records
        .iter()
        .map(|r| {
            let qubits: Vec<String> = r.qubits.iter().map(usize::to_string).collect();
            format!("{}#{}", r.gate_index, qubits.join("|"))
        })
        .collect::<Vec<_>>()
        .join("@")
}

/// Parses the grammar only, without checking indices against a pool.
pub fn parse_records(text: &str) -> Result<Vec<InsertionRecord>, KeyError> {
    let mut scanner = Scanner { bytes: text.as_bytes(), pos: 0 };
    let mut records = Vec::new();
    if text.is_empty() {
        return Ok(records);
    }
    loop {
        let gate_index = scanner.number()?;
        let gate_index = u32::try_from(gate_index).map_err(|_| scanner.error("gate index too large"))?;
        scanner.expect(b'#')?;
        let mut qubits = vec![scanner.number()?];
        while scanner.peek() == Some(b'|') {
            scanner.pos += 1;
            qubits.push(scanner.number()?);
        }
        records.push(InsertionRecord { gate_index, qubits });
        match scanner.peek() {
            None => return Ok(records),
            Some(b'@') => scanner.pos += 1,
            Some(_) => return Err(scanner.error("expected '@', '|' or end of key")),
        }
    }
}

/// Parses and validates every record against `pool` and `width`.
pub fn decode(text: &str, pool: &GatePool, width: usize) -> Result<ObfuscationKey, KeyError> {
    let records = parse_records(text)?;
    for (position, r) in records.iter().enumerate() {
        pool.check_record(r, width)
            .map_err(|source| KeyError::Record { position, source })?;
    }
    Ok(ObfuscationKey { records })
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Scanner<'_> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn error(&self, message: &str) -> KeyError {
        KeyError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn expect(&mut self, want: u8) -> Result<(), KeyError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", want as char)))
        }
    }

    fn number(&mut self) -> Result<usize, KeyError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        let bytes = self.bytes;
        let digits = &bytes[start..self.pos];
        if digits.is_empty() {
            self.pos = start;
            return Err(self.error("expected a decimal number"));
        }
        if digits.len() > 1 && digits[0] == b'0' {
            self.pos = start;
            return Err(self.error("leading zero in number"));
        }
        std::str::from_utf8(digits)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                self.pos = start;
                self.error("number too large")
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE_KEY: &str = "2#2|1@5#1@2#2|3@3#1|4|3@2#3|0@5#1@1#2|3";

    fn reference_records() -> Vec<InsertionRecord> {
        vec![
            InsertionRecord::new(2, [2, 1]),
            InsertionRecord::new(5, [1]),
            InsertionRecord::new(2, [2, 3]),
            InsertionRecord::new(3, [1, 4, 3]),
            InsertionRecord::new(2, [3, 0]),
            InsertionRecord::new(5, [1]),
            InsertionRecord::new(1, [2, 3]),
        ]
    }

    #[test]
    fn empty_key() {
        assert_eq!(encode(&ObfuscationKey::default()), "");
        let k = decode("", &GatePool::canonical(), 5).unwrap();
        assert!(k.is_empty());
    }

    #[test]
    fn single_record() {
        let key = ObfuscationKey {
            records: vec![InsertionRecord::new(0, [2])],
        };
        assert_eq!(encode(&key), "0#2");
    }

    #[test]
    fn case_study_key_encodes() {
        let key = ObfuscationKey { records: reference_records() };
        assert_eq!(encode(&key), REFERENCE_KEY);
    }

    #[test]
    fn case_study_key_decodes() {
        let key = decode(REFERENCE_KEY, &GatePool::canonical(), 5).unwrap();
        assert_eq!(key.records, reference_records());
    }

    #[test]
    fn unknown_index() {
        let err = decode("9#0", &GatePool::canonical(), 5).unwrap_err();
        assert_eq!(
            err,
            KeyError::Record {
                position: 0,
                source: RecordError::UnknownIndex(9)
            }
        );
    }

    #[test]
    fn arity_mismatch() {
        let err = decode("1#2", &GatePool::canonical(), 5).unwrap_err();
        assert!(matches!(
            err,
            KeyError::Record {
                source: RecordError::ArityMismatch { index: 1, expected: 2, found: 1 },
                ..
            }
        ));
    }

    #[test]
    fn width_and_duplicates() {
        let pool = GatePool::canonical();
        assert!(matches!(
            decode("0#5", &pool, 5),
            Err(KeyError::Record { source: RecordError::QubitOutOfRange { .. }, .. })
        ));
        assert!(matches!(
            decode("1#2|2", &pool, 5),
            Err(KeyError::Record { source: RecordError::DuplicateOperand(2), .. })
        ));
    }

    #[test]
    fn strict_syntax() {
        for (bad, offset) in [
            ("@0#1", 0),
            ("0#1@", 4),
            ("0#", 2),
            ("0#1|", 4),
            ("0 #1", 1),
            ("01#1", 0),
            ("0#1\n", 3),
            ("0##1", 2),
            ("#1", 0),
            ("0#1|x", 4),
        ] {
            match parse_records(bad) {
                Err(KeyError::Syntax { offset: o, .. }) => assert_eq!(o, offset, "{bad:?}"),
                other => panic!("{bad:?} -> {other:?}"),
            }
        }
        assert!(parse_records("0#99999999999999999999999").is_err());
    }
}
