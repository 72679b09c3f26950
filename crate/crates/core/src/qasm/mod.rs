//! OpenQASM 2.0 subset: parsing into [`QuantumCircuit`] and canonical emission.
//!
//! Supported statements are the header, `include "qelib1.inc"`, one `qreg`,
//! at most one `creg`, gate applications over [`GateKind`] mnemonics,
//! `barrier` (dropped with a warning) and `measure`. Gate definitions,
//! `if`, `reset` and `opaque` are rejected.
//!
//! [`GateKind`]: crate::circuit::GateKind

mod lexer;
mod parser;

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::circuit::{Operation, QuantumCircuit};

/// Largest accepted register declaration.
pub const MAX_REGISTER_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan { line, column, length }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub span: SourceSpan,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub fn error(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            span,
            message: message.into(),
            severity: Severity::Error,
        }
    }

    pub fn warning(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            span,
            message: message.into(),
            severity: Severity::Warning,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {level}: {}", self.span, self.message)
    }
}

/// Every diagnostic from a failed parse, errors and warnings, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseErrors {
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseErrors {
    pub fn errors(&self) -> impl Iterator<Item = &ParseDiagnostic> + '_ {
        self.diagnostics.iter().filter(|d| d.is_error())
    }
}

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.errors().enumerate() {
            if i > 0 {
                f.write_char('\n')?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrors {}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutput {
    pub circuit: QuantumCircuit,
    pub warnings: Vec<ParseDiagnostic>,
}

pub fn parse_with_warnings(source: &str) -> Result<ParseOutput, ParseErrors> {
    let (circuit, mut diagnostics) = match lexer::tokenize(source) {
        Ok(tokens) => parser::Parser::new(&tokens).run(),
        Err(e) => (None, vec![ParseDiagnostic::error(e.span, e.message)]),
    };
    diagnostics.sort_by_key(|d| d.span);
    match circuit {
        Some(circuit) => Ok(ParseOutput {
            circuit,
            warnings: diagnostics,
        }),
        None => Err(ParseErrors { diagnostics }),
    }
}

/// Parses OpenQASM text, discarding warnings.
pub fn parse(source: &str) -> Result<QuantumCircuit, ParseErrors> {
    parse_with_warnings(source).map(|out| out.circuit)
}

/// Like [`parse`], for input not known to be UTF-8.
pub fn parse_bytes(bytes: &[u8]) -> Result<QuantumCircuit, ParseErrors> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(ParseErrors {
                diagnostics: vec![ParseDiagnostic::error(
                    SourceSpan::new(line, column, 1),
                    "input is not valid UTF-8",
                )],
            })
        }
    }
}

/// Renders with 17 significant digits, which always
/// reproduces the same binary64 value when parsed.
pub fn format_angle(value: f64) -> String {
    let sci = format!("{value:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    match exp {
        0..=16 => {
            let split = exp as usize + 1;
            let (int, frac) = digits.split_at(split);
            let frac = if frac.is_empty() { "0" } else { frac };
            format!("{sign}{int}.{frac}")
        }
        -6..=-1 => {
            let zeros = "0".repeat((-exp - 1) as usize);
            format!("{sign}0.{zeros}{digits}")
        }
        _ => format!("{sign}{mantissa}e{exp}"),
    }
}

/// Canonical text: header, declarations, one gate per line, then measurements.
pub fn emit(circuit: &QuantumCircuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits);
    let clbits = circuit.num_clbits();
    if clbits > 0 {
        let _ = writeln!(out, "creg c[{clbits}];");
    }
    for op in &circuit.ops {
        match op {
            Operation::Gate(g) => {
                out.push_str(g.kind.mnemonic());
                if !g.params.is_empty() {
                    let params: Vec<String> = g.params.iter().map(|&p| format_angle(p)).collect();
                    let _ = write!(out, "({})", params.join(","));
                }
                let qubits: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
                let _ = writeln!(out, " {};", qubits.join(","));
            }
            Operation::Measure(m) => {
                let _ = writeln!(out, "measure q[{}] -> c[{}];", m.qubit, m.clbit);
            }
        }
    }
    out
}
